//! One-shot shocks of growing optimism along `beta = 2`, as CSV.

use inside_money::equilibrium::{ScanSettings, SelectionPolicy};
use inside_money::state::example_state;
use inside_money::sweep::{linspace, sweep_severity, write_line_csv};
use inside_money::ModelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let line = sweep_severity(
        &example_state(),
        &linspace(12.0, 42.0, 31),
        2.0,
        &ModelParams::example(),
        SelectionPolicy::LargestStable,
        &ScanSettings::default(),
    )?;
    write_line_csv(std::io::stdout().lock(), &line)?;
    Ok(())
}
