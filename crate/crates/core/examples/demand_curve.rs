//! Demand schedules after a negative shock, written as CSV to stdout.

use inside_money::demand::{demand_curve, write_demand_csv};
use inside_money::state::example_state;
use inside_money::sweep::linspace;
use inside_money::{Belief, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = example_state();
    let shocked = Belief::new(16.0, 2.0)?;
    let curve = demand_curve(&s, &shocked, &ModelParams::example(), &linspace(0.6, 0.95, 36))?;
    write_demand_csv(std::io::stdout().lock(), &curve)?;
    Ok(())
}
