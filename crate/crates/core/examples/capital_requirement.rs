//! A minimum capital ratio, once against a boom-and-bust path and once
//! against a plain negative shock.

use inside_money::equilibrium::{find_equilibria, run_trajectory, ScanSettings, SelectionPolicy};
use inside_money::state::example_state;
use inside_money::{Belief, ModelParams};

fn main() -> inside_money::Result<()> {
    let s = example_state();
    let scan = ScanSettings::default();
    for gamma in [0.0, 0.16] {
        let params = ModelParams::example().with_gamma_min(gamma)?;
        let path = [Belief::new(32.0, 2.0)?, Belief::new(20.0, 2.0)?];
        let steps = run_trajectory(&s, &path, &params, SelectionPolicy::LargestStable, &scan)?;
        let crash = find_equilibria(&s, &Belief::new(16.0, 2.0)?, &params, &scan)?;
        println!(
            "gamma_min {gamma}: boom purchase {:.2}, crisis after bust {}, roots after Beta(16, 2): {:?}",
            steps[0].trade_quantity,
            steps.last().map(|st| st.crisis).unwrap_or(false),
            crash.prices()
        );
    }
    Ok(())
}
