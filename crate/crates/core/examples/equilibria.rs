//! All market-clearing prices after a shock, and the one each policy picks.

use inside_money::equilibrium::{find_equilibria, select_equilibrium, ScanSettings, SelectionPolicy};
use inside_money::state::example_state;
use inside_money::{Belief, ModelParams};

fn main() -> inside_money::Result<()> {
    let s = example_state();
    let params = ModelParams::example();
    for alpha in [20.0, 16.0, 12.0] {
        let set = find_equilibria(&s, &Belief::new(alpha, 2.0)?, &params, &ScanSettings::default())?;
        println!("Beta({alpha}, 2):");
        for e in &set.equilibria {
            println!("  {:.6} {:?} solvent={}", e.price, e.stability, e.solvent);
        }
        for policy in [
            SelectionPolicy::LargestStable,
            SelectionPolicy::NearestToPrevious,
            SelectionPolicy::SmallestStable,
        ] {
            let e = select_equilibrium(&set, policy, s.price)?;
            println!("  {policy:?} -> {:.6}", e.price);
        }
    }
    Ok(())
}
