//! A coarse map of shock outcomes over `(alpha, beta)` and the edges of the
//! triple-equilibrium band, with and without a capital requirement.

use inside_money::equilibrium::SelectionPolicy;
use inside_money::state::example_state;
use inside_money::sweep::{fold_boundaries, linspace, region_map, region_scan, RegionClass};
use inside_money::ModelParams;

fn main() -> inside_money::Result<()> {
    let s = example_state();
    let alphas = linspace(5.0, 45.0, 81);
    let betas = linspace(0.5, 8.0, 16);
    for gamma in [0.0, 0.16] {
        let params = ModelParams::example().with_gamma_min(gamma)?;
        let map = region_map(&s, &alphas, &betas, &params, SelectionPolicy::LargestStable, &region_scan())?;
        println!(
            "gamma_min {gamma}: {} triple, {} insolvent, {} solvent",
            map.count(RegionClass::Triple),
            map.count(RegionClass::UniqueInsolvent),
            map.count(RegionClass::UniqueSolvent)
        );
        for row in fold_boundaries(&map)? {
            println!("  beta {:.2}: alpha {:.1} .. {:.1}", row.beta, row.collapse_alpha, row.onset_alpha);
        }
    }
    Ok(())
}
