//! The same final belief reached by different paths: a large optimistic
//! detour ends in a banking crisis, a smaller one does not.

use inside_money::equilibrium::{run_trajectory, ScanSettings, SelectionPolicy};
use inside_money::state::example_state;
use inside_money::{Belief, ModelParams};

fn main() -> inside_money::Result<()> {
    let s = example_state();
    let params = ModelParams::example();
    for peak in [26.0, 32.0] {
        let path = [Belief::new(peak, 2.0)?, Belief::new(20.0, 2.0)?];
        let steps = run_trajectory(&s, &path, &params, SelectionPolicy::LargestStable, &ScanSettings::default())?;
        println!("via Beta({peak}, 2):");
        for st in &steps {
            println!(
                "  alpha {:>4} price {:.6} bank buys {:>9.3} crisis {}",
                st.belief_after.alpha(),
                st.selected.price,
                st.trade_quantity,
                st.crisis
            );
        }
    }
    Ok(())
}
