//! Beta beliefs: moments, the insolvency quantile, the investors'
//! affordability threshold and the direction of a shock.

use inside_money::{classify_shock, Belief};

fn main() -> inside_money::Result<()> {
    let prior = Belief::new(20.0, 2.0)?;
    println!("mean            {:.6}", prior.mean());
    println!("1% quantile     {:.6}", prior.quantile(0.01)?);
    println!("E[V^-15]        {:.6e}", prior.power_moment(-15.0)?);
    println!("threshold(15)   {:.6}", prior.affordability_threshold(15.0)?);

    for (a, b) in [(16.0, 2.0), (32.0, 2.0), (20.0, 2.0), (22.0, 3.0)] {
        let next = Belief::new(a, b)?;
        println!("Beta({a}, {b}): {:?}", classify_shock(&prior, &next, 0.01)?);
    }
    Ok(())
}
