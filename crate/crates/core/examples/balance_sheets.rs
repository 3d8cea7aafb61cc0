//! Calibrating a consistent state, checking it, and executing a trade.

use inside_money::state::{calibrate, example_balance_sheet, verify_consistency};
use inside_money::{Belief, ModelParams};

fn main() -> inside_money::Result<()> {
    let params = ModelParams::example();
    let belief = Belief::new(20.0, 2.0)?;
    let s = calibrate(belief, &params, 1050.0, 222.0, 439.0)?;
    print!("{}", s.to_document());

    let pi = s.price;
    println!("equity          {:.4}", s.bank.equity(pi));
    println!("insolvency at   {:.6}", s.bank.insolvency_price()?);
    println!("leverage        {:.4}", s.bank.leverage(pi)?);
    println!("capital ratio   {:.4}", s.bank.capital_ratio(pi)?);
    println!("consistent      {:?}", verify_consistency(&s, &params, 5.0)?);

    // the rounded table is only approximately consistent
    let table = example_balance_sheet();
    println!("table sheet     {:?}", verify_consistency(&table, &params, 5.0)?);

    let after = s.apply_trade(100.0, pi, params.mu)?;
    println!(
        "after buying 100 bonds: x {:.2} r {:.4} y {:.4} z {:.2} c {:.4}",
        after.bank.x, after.bank.r, after.bank.y, after.investor.z, after.investor.c
    );
    Ok(())
}
