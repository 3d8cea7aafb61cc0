//! Property checks shared by the `properties` and `acceptance` targets. Each
//! runs a fixed number of cases from a deterministic generator and returns
//! the first counterexample as an error message.

#![allow(dead_code)]

use inside_money::demand::{bank_demand, investor_demand, investor_objective, investor_objective_gradient, Binding};
use inside_money::state::calibrate;
use inside_money::{classify_shock, Belief, BankState, InvestorState, MarketState, ModelParams, ShockClass};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config {
        cases,
        max_global_rejects: 100 * cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

/// A calibrated state under random totals, belief and parameters.
pub fn calibrated() -> impl Strategy<Value = (MarketState, ModelParams)> {
    (
        4.0..40.0_f64,
        0.5..8.0_f64,
        200.0..3000.0_f64,
        50.0..1000.0_f64,
        0.1..0.9_f64,
        (0.005..0.05_f64, 0.02..0.3_f64, 2.0..20.0_f64),
    )
        .prop_filter_map("calibration has a solution", |(a, b, bonds, hpm, share, (eps, mu, lambda))| {
            let params = ModelParams::new(eps, mu, lambda, 0.0).ok()?;
            let s = calibrate(Belief::new(a, b).ok()?, &params, bonds, hpm, share * bonds).ok()?;
            Some((s, params))
        })
}

/// Trades conserve bonds and high-powered money, keep the currency share
/// and change money by the cash paid.
pub fn trade_accounting(cases: u32) -> Result<(), String> {
    let strategy = (
        (1.0..1000.0_f64, 1.0..1000.0_f64, 1.0..1000.0_f64, 1.0..1000.0_f64),
        0.01..0.5_f64,
        0.01..1.0_f64,
        0.0..=1.0_f64,
    );
    run(cases, strategy, |((x, r, y, z), mu, pi, u)| {
        let s = MarketState {
            bank: BankState { x, r, y },
            investor: InvestorState { z, c: mu / (1.0 - mu) * y },
            price: pi,
            belief: Belief::new(20.0, 2.0).unwrap(),
        };
        let c = s.investor.c;
        let lo = (-x).max(-y / ((1.0 - mu) * pi)).max(-c / (mu * pi));
        let hi = z.min(r / (mu * pi));
        let d = lo + u * (hi - lo);
        let t = s.apply_trade(d, pi, mu).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let bonds = rel(t.total_bonds(), s.total_bonds(), s.total_bonds());
        prop_assert!(bonds <= 1e-12, "bonds drift {bonds}");
        let hpm = rel(t.high_powered_money(), s.high_powered_money(), s.high_powered_money());
        prop_assert!(hpm <= 1e-12, "high-powered money drift {hpm}");
        let share = (t.investor.c / t.money_supply() - mu).abs();
        prop_assert!(share <= 1e-12, "currency share off by {share}");
        let money = rel(t.money_supply() - s.money_supply(), pi * d, s.money_supply() + (pi * d).abs());
        prop_assert!(money <= 1e-12, "money change off by {money}");
        Ok(())
    })
}

/// Investor demand never rises with the price when `alpha > lambda`.
pub fn investor_monotone(cases: u32) -> Result<(), String> {
    let strategy = (
        1.5..20.0_f64,
        0.01..40.0_f64,
        0.5..10.0_f64,
        0.01..0.5_f64,
        (10.0..2000.0_f64, 10.0..2000.0_f64),
    );
    run(cases, strategy, |(lambda, excess, beta, mu, (z, y))| {
        let belief = Belief::new(lambda + excess, beta).unwrap();
        let params = ModelParams::new(0.01, mu, lambda, 0.0).unwrap();
        let inv = InvestorState { z, c: mu / (1.0 - mu) * y };
        let mut last = f64::INFINITY;
        for i in 0..500 {
            let pi = 0.002 + 0.998 * i as f64 / 499.0;
            let d = investor_demand(&inv, y, &belief, &params, pi)
                .map_err(|e| TestCaseError::fail(format!("pi {pi}: {e}")))?
                .quantity;
            prop_assert!(d <= last, "demand rises at pi {}: {} -> {}", pi, last, d);
            last = d;
        }
        Ok(())
    })
}

/// After a negative shock, bank demand strictly rises between the
/// insolvency price and the new mean.
pub fn bank_increasing(cases: u32) -> Result<(), String> {
    let strategy = (calibrated(), 0.3..1.0_f64, 0.5..3.0_f64);
    run(cases, strategy, |((s, params), da, db)| {
        let shocked = Belief::new(s.belief.alpha() * da, s.belief.beta() * db).unwrap();
        prop_assume!(classify_shock(&s.belief, &shocked, params.eps).unwrap() == ShockClass::Negative);
        let k = s.bank.insolvency_price().unwrap();
        let ev = shocked.mean();
        prop_assume!(ev - k > 1e-3);
        let mut last = f64::NEG_INFINITY;
        for i in 1..200 {
            let pi = k + (ev - k) * i as f64 / 200.0;
            let d = bank_demand(&s.bank, &shocked, &params, pi).unwrap().quantity;
            prop_assert!(d > last, "bank demand not increasing at {}: {} -> {}", pi, last, d);
            last = d;
        }
        Ok(())
    })
}

/// The quadrature gradient of expected utility agrees with a central
/// difference of the expected utility itself.
pub fn gradient_matches_difference(cases: u32) -> Result<(), String> {
    let strategy = (
        (2.0..40.0_f64, 0.5..8.0_f64, 2.0..20.0_f64),
        0.3..0.95_f64,
        0.05..0.9_f64,
        (10.0..2000.0_f64, 10.0..2000.0_f64, 1.0..200.0_f64),
    );
    run(cases, strategy, |((a, b, lambda), pi, theta, (z, y, c))| {
        let belief = Belief::new(a, b).unwrap();
        let inv = InvestorState { z, c };
        let w = y + c + pi * z;
        let d = theta * w / pi - z;
        let h = 1e-5 * w / pi;
        let q = investor_objective_gradient(d, &inv, y, pi, &belief, lambda).unwrap();
        let up = investor_objective(d + h, &inv, y, pi, &belief, lambda).unwrap();
        let down = investor_objective(d - h, &inv, y, pi, &belief, lambda).unwrap();
        let fd = (up - down) / (2.0 * h);
        let err = rel(q, fd, q.abs().max(fd.abs()));
        prop_assert!(err <= 1e-5, "gradient {} vs difference {} (rel {})", q, fd, err);
        Ok(())
    })
}

/// Where the insolvency bound binds, the post-trade bank has exactly zero
/// equity at the quantile price.
pub fn insolvency_bound_equality(cases: u32) -> Result<(), String> {
    let strategy = (calibrated(), 0.3..1.5_f64, 0.5..3.0_f64);
    run(cases, strategy, |((s, params), da, db)| {
        let shocked = Belief::new(s.belief.alpha() * da, s.belief.beta() * db).unwrap();
        let v = shocked.quantile(params.eps).unwrap();
        let ev = shocked.mean();
        let mut hits = 0;
        for i in 1..100 {
            let pi = v + (ev - v) * i as f64 / 100.0;
            let p = bank_demand(&s.bank, &shocked, &params, pi).unwrap();
            if p.binding != Binding::InsolvencyBound {
                continue;
            }
            hits += 1;
            let (b, d, mu) = (s.bank, p.quantity, params.mu);
            let x = b.x + d;
            let r = b.r - mu * pi * d;
            let y = b.y + (1.0 - mu) * pi * d;
            let gap = rel(v * x + r, y, v * x.abs() + r.abs() + y.abs());
            prop_assert!(gap <= 1e-9, "equity at the quantile {} (rel) at pi {}", gap, pi);
        }
        prop_assume!(hits > 0);
        Ok(())
    })
}
