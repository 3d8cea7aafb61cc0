//! Independent reference computations: fixed Gauss-Legendre rules for the
//! quadrature, and direct search for both demand functions.

use inside_money::demand::{bank_demand, investor_demand, investor_objective, Binding};
use inside_money::quad::{integrate_scalar, QuadOptions};
use inside_money::state::example_state;
use inside_money::{Belief, ModelParams};
use proptest::prelude::*;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    (p0, p1) = (p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k);
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite rule on `[lo, hi]` over panels graded geometrically toward
/// both ends.
fn graded(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let rule = gauss_legendre(32);
    let half = 0.5 * (hi - lo);
    let mut offsets: Vec<f64> = (1..=80).rev().map(|k| half * 0.75_f64.powi(k)).collect();
    offsets.insert(0, 0.0);
    let mut breaks: Vec<f64> = offsets.iter().map(|o| lo + o).collect();
    breaks.extend(offsets.iter().rev().map(|o| hi - o));
    breaks
        .windows(2)
        .map(|w| {
            let (mid, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            rule.iter().map(|&(x, wt)| wt * f(mid + h * x)).sum::<f64>() * h
        })
        .sum()
}

/// Reference integral over [0, 1]. The lower half goes through `v = t^20`,
/// which makes powers `v^s` with `s > -0.95` smooth at zero.
fn composite(f: impl Fn(f64) -> f64) -> f64 {
    let m = 20.0;
    let lower = graded(|t: f64| f(t.powf(m)) * m * t.powf(m - 1.0), 0.0, 0.5_f64.powf(1.0 / m));
    lower + graded(&f, 0.5, 1.0)
}

#[test]
fn legendre_rule_is_exact_for_polynomials() {
    let rule = gauss_legendre(32);
    let total: f64 = rule.iter().map(|p| p.1).sum();
    assert!((total - 2.0).abs() < 1e-14);
    let x62: f64 = rule.iter().map(|&(x, w)| w * x.powi(62)).sum();
    assert!((x62 - 2.0 / 63.0).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        rng_seed: proptest::test_runner::RngSeed::Fixed(7),
        ..ProptestConfig::default()
    })]

    #[test]
    fn adaptive_quadrature_matches_fixed_rule(a in 1.0..40.0_f64, b in 1.0..8.0_f64, p in -0.9..3.0_f64) {
        let belief = Belief::new(a, b).unwrap();
        let f = |v: f64| v.powf(p) * belief.pdf(v).unwrap();
        let adaptive = integrate_scalar(f, 0.0, 1.0, QuadOptions::default()).unwrap();
        let fixed = composite(f);
        let exact = belief.power_moment(p).unwrap();
        prop_assert!((adaptive - exact).abs() <= 1e-8 * exact, "adaptive {} exact {}", adaptive, exact);
        prop_assert!((adaptive - fixed).abs() <= 1e-8 * exact, "adaptive {} fixed {}", adaptive, fixed);
    }

    #[test]
    fn investor_demand_maximizes_expected_utility(
        a in 16.0..45.0_f64,
        b in 0.5..6.0_f64,
        lambda in 2.0..15.0_f64,
        u in 0.05..0.95_f64,
    ) {
        let s = example_state();
        let belief = Belief::new(a, b).unwrap();
        let params = ModelParams::new(0.01, 0.1, lambda, 0.0).unwrap();
        let pi = belief.quantile(0.001).unwrap() + u * (belief.mean() - belief.quantile(0.001).unwrap());
        let upper = s.bank.y / (pi * (1.0 - params.mu));
        let lo = -s.investor.z;
        let hi = upper.min((s.investor.c + s.bank.y) / pi) * (1.0 - 1e-9);
        let objective = |d: f64| investor_objective(d, &s.investor, s.bank.y, pi, &belief, lambda).unwrap();

        // golden-section search on the concave objective
        let g = 0.5 * (5.0_f64.sqrt() - 1.0);
        let (mut l, mut h) = (lo, hi);
        while h - l > 1e-7 * (hi - lo) {
            let (m1, m2) = (h - g * (h - l), l + g * (h - l));
            if objective(m1) < objective(m2) { l = m1 } else { h = m2 }
        }
        let brute = 0.5 * (l + h);
        let model = investor_demand(&s.investor, s.bank.y, &belief, &params, pi).unwrap().quantity;
        prop_assert!((model - brute).abs() <= 1e-4 * (hi - lo), "model {} brute force {} at price {}", model, brute, pi);
        let (fm, fb) = (objective(model.min(hi)), objective(brute));
        prop_assert!(fm >= fb - 1e-9 * fb.abs(), "objective {} below {}", fm, fb);
    }

    #[test]
    fn bank_demand_is_the_largest_safe_purchase(
        a in 4.0..45.0_f64,
        b in 0.5..8.0_f64,
        eps in 0.002..0.05_f64,
        mu in 0.02..0.3_f64,
        u in 0.0..1.0_f64,
    ) {
        let s = example_state();
        let belief = Belief::new(a, b).unwrap();
        let params = ModelParams::new(eps, mu, 15.0, 0.0).unwrap();
        let bank = s.bank;
        let q = belief.quantile(eps).unwrap();
        let lo_price = (bank.y - bank.r) / bank.x;
        let pi = lo_price + 1e-6 + u * (belief.mean() - lo_price - 2e-6);
        prop_assume!(pi > q + 1e-6 && pi < belief.mean());

        // feasibility straight from the distribution: reserves stay nonnegative
        // and the bank fails with probability at most eps
        let feasible = |d: f64| {
            let reserves_ok = bank.r - mu * pi * d >= 0.0;
            let breakeven = ((bank.y - bank.r + pi * d) / (bank.x + d)).clamp(0.0, 1.0);
            reserves_ok && belief.cdf(breakeven).unwrap() <= eps * (1.0 + 1e-9)
        };
        let model = bank_demand(&bank, &belief, &params, pi).unwrap();

        // the breakeven payoff rises with d while equity is positive, so the
        // safe set is an interval starting at -x
        let top = bank.r / (mu * pi);
        let brute = if feasible(top) {
            top
        } else {
            let (mut safe, mut unsafe_) = (-bank.x * (1.0 - 1e-12), top);
            prop_assert!(feasible(safe));
            while unsafe_ - safe > 1e-12 * (top + bank.x) {
                let mid = 0.5 * (safe + unsafe_);
                if feasible(mid) { safe = mid } else { unsafe_ = mid }
            }
            safe
        };
        prop_assert!(model.binding == Binding::InsolvencyBound || model.binding == Binding::ReserveBound);
        prop_assert!((model.quantity - brute).abs() <= 1e-6 * (top + bank.x),
            "model {} direct search {}", model.quantity, brute);
    }
}
