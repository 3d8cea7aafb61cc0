//! Investor demand (expected CRRA utility), bank demand (expected equity
//! under a quantile insolvency constraint), the capital-requirement cap, and
//! their sum.
//!
//! The investor problem is solved in terms of the share `theta` of current
//! wealth `W = y + c + pi z` held in bonds after the trade. Terminal wealth is
//! then `W (1 + theta (v / pi - 1))`, so the first-order condition
//!
//! ```text
//! h(theta) = ∫ (1 + theta (v/pi - 1))^-lambda (v - pi) f(v) dv = 0
//! ```
//!
//! depends on the price and belief only. `h` is the demand gradient
//! `g'(d)` divided by `W^-lambda`, with `theta = pi (z + d) / W`; the feasible
//! range `-z <= d <= y / (pi (1 - mu))` maps onto `0 <= theta <= 1`.

use std::io::Write;

use serde::Serialize;

use crate::beliefs::Belief;
use crate::error::{ModelError, Result};
use crate::format::real;
use crate::quad::{integrate_loose, integrate_split, QuadOptions};
use crate::state::{BankState, InvestorState, MarketState, ModelParams};

/// Which constraint (if any) determines a demand quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Binding {
    Interior,
    /// Sell everything (`-z` for investors, `-x` for solvent banks above `E V`).
    LowerBound,
    /// Investors spend all their money.
    AffordabilityBound,
    /// Banks spend all their reserves on the currency drain.
    ReserveBound,
    /// Banks sit exactly at their tolerated insolvency probability.
    InsolvencyBound,
    CapitalCap,
    /// Banks insolvent at the quoted price and forced to sell every bond.
    ForcedLiquidation,
}

impl Binding {
    pub fn as_str(&self) -> &'static str {
        match self {
            Binding::Interior => "interior",
            Binding::LowerBound => "lower_bound",
            Binding::AffordabilityBound => "affordability_bound",
            Binding::ReserveBound => "reserve_bound",
            Binding::InsolvencyBound => "insolvency_bound",
            Binding::CapitalCap => "capital_cap",
            Binding::ForcedLiquidation => "forced_liquidation",
        }
    }
}

/// A demanded quantity at a price. Positive quantities are purchases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemandPoint {
    pub price: f64,
    pub quantity: f64,
    pub binding: Binding,
    /// Set when the bank's reserve bound is returned although the insolvency
    /// constraint requires buying even more (an empty feasible set).
    pub anomaly: bool,
}

impl DemandPoint {
    fn new(price: f64, quantity: f64, binding: Binding) -> Self {
        Self {
            price,
            quantity,
            binding,
            anomaly: false,
        }
    }
}

fn investor_quad() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        max_intervals: 600,
    }
}

/// `h(theta)` and `h'(theta)` plus the magnitude `∫|integrand|` used to judge
/// cancellation.
#[derive(Debug, Clone, Copy)]
struct GradientTerms {
    value: f64,
    slope: f64,
    scale: f64,
}

/// Integrates `kernel(v, ln f(v))` against the belief density over
/// `[0, pi]` and `[pi, 1]` separately. Near an endpoint where the density is
/// not smooth (a non-integer shape below 4), the piece is mapped through
/// `v = u^2` (at 0) or `v = 1 - u^2` (at 1). `spike` is the width of a peak
/// at `v = 0`, if any; the lower piece is pre-split geometrically around it.
fn density_integrals<const N: usize, K>(
    belief: &Belief,
    pi: f64,
    spike: Option<f64>,
    slack: [f64; N],
    kernel: K,
) -> Result<([f64; N], [f64; N])>
where
    K: Fn(f64, f64) -> [f64; N],
{
    let (a, b) = (belief.alpha(), belief.beta());
    let ln_norm = crate::special::ln_beta(a, b);
    let mut cuts = vec![0.0];
    if let Some(w) = spike {
        let mut c = 0.25 * w;
        while c < 0.5 * pi {
            cuts.push(c);
            c *= 4.0;
        }
    }
    cuts.push(pi);
    let below = if rough(a) {
        let cuts: Vec<f64> = cuts.iter().map(|c| c.sqrt()).collect();
        integrate_split(
            |u: f64| {
                let lu = u.ln();
                let v = u * u;
                kernel(v, (2.0 * a - 1.0) * lu + std::f64::consts::LN_2 + (b - 1.0) * (-v).ln_1p() - ln_norm)
            },
            &cuts,
            investor_quad(),
            slack,
        )?
    } else {
        integrate_split(
            |v: f64| kernel(v, (a - 1.0) * v.ln() + (b - 1.0) * (-v).ln_1p() - ln_norm),
            &cuts,
            investor_quad(),
            slack,
        )?
    };
    let above = if rough(b) {
        integrate_loose(
            |u: f64| {
                let lu = u.ln();
                let v = 1.0 - u * u;
                kernel(v, (a - 1.0) * v.ln() + (2.0 * b - 1.0) * lu + std::f64::consts::LN_2 - ln_norm)
            },
            0.0,
            (1.0 - pi).sqrt(),
            investor_quad(),
            slack,
        )?
    } else {
        integrate_loose(
            |v: f64| kernel(v, (a - 1.0) * v.ln() + (b - 1.0) * (-v).ln_1p() - ln_norm),
            pi,
            1.0,
            investor_quad(),
            slack,
        )?
    };
    Ok((below, above))
}

fn rough(shape: f64) -> bool {
    shape < 4.0 && shape.fract() != 0.0
}

/// Width of the peak of `(1 + theta (v/pi - 1))^-lambda` at `v = 0`.
fn spike_width(theta: f64, pi: f64) -> Option<f64> {
    (theta > 0.5).then(|| pi * (1.0 - theta) / theta)
}

fn gradient_terms(theta: f64, pi: f64, belief: &Belief, lambda: f64) -> Result<GradientTerms> {
    // 1 - theta is exact for theta >= 1/2, so w keeps its digits near 1
    let rest = 1.0 - theta;
    let (below, above) = density_integrals(belief, pi, spike_width(theta, pi), [1.0, 1e4], |v, ln_f| {
        let w = rest + theta * v / pi;
        let common = (-lambda * w.ln() + ln_f).exp();
        let dv = v - pi;
        [common * dv, -(lambda / pi) * common / w * dv * dv]
    })?;
    Ok(GradientTerms {
        value: below[0] + above[0],
        slope: below[1] + above[1],
        scale: below[0].abs() + above[0].abs(),
    })
}

/// Solves the investor's first-order condition for one belief.
#[derive(Debug, Clone, Copy)]
pub(crate) struct InvestorSolver {
    belief: Belief,
    lambda: f64,
    mean: f64,
    variance: f64,
    threshold: Option<f64>,
}

/// Optimal bond share of wealth.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Share {
    Zero,
    Full,
    Interior(f64),
}

impl InvestorSolver {
    pub(crate) fn new(belief: &Belief, lambda: f64) -> Self {
        let (a, b) = (belief.alpha(), belief.beta());
        Self {
            belief: *belief,
            lambda,
            mean: belief.mean(),
            variance: a * b / ((a + b) * (a + b) * (a + b + 1.0)),
            threshold: belief.affordability_threshold(lambda).ok(),
        }
    }

    /// Optimal share on `[0, 1]` at price `pi`.
    pub(crate) fn share(&self, pi: f64) -> Result<Share> {
        self.share_near(pi, None)
    }

    /// [`Self::share`] with Newton started from `guess` when given.
    pub(crate) fn share_near(&self, pi: f64, guess: Option<f64>) -> Result<Share> {
        if pi >= self.mean {
            return Ok(Share::Zero);
        }
        if let Some(t) = self.threshold {
            if pi <= t {
                return Ok(Share::Full);
            }
        }
        // h(0) = E V - pi > 0, and h(1) < 0 (or diverges to -inf when alpha <= lambda)
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut theta = match guess {
            Some(g) if g > 0.0 && g < 1.0 => g.clamp(1e-6, 0.95),
            _ => (pi * (self.mean - pi) / (self.lambda * self.variance)).clamp(0.05, 0.75),
        };
        let mut last_step = 1.0_f64;
        for _ in 0..200 {
            let t = gradient_terms(theta, pi, &self.belief, self.lambda)?;
            if t.value == 0.0 || t.value.abs() <= 1e-10 * t.scale {
                return Ok(Share::Interior(theta));
            }
            if t.value > 0.0 {
                lo = theta;
            } else {
                hi = theta;
            }
            if hi - lo <= 1e-12 {
                return Ok(Share::Interior(0.5 * (lo + hi)));
            }
            let step = -t.value / t.slope;
            let newton = theta + step;
            let slow = (2.0 * step).abs() > last_step.abs();
            if t.slope < 0.0 && newton > lo && newton < hi && !slow {
                if step.abs() <= 1e-12 {
                    return Ok(Share::Interior(newton));
                }
                theta = newton;
                last_step = step;
            } else {
                let mid = 0.5 * (lo + hi);
                last_step = mid - theta;
                theta = mid;
            }
        }
        Err(ModelError::Numerical(format!(
            "investor first-order condition did not converge at price {pi}"
        )))
    }
}

fn check_price(pi: f64) -> Result<()> {
    if pi > 0.0 && pi <= 1.0 {
        Ok(())
    } else {
        Err(ModelError::Domain(format!("price {pi} outside (0, 1]")))
    }
}

fn wealth(inv: &InvestorState, y: f64, pi: f64) -> Result<f64> {
    let w = y + inv.c + pi * inv.z;
    if w > 0.0 {
        Ok(w)
    } else {
        Err(ModelError::Degenerate(format!("investor wealth {w} is not positive")))
    }
}

fn share_of(d: f64, inv: &InvestorState, y: f64, pi: f64, belief: &Belief, lambda: f64, power: f64) -> Result<(f64, f64)> {
    check_price(pi)?;
    let w = wealth(inv, y, pi)?;
    let theta = pi * (inv.z + d) / w;
    if theta < -1e-12 {
        return Err(ModelError::Domain(format!("investors cannot sell {} bonds holding {}", -d, inv.z)));
    }
    if theta > 1.0 + 1e-12 {
        return Err(ModelError::Domain(format!("purchase of {d} bonds exceeds investor money")));
    }
    if theta >= 1.0 && belief.alpha() + power <= 0.0 {
        return Err(ModelError::Divergence(format!(
            "utility integral diverges at the affordability bound (alpha = {}, lambda = {lambda})",
            belief.alpha()
        )));
    }
    Ok((theta.clamp(0.0, 1.0), w))
}

/// Derivative of the investors' expected utility with respect to a purchase
/// of `d` bonds at price `pi`, for CRRA utility `w^(1-lambda) / (1-lambda)`.
pub fn investor_objective_gradient(
    d: f64,
    inv: &InvestorState,
    y: f64,
    pi: f64,
    belief: &Belief,
    lambda: f64,
) -> Result<f64> {
    let (theta, w) = share_of(d, inv, y, pi, belief, lambda, -lambda)?;
    let t = gradient_terms(theta, pi, belief, lambda)?;
    Ok((-lambda * w.ln()).exp() * t.value)
}

/// The investors' expected utility after buying `d` bonds at price `pi`.
pub fn investor_objective(d: f64, inv: &InvestorState, y: f64, pi: f64, belief: &Belief, lambda: f64) -> Result<f64> {
    let (theta, w) = share_of(d, inv, y, pi, belief, lambda, 1.0 - lambda)?;
    let rest = 1.0 - theta;
    let (below, above) = density_integrals(belief, pi, spike_width(theta, pi), [1.0], |v, ln_f| {
        let wv = rest + theta * v / pi;
        [((1.0 - lambda) * wv.ln() + ln_f).exp()]
    })?;
    let (below, above) = (below[0], above[0]);
    Ok(((1.0 - lambda) * w.ln()).exp() / (1.0 - lambda) * (below + above))
}

fn investor_demand_with(
    solver: &InvestorSolver,
    inv: &InvestorState,
    y: f64,
    mu: f64,
    pi: f64,
) -> Result<DemandPoint> {
    investor_point(inv, y, mu, pi, solver.share(pi)?)
}

fn investor_point(inv: &InvestorState, y: f64, mu: f64, pi: f64, share: Share) -> Result<DemandPoint> {
    check_price(pi)?;
    let upper = y / (pi * (1.0 - mu));
    Ok(match share {
        Share::Zero => DemandPoint::new(pi, -inv.z, Binding::LowerBound),
        Share::Full => DemandPoint::new(pi, upper, Binding::AffordabilityBound),
        Share::Interior(theta) => {
            let w = wealth(inv, y, pi)?;
            let d = (theta * w / pi - inv.z).clamp(-inv.z, upper);
            DemandPoint::new(pi, d, Binding::Interior)
        }
    })
}

/// Expected-utility-maximizing purchase by investors at price `pi`,
/// constrained to `-z <= d <= y / (pi (1 - mu))`.
pub fn investor_demand(
    inv: &InvestorState,
    y: f64,
    belief: &Belief,
    params: &ModelParams,
    pi: f64,
) -> Result<DemandPoint> {
    let solver = InvestorSolver::new(belief, params.lambda);
    investor_demand_with(&solver, inv, y, params.mu, pi)
}

fn bank_demand_with(bank: &BankState, quantile: f64, mean: f64, mu: f64, pi: f64) -> Result<DemandPoint> {
    check_price(pi)?;
    if bank.equity(pi) < 0.0 {
        return Ok(DemandPoint::new(pi, -bank.x, Binding::ForcedLiquidation));
    }
    if pi > mean {
        return Ok(DemandPoint::new(pi, -bank.x, Binding::LowerBound));
    }
    let reserve_cap = if mu > 0.0 { bank.r / (mu * pi) } else { f64::INFINITY };
    let slack = quantile * bank.x + bank.r - bank.y;
    let unbounded = || {
        ModelError::Unbounded(format!(
            "reserve bound is infinite with mu = 0 at price {pi} (quantile {quantile})"
        ))
    };
    if pi <= quantile {
        // pi == quantile: the insolvency constraint no longer depends on d
        if reserve_cap.is_infinite() {
            return Err(unbounded());
        }
        let mut point = DemandPoint::new(pi, reserve_cap, Binding::ReserveBound);
        if pi < quantile {
            let floor = slack / (pi - quantile);
            point.anomaly = floor > reserve_cap;
        }
        return Ok(point);
    }
    let target = slack / (pi - quantile);
    Ok(if target <= reserve_cap {
        DemandPoint::new(pi, target, Binding::InsolvencyBound)
    } else {
        DemandPoint::new(pi, reserve_cap, Binding::ReserveBound)
    })
}

/// Bank demand: maximize expected equity subject to selling at most `x`,
/// nonnegative reserves and insolvency probability at most `eps`.
pub fn bank_demand(bank: &BankState, belief: &Belief, params: &ModelParams, pi: f64) -> Result<DemandPoint> {
    let v = belief.quantile(params.eps)?;
    bank_demand_with(bank, v, belief.mean(), params.mu, pi)
}

/// Largest purchase compatible with a minimum capital-to-assets ratio,
/// `max(-x, -x + (pi x + r - y) / (pi gamma_min))`. Infinite when
/// `gamma_min == 0`.
pub fn capital_cap(bank: &BankState, pi: f64, gamma_min: f64) -> f64 {
    if gamma_min <= 0.0 {
        return f64::INFINITY;
    }
    (-bank.x + bank.equity(pi) / (pi * gamma_min)).max(-bank.x)
}

fn apply_cap(point: DemandPoint, bank: &BankState, gamma_min: f64) -> DemandPoint {
    let cap = capital_cap(bank, point.price, gamma_min);
    if cap < point.quantity {
        DemandPoint {
            quantity: cap,
            binding: Binding::CapitalCap,
            ..point
        }
    } else {
        point
    }
}

/// [`bank_demand`] limited by [`capital_cap`].
pub fn bank_demand_capped(bank: &BankState, belief: &Belief, params: &ModelParams, pi: f64) -> Result<DemandPoint> {
    Ok(apply_cap(bank_demand(bank, belief, params, pi)?, bank, params.gamma_min))
}

/// Both demands and their sum at one price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemandBreakdown {
    pub price: f64,
    pub bank: DemandPoint,
    pub investor: DemandPoint,
    pub total: f64,
}

/// Total demand of a fixed pair of balance sheets under one belief, with
/// the belief-dependent constants computed once.
#[derive(Debug, Clone, Copy)]
pub struct TotalDemand {
    bank: BankState,
    investor: InvestorState,
    params: ModelParams,
    quantile: f64,
    mean: f64,
    solver: InvestorSolver,
}

impl TotalDemand {
    pub fn new(state: &MarketState, belief: &Belief, params: &ModelParams) -> Result<Self> {
        Ok(Self {
            bank: state.bank,
            investor: state.investor,
            params: *params,
            quantile: belief.quantile(params.eps)?,
            mean: belief.mean(),
            solver: InvestorSolver::new(belief, params.lambda),
        })
    }

    pub fn bank_state(&self) -> &BankState {
        &self.bank
    }

    /// `eps`-quantile of the belief.
    pub fn quantile(&self) -> f64 {
        self.quantile
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn bank(&self, pi: f64) -> Result<DemandPoint> {
        let raw = bank_demand_with(&self.bank, self.quantile, self.mean, self.params.mu, pi)?;
        Ok(apply_cap(raw, &self.bank, self.params.gamma_min))
    }

    /// Bounds on capped bank demand over the open interval `(a, b)`, which
    /// must not contain the insolvency price, the quantile or the mean.
    /// Every branch of bank demand and the cap are monotone between those
    /// prices, so their extremes sit at the ends.
    pub fn bank_bounds(&self, a: f64, b: f64) -> (f64, f64) {
        let bank = &self.bank;
        let m = 0.5 * (a + b);
        let reserve = |p: f64| {
            if self.params.mu > 0.0 {
                bank.r / (self.params.mu * p)
            } else {
                f64::INFINITY
            }
        };
        let (lo, hi) = if bank.equity(m) < 0.0 || m > self.mean {
            (-bank.x, -bank.x)
        } else if m < self.quantile {
            (reserve(b), reserve(a))
        } else {
            let slack = self.quantile * bank.x + bank.r - bank.y;
            let (ia, ib) = (slack / (a - self.quantile), slack / (b - self.quantile));
            (ia.min(ib).min(reserve(b)), ia.max(ib).min(reserve(a)))
        };
        let g = self.params.gamma_min;
        let (ca, cb) = (capital_cap(bank, a, g), capital_cap(bank, b, g));
        (lo.min(ca).min(cb), hi.min(ca.max(cb)))
    }

    pub fn investor(&self, pi: f64) -> Result<DemandPoint> {
        investor_demand_with(&self.solver, &self.investor, self.bank.y, self.params.mu, pi)
    }

    /// Investor demand with the solver started from a nearby optimal share
    /// `guess`; also returns the share when it is interior.
    pub fn investor_near(&self, pi: f64, guess: Option<f64>) -> Result<(DemandPoint, Option<f64>)> {
        check_price(pi)?;
        let share = self.solver.share_near(pi, guess)?;
        let theta = match share {
            Share::Interior(t) => Some(t),
            _ => None,
        };
        Ok((investor_point(&self.investor, self.bank.y, self.params.mu, pi, share)?, theta))
    }

    pub fn at(&self, pi: f64) -> Result<DemandBreakdown> {
        let bank = self.bank(pi)?;
        let investor = self.investor(pi)?;
        Ok(DemandBreakdown {
            price: pi,
            bank,
            investor,
            total: bank.quantity + investor.quantity,
        })
    }

    pub fn total(&self, pi: f64) -> Result<f64> {
        Ok(self.at(pi)?.total)
    }
}

/// Capped bank demand plus investor demand at `pi`, using the balance
/// sheets of `s` and the (possibly shocked) `belief`.
pub fn total_demand(s: &MarketState, belief: &Belief, params: &ModelParams, pi: f64) -> Result<f64> {
    TotalDemand::new(s, belief, params)?.total(pi)
}

/// Evaluates the demand breakdown on a list of prices.
pub fn demand_curve(s: &MarketState, belief: &Belief, params: &ModelParams, prices: &[f64]) -> Result<Vec<DemandBreakdown>> {
    use rayon::prelude::*;
    let td = TotalDemand::new(s, belief, params)?;
    prices.par_iter().map(|&p| td.at(p)).collect()
}

/// Writes `price,bank_demand,investor_demand,total_demand,bank_binding`.
pub fn write_demand_csv<W: Write>(mut out: W, curve: &[DemandBreakdown]) -> std::io::Result<()> {
    writeln!(out, "price,bank_demand,investor_demand,total_demand,bank_binding")?;
    for p in curve {
        writeln!(
            out,
            "{},{},{},{},{}",
            real(p.price),
            real(p.bank.quantity),
            real(p.investor.quantity),
            real(p.total),
            p.bank.binding.as_str()
        )?;
    }
    Ok(())
}
