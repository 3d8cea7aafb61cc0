//! Market clearing: all roots of total demand on a price range, their
//! stability and solvency, selection among multiple equilibria, and the
//! shock-to-trade transition.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beliefs::Belief;
use crate::demand::TotalDemand;
use crate::error::{ModelError, Result};
use crate::state::{BankState, LeverageBasis, MarketState, ModelParams};

/// Bisection target for roots.
pub const PRICE_TOL: f64 = 1e-10;
/// Largest `|total demand|` accepted at a root; larger residuals after full
/// bisection mark a jump discontinuity instead.
pub const ROOT_RESIDUAL: f64 = 1e-6;
/// Grid prices per warm-started run.
const SAMPLE_CHUNK: usize = 32;
/// Spacing of the initial samples, in scan steps.
pub const COARSE_STRIDE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub price: f64,
    pub stability: Stability,
    pub solvent: bool,
    /// `|total demand|` at `price`; zero when `bank_absorbs`.
    pub residual: f64,
    /// Bank demand is an interval at this price and the banks take the
    /// other side of the investors' trade. See [`find_equilibria`].
    pub bank_absorbs: bool,
}

impl Equilibrium {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }
}

/// Price grid used to bracket roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSettings {
    pub grid_points: usize,
    pub price_lo: f64,
    pub price_hi: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            grid_points: 4000,
            price_lo: 0.01,
            price_hi: 1.0,
        }
    }
}

impl ScanSettings {
    pub fn with_points(grid_points: usize) -> Self {
        Self {
            grid_points,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 100 {
            return Err(ModelError::Domain(format!(
                "scan needs at least 100 grid points, got {}",
                self.grid_points
            )));
        }
        if !(self.price_lo > 0.0 && self.price_lo < self.price_hi && self.price_hi <= 1.0) {
            return Err(ModelError::Domain(format!(
                "scan range [{}, {}] must satisfy 0 < lo < hi <= 1",
                self.price_lo, self.price_hi
            )));
        }
        Ok(())
    }

    /// Grid spacing.
    pub fn step(&self) -> f64 {
        (self.price_hi - self.price_lo) / (self.grid_points - 1) as f64
    }
}

/// Roots of total demand in ascending price order, plus scan diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSet {
    pub equilibria: Vec<Equilibrium>,
    pub price_lo: f64,
    pub price_hi: f64,
    /// Sign changes seen on the grid (roots and jumps).
    pub sign_changes: usize,
    /// Prices at which total demand changes sign by jumping.
    pub jumps: Vec<f64>,
    /// Exactly two roots: a fold tangency within tolerance.
    pub degenerate: bool,
}

impl EquilibriumSet {
    pub fn len(&self) -> usize {
        self.equilibria.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equilibria.is_empty()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.equilibria.iter().map(|e| e.price).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    #[default]
    LargestStable,
    NearestToPrevious,
    SmallestStable,
}

impl std::str::FromStr for SelectionPolicy {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "largest" | "largest_stable" => Ok(Self::LargestStable),
            "nearest" | "nearest_to_previous" => Ok(Self::NearestToPrevious),
            "smallest" | "smallest_stable" => Ok(Self::SmallestStable),
            other => Err(ModelError::Domain(format!("unknown selection policy {other:?}"))),
        }
    }
}

/// Total demand at one price, with the investor part kept for interval
/// bounds. An unbounded bank demand counts as `+inf`.
#[derive(Debug, Clone, Copy)]
struct Sample {
    p: f64,
    total: f64,
    investor: f64,
    theta: Option<f64>,
}

fn sample(td: &TotalDemand, p: f64, guess: Option<f64>) -> Result<Sample> {
    let (point, theta) = td.investor_near(p, guess)?;
    let investor = point.quantity;
    let total = match td.bank(p) {
        Ok(b) => b.quantity + investor,
        Err(ModelError::Unbounded(_)) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    Ok(Sample { p, total, investor, theta })
}

/// Share guess at `p` from bracketing samples.
fn guess(a: &Sample, b: &Sample, p: f64) -> Option<f64> {
    match (a.theta, b.theta) {
        (Some(ta), Some(tb)) if b.p != a.p => Some(ta + (tb - ta) * (p - a.p) / (b.p - a.p)),
        (Some(t), _) | (_, Some(t)) => Some(t),
        _ => None,
    }
}

/// Samples `prices` in order, starting each solve from the previous shares.
fn sample_run(td: &TotalDemand, prices: &[f64]) -> Result<Vec<Sample>> {
    let mut out: Vec<Sample> = Vec::with_capacity(prices.len());
    for &p in prices {
        let g = match out.as_slice() {
            [.., a, b] => guess(a, b, p),
            [a] => a.theta,
            [] => None,
        };
        out.push(sample(td, p, g)?);
    }
    Ok(out)
}

fn positive(x: f64) -> bool {
    x > 0.0
}

/// Stability of a root whose left neighbourhood has sign `left`.
fn stability(left: f64) -> Stability {
    if positive(left) {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

fn is_solvent(bank: &BankState, pi: f64) -> bool {
    match bank.insolvency_price() {
        Ok(k) => pi >= k,
        Err(_) => bank.equity(pi) >= 0.0,
    }
}

/// Prices where total demand is kinked or discontinuous.
fn breakpoints(td: &TotalDemand, params: &ModelParams, belief: &Belief) -> Vec<f64> {
    let mut pts = vec![td.mean(), td.quantile()];
    if let Ok(k) = td.bank_state().insolvency_price() {
        pts.push(k);
    }
    if let Ok(t) = belief.affordability_threshold(params.lambda) {
        pts.push(t);
    }
    pts
}

/// Bisects a sign change down to adjacent floats unless the residual drops
/// below [`ROOT_RESIDUAL`] once the bracket is within [`PRICE_TOL`].
fn bisect(td: &TotalDemand, a: Sample, b: Sample) -> Result<Option<(f64, f64)>> {
    let (mut a, mut b) = (a, b);
    let mut best = if a.total.abs() <= b.total.abs() { a } else { b };
    loop {
        let m = 0.5 * (a.p + b.p);
        if m <= a.p || m >= b.p {
            break;
        }
        let fm = sample(td, m, guess(&a, &b, m))?;
        if fm.total.abs() < best.total.abs() {
            best = fm;
        }
        if fm.total == 0.0 {
            break;
        }
        if positive(fm.total) == positive(a.total) {
            a = fm;
        } else {
            b = fm;
        }
        if b.p - a.p <= PRICE_TOL && best.total.abs() <= ROOT_RESIDUAL {
            break;
        }
    }
    let r = best.total.abs();
    Ok((r <= ROOT_RESIDUAL).then_some((best.p, r)))
}

/// Brent's method on a sign change between `a` and `b`, falling back to
/// [`bisect`] when the residual stays large. `None` marks a jump.
fn refine_root(td: &TotalDemand, a: Sample, b: Sample) -> Result<Option<(f64, f64)>> {
    for e in [a, b] {
        if e.total == 0.0 {
            return Ok(Some((e.p, 0.0)));
        }
    }
    if !(a.total.is_finite() && b.total.is_finite()) {
        return bisect(td, a, b);
    }
    let (mut xa, mut xb, mut xc) = (a.p, b.p, b.p);
    let (mut fa, mut fb, mut fc) = (a.total, b.total, b.total);
    let (mut sa, mut sb, mut sc) = (a, b, b);
    let mut d = xb - xa;
    let mut e = d;
    for _ in 0..100 {
        if positive(fb) == positive(fc) {
            xc = xa;
            fc = fa;
            sc = sa;
            d = xb - xa;
            e = d;
        }
        if fc.abs() < fb.abs() {
            (xa, fa, sa) = (xb, fb, sb);
            (xb, fb, sb) = (xc, fc, sc);
            (xc, fc, sc) = (xa, fa, sa);
        }
        let tol = 2.0 * f64::EPSILON * xb.abs() + 0.25 * PRICE_TOL;
        let xm = 0.5 * (xc - xb);
        if xm.abs() <= tol || fb == 0.0 {
            break;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if xa == xc {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (xb - xa) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        (xa, fa, sa) = (xb, fb, sb);
        xb += if d.abs() > tol { d } else { tol.copysign(xm) };
        sb = sample(td, xb, guess(&sb, &sc, xb))?;
        fb = sb.total;
    }
    if fb.abs() <= ROOT_RESIDUAL {
        return Ok(Some((xb, fb.abs())));
    }
    let (lo, hi) = if sb.p < sc.p { (sb, sc) } else { (sc, sb) };
    bisect(td, lo, hi)
}

/// Whether the bounds of total demand on `(a, b)` allow a zero: investor
/// demand is non-increasing and bank demand is bounded by [`TotalDemand::bank_bounds`].
fn may_cross(td: &TotalDemand, a: &Sample, b: &Sample) -> bool {
    if !(a.total.is_finite() && b.total.is_finite()) {
        return false;
    }
    let (lo, hi) = td.bank_bounds(a.p, b.p);
    lo + b.investor <= 0.0 && hi + a.investor >= 0.0
}

type Root = (f64, f64, Stability);

/// Looks for a pair of roots strictly inside an interval whose ends have
/// the same sign, subdividing while the bounds allow a crossing.
fn hidden_pair(td: &TotalDemand, a: Sample, b: Sample, budget: &mut usize, out: &mut Vec<Root>) -> Result<()> {
    if !may_cross(td, &a, &b) {
        return Ok(());
    }
    if b.p - a.p <= PRICE_TOL || *budget == 0 {
        // tangency within tolerance
        let best = if a.total.abs() <= b.total.abs() { a } else { b };
        if best.total.abs() <= ROOT_RESIDUAL {
            out.push((best.p, best.total.abs(), stability(a.total)));
        }
        return Ok(());
    }
    *budget -= 1;
    let mid = 0.5 * (a.p + b.p);
    let m = sample(td, mid, guess(&a, &b, mid))?;
    if positive(m.total) != positive(a.total) {
        if let Some((p, r)) = refine_root(td, a, m)? {
            out.push((p, r, stability(a.total)));
        }
        if let Some((p, r)) = refine_root(td, m, b)? {
            out.push((p, r, stability(m.total)));
        }
        return Ok(());
    }
    hidden_pair(td, a, m, budget, out)?;
    hidden_pair(td, m, b, budget, out)
}

/// What the search of one stretch of prices found.
#[derive(Default)]
struct Found {
    roots: Vec<Root>,
    /// Jumps through zero where bank demand is an interval.
    absorbed: Vec<(f64, Stability)>,
    jumps: Vec<f64>,
    sign_changes: usize,
}

struct Search<'a> {
    td: &'a TotalDemand,
    kink: Option<f64>,
    /// Scan step; intervals this narrow are leaves.
    leaf: f64,
}

impl Search<'_> {
    /// Splits `(a, b)` until leaves or until the bounds rule out a root.
    fn run(&self, a: Sample, b: Sample, budget: &mut usize, out: &mut Found) -> Result<()> {
        let crosses = positive(a.total) != positive(b.total);
        if b.p - a.p <= self.leaf {
            return self.leaf_interval(a, b, crosses, budget, out);
        }
        if !crosses && !may_cross(self.td, &a, &b) {
            return Ok(());
        }
        let mid = 0.5 * (a.p + b.p);
        let m = sample(self.td, mid, guess(&a, &b, mid))?;
        self.run(a, m, budget, out)?;
        self.run(m, b, budget, out)
    }

    fn leaf_interval(&self, a: Sample, b: Sample, crosses: bool, budget: &mut usize, out: &mut Found) -> Result<()> {
        if !crosses {
            return hidden_pair(self.td, a, b, budget, &mut out.roots);
        }
        out.sign_changes += 1;
        let inside = |x: Option<f64>| x.filter(|&x| a.p <= x && x <= b.p);
        match refine_root(self.td, a, b)? {
            Some((p, r)) => out.roots.push((p, r, stability(a.total))),
            None => match (inside(Some(self.td.mean())), inside(self.kink)) {
                (Some(m), _) if positive(a.total) => out.absorbed.push((m, Stability::Stable)),
                (_, Some(k)) if !positive(a.total) => out.absorbed.push((k, Stability::Unstable)),
                _ => out.jumps.push(0.5 * (a.p + b.p)),
            },
        }
        Ok(())
    }
}

/// All market-clearing prices of the state's balance sheets under `belief`.
///
/// Total demand is sampled on every [`COARSE_STRIDE`]-th scan price plus
/// the kink and discontinuity prices. Intervals are halved down to the scan
/// step unless monotonicity bounds rule out a root; each remaining sign
/// change is refined, and each remaining interval without one is searched
/// for a hidden pair of roots.
///
/// Bank demand jumps at two prices where it is really an interval. At the
/// mean payoff banks are indifferent between all feasible holdings; at the
/// insolvency price equity is zero, so selling everything and the solvent
/// optimum are both admissible. A jump through zero at either price is an
/// equilibrium in which banks take the investors' side
/// ([`Equilibrium::bank_absorbs`]): stable at the mean, unstable at the
/// insolvency price.
pub fn find_equilibria(
    s: &MarketState,
    belief: &Belief,
    params: &ModelParams,
    scan: &ScanSettings,
) -> Result<EquilibriumSet> {
    scan.validate()?;
    let td = TotalDemand::new(s, belief, params)?;
    let h = scan.step();
    let n = scan.grid_points;
    let mut prices: Vec<f64> = (0..n)
        .filter(|i| i % COARSE_STRIDE == 0 || i + 1 == n)
        .map(|i| if i + 1 == n { scan.price_hi } else { scan.price_lo + h * i as f64 })
        .collect();
    for p in breakpoints(&td, params, belief) {
        if p > scan.price_lo && p < scan.price_hi {
            // sample at the breakpoint and just below it
            prices.push(p);
            prices.push(p - 1e-9 * h.min(1.0));
        }
    }
    prices.sort_by(f64::total_cmp);
    prices.dedup();
    let samples: Vec<Sample> = prices
        .par_chunks(SAMPLE_CHUNK)
        .map(|c| sample_run(&td, c))
        .collect::<Result<Vec<_>>>()?
        .concat();

    let search = Search {
        td: &td,
        kink: s.bank.insolvency_price().ok(),
        leaf: h * (1.0 + 1e-9),
    };
    let parts = samples
        .par_windows(2)
        .map(|w| {
            let mut found = Found::default();
            let mut budget = 64 * COARSE_STRIDE;
            search.run(w[0], w[1], &mut budget, &mut found)?;
            Ok(found)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all = Found::default();
    for f in parts {
        all.roots.extend(f.roots);
        all.absorbed.extend(f.absorbed);
        all.jumps.extend(f.jumps);
        all.sign_changes += f.sign_changes;
    }

    let mut roots = all.roots;
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    roots.dedup_by(|b, a| (b.0 - a.0).abs() < 10.0 * PRICE_TOL);
    let mut equilibria: Vec<Equilibrium> = roots
        .into_iter()
        .map(|(price, residual, stability)| Equilibrium {
            price,
            stability,
            solvent: is_solvent(&s.bank, price),
            residual,
            bank_absorbs: false,
        })
        .collect();
    for (price, stability) in all.absorbed {
        equilibria.push(Equilibrium {
            price,
            stability,
            solvent: is_solvent(&s.bank, price),
            residual: 0.0,
            bank_absorbs: true,
        });
    }
    equilibria.sort_by(|a, b| a.price.total_cmp(&b.price));
    if equilibria.is_empty() {
        return Err(ModelError::NoRoot {
            lo: scan.price_lo,
            hi: scan.price_hi,
        });
    }
    Ok(EquilibriumSet {
        degenerate: equilibria.len() == 2,
        equilibria,
        price_lo: scan.price_lo,
        price_hi: scan.price_hi,
        sign_changes: all.sign_changes,
        jumps: all.jumps,
    })
}

/// Bonds the banks buy when the market clears at `eq`: their demand at the
/// price, minus everything when insolvent there, or the investors' sales
/// when [`Equilibrium::bank_absorbs`].
pub fn executed_trade(td: &TotalDemand, eq: &Equilibrium) -> Result<f64> {
    if !eq.solvent {
        Ok(-td.bank_state().x)
    } else if eq.bank_absorbs {
        Ok(-td.investor(eq.price)?.quantity)
    } else {
        Ok(td.bank(eq.price)?.quantity)
    }
}

/// Picks one equilibrium. Falls back to all roots if none is stable.
pub fn select_equilibrium(set: &EquilibriumSet, policy: SelectionPolicy, previous_price: f64) -> Result<Equilibrium> {
    let stable: Vec<&Equilibrium> = set.equilibria.iter().filter(|e| e.is_stable()).collect();
    let pool: Vec<&Equilibrium> = if stable.is_empty() {
        set.equilibria.iter().collect()
    } else {
        stable
    };
    let chosen = match policy {
        SelectionPolicy::LargestStable => pool.last(),
        SelectionPolicy::SmallestStable => pool.first(),
        SelectionPolicy::NearestToPrevious => pool
            .iter()
            .min_by(|a, b| (a.price - previous_price).abs().total_cmp(&(b.price - previous_price).abs())),
    };
    chosen.map(|e| **e).ok_or(ModelError::NoRoot {
        lo: set.price_lo,
        hi: set.price_hi,
    })
}

/// One shock and the trade that restores consistent balance sheets.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub belief_before: Belief,
    pub belief_after: Belief,
    pub equilibria: EquilibriumSet,
    pub selected: Equilibrium,
    /// Bonds bought by the banks (negative: sold).
    pub trade_quantity: f64,
    /// `|investor demand + trade_quantity|` at the selected price.
    pub investor_residual: f64,
    pub state_before: MarketState,
    pub state_after: MarketState,
    pub crisis: bool,
}

/// Replaces the belief, clears the market and executes the banks' trade.
pub fn step(
    s: &MarketState,
    new_belief: &Belief,
    params: &ModelParams,
    policy: SelectionPolicy,
    scan: &ScanSettings,
) -> Result<TrajectoryStep> {
    if s.bank.x + s.investor.z <= 0.0 || s.bank.y + s.investor.c <= 0.0 {
        return Err(ModelError::Degenerate("state holds no bonds or no money".into()));
    }
    let equilibria = find_equilibria(s, new_belief, params, scan)?;
    let selected = select_equilibrium(&equilibria, policy, s.price)?;
    let td = TotalDemand::new(s, new_belief, params)?;
    let crisis = !selected.solvent;
    let trade_quantity = executed_trade(&td, &selected)?;
    let investor = td.investor(selected.price)?.quantity;
    let investor_residual = (investor + trade_quantity).abs();
    if investor_residual > 1e-4 * s.bank.x.max(1.0) {
        return Err(ModelError::Numerical(format!(
            "market does not clear at {}: banks {trade_quantity}, investors {investor}",
            selected.price
        )));
    }
    let state_after = s
        .apply_trade(trade_quantity, selected.price, params.mu)?
        .with_belief(*new_belief);
    Ok(TrajectoryStep {
        belief_before: s.belief,
        belief_after: *new_belief,
        equilibria,
        selected,
        trade_quantity,
        investor_residual,
        state_before: *s,
        state_after,
        crisis,
    })
}

/// Applies the belief sequence step by step, stopping after a crisis.
pub fn run_trajectory(
    s0: &MarketState,
    beliefs: &[Belief],
    params: &ModelParams,
    policy: SelectionPolicy,
    scan: &ScanSettings,
) -> Result<Vec<TrajectoryStep>> {
    let mut out: Vec<TrajectoryStep> = Vec::with_capacity(beliefs.len());
    let mut state = *s0;
    for b in beliefs {
        let st = step(&state, b, params, policy, scan)?;
        state = st.state_after;
        let stop = st.crisis;
        out.push(st);
        if stop {
            break;
        }
    }
    Ok(out)
}

/// One line of the trajectory record stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: usize,
    pub alpha: f64,
    pub beta: f64,
    pub price: f64,
    pub x: f64,
    pub r: f64,
    pub y: f64,
    pub z: f64,
    pub c: f64,
    pub equity: f64,
    pub leverage: Option<f64>,
    pub capital_ratio: Option<f64>,
    pub n_equilibria: usize,
    pub crisis: bool,
}

impl TrajectoryRecord {
    /// Record for step `t` (counting from 1), with post-trade balance sheets.
    pub fn from_step(t: usize, st: &TrajectoryStep, basis: LeverageBasis) -> Self {
        let s = &st.state_after;
        let pi = st.selected.price;
        Self {
            t,
            alpha: st.belief_after.alpha(),
            beta: st.belief_after.beta(),
            price: pi,
            x: s.bank.x,
            r: s.bank.r,
            y: s.bank.y,
            z: s.investor.z,
            c: s.investor.c,
            equity: s.bank.equity(pi),
            leverage: s.bank.leverage_with(pi, basis).ok(),
            capital_ratio: s.bank.capital_ratio(pi).ok(),
            n_equilibria: st.equilibria.len(),
            crisis: st.crisis,
        }
    }
}

/// Writes one JSON object per step.
pub fn write_trajectory<W: Write>(mut out: W, steps: &[TrajectoryStep], basis: LeverageBasis) -> std::io::Result<()> {
    for (i, st) in steps.iter().enumerate() {
        let rec = TrajectoryRecord::from_step(i + 1, st, basis);
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
