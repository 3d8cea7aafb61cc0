//! One-shot shock sweeps from a fixed base state: lines in the shape
//! parameter `alpha` and maps over `(alpha, beta)`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::beliefs::Belief;
use crate::demand::TotalDemand;
use crate::equilibrium::{executed_trade, find_equilibria, select_equilibrium, Equilibrium, EquilibriumSet, ScanSettings, SelectionPolicy};
use crate::error::{ModelError, Result};
use crate::format::{opt_real, real};
use crate::state::{MarketState, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionClass {
    UniqueSolvent,
    Triple,
    UniqueInsolvent,
    /// Two roots: a tangency at a fold, within tolerance.
    Degenerate,
}

impl RegionClass {
    pub fn of(set: &EquilibriumSet, selected: &Equilibrium) -> Self {
        match set.len() {
            1 if selected.solvent => Self::UniqueSolvent,
            1 => Self::UniqueInsolvent,
            2 => Self::Degenerate,
            _ => Self::Triple,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::UniqueSolvent => "unique_solvent",
            Self::Triple => "triple",
            Self::UniqueInsolvent => "unique_insolvent",
            Self::Degenerate => "degenerate",
        }
    }
}

/// One shocked belief of a line sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineSample {
    pub alpha: f64,
    pub beta: f64,
    pub mean: f64,
    pub equilibria: Vec<Equilibrium>,
    pub selected: Equilibrium,
    pub classification: RegionClass,
    /// Bank purchase at the selected price (`-x` when insolvent there).
    pub trade: f64,
    /// Post-trade leverage; `None` when equity is not positive.
    pub leverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineSweepResult {
    pub samples: Vec<LineSample>,
}

fn line_sample(
    s: &MarketState,
    belief: Belief,
    params: &ModelParams,
    policy: SelectionPolicy,
    scan: &ScanSettings,
) -> Result<LineSample> {
    let set = find_equilibria(s, &belief, params, scan)?;
    let selected = select_equilibrium(&set, policy, s.price)?;
    let trade = executed_trade(&TotalDemand::new(s, &belief, params)?, &selected)?;
    let after = s.apply_trade(trade, selected.price, params.mu)?;
    Ok(LineSample {
        alpha: belief.alpha(),
        beta: belief.beta(),
        mean: belief.mean(),
        classification: RegionClass::of(&set, &selected),
        equilibria: set.equilibria,
        selected,
        trade,
        leverage: after.bank.leverage(selected.price).ok(),
    })
}

/// Shocks the base state to `Beta(alpha, beta_fixed)` for every `alpha`,
/// each time from the same base state. Samples keep the order of `alphas`.
pub fn sweep_severity(
    s: &MarketState,
    alphas: &[f64],
    beta_fixed: f64,
    params: &ModelParams,
    policy: SelectionPolicy,
    scan: &ScanSettings,
) -> Result<LineSweepResult> {
    if alphas.is_empty() {
        return Err(ModelError::Domain("sweep needs at least one alpha".into()));
    }
    let samples = alphas
        .par_iter()
        .map(|&a| line_sample(s, Belief::new(a, beta_fixed)?, params, policy, scan))
        .collect::<Result<Vec<_>>>()?;
    Ok(LineSweepResult { samples })
}

/// Writes `alpha,EV,root1,stab1,solv1,...,root3,...,selected_price,trade,leverage`.
pub fn write_line_csv<W: Write>(mut out: W, sweep: &LineSweepResult) -> std::io::Result<()> {
    writeln!(
        out,
        "alpha,EV,root1,stab1,solv1,root2,stab2,solv2,root3,stab3,solv3,selected_price,trade,leverage"
    )?;
    for s in &sweep.samples {
        let mut cols = vec![real(s.alpha), real(s.mean)];
        for k in 0..3 {
            match s.equilibria.get(k) {
                Some(e) => {
                    cols.push(real(e.price));
                    cols.push(if e.is_stable() { "stable" } else { "unstable" }.into());
                    cols.push(e.solvent.to_string());
                }
                None => cols.extend([String::new(), String::new(), String::new()]),
            }
        }
        cols.push(real(s.selected.price));
        cols.push(real(s.trade));
        cols.push(opt_real(s.leverage));
        writeln!(out, "{}", cols.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionCell {
    pub alpha: f64,
    pub beta: f64,
    pub classification: RegionClass,
    pub n_roots: usize,
    pub selected_price: f64,
    pub selected_solvent: bool,
}

/// Cells indexed by `(beta row, alpha column)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionMap {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Row-major: `cells[j * alphas.len() + i]` is `(alphas[i], betas[j])`.
    pub cells: Vec<RegionCell>,
}

impl RegionMap {
    pub fn cell(&self, i_alpha: usize, j_beta: usize) -> &RegionCell {
        &self.cells[j_beta * self.alphas.len() + i_alpha]
    }

    pub fn row(&self, j_beta: usize) -> &[RegionCell] {
        let n = self.alphas.len();
        &self.cells[j_beta * n..(j_beta + 1) * n]
    }

    /// Cell whose grid point is closest to `(alpha, beta)`.
    pub fn nearest(&self, alpha: f64, beta: f64) -> &RegionCell {
        let closest = |grid: &[f64], v: f64| {
            (0..grid.len())
                .min_by(|&a, &b| (grid[a] - v).abs().total_cmp(&(grid[b] - v).abs()))
                .unwrap_or(0)
        };
        self.cell(closest(&self.alphas, alpha), closest(&self.betas, beta))
    }

    pub fn count(&self, class: RegionClass) -> usize {
        self.cells.iter().filter(|c| c.classification == class).count()
    }
}

/// Evenly spaced grid including both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Price scan used for each region cell by default.
pub fn region_scan() -> ScanSettings {
    ScanSettings::with_points(200)
}

pub fn classify_belief(
    s: &MarketState,
    belief: &Belief,
    params: &ModelParams,
    policy: SelectionPolicy,
    scan: &ScanSettings,
) -> Result<RegionCell> {
    let set = find_equilibria(s, belief, params, scan)?;
    let selected = select_equilibrium(&set, policy, s.price)?;
    Ok(RegionCell {
        alpha: belief.alpha(),
        beta: belief.beta(),
        classification: RegionClass::of(&set, &selected),
        n_roots: set.len(),
        selected_price: selected.price,
        selected_solvent: selected.solvent,
    })
}

/// Classifies every `(alpha, beta)` shock from the base state `s`.
pub fn region_map(
    s: &MarketState,
    alpha_grid: &[f64],
    beta_grid: &[f64],
    params: &ModelParams,
    policy: SelectionPolicy,
    scan: &ScanSettings,
) -> Result<RegionMap> {
    if alpha_grid.is_empty() || beta_grid.is_empty() {
        return Err(ModelError::Domain("region grids must be nonempty".into()));
    }
    let n = alpha_grid.len();
    let cells = (0..n * beta_grid.len())
        .into_par_iter()
        .map(|k| {
            let b = Belief::new(alpha_grid[k % n], beta_grid[k / n])?;
            classify_belief(s, &b, params, policy, scan)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionMap {
        alphas: alpha_grid.to_vec(),
        betas: beta_grid.to_vec(),
        cells,
    })
}

/// Writes `alpha,beta,classification,n_roots,selected_price,selected_solvent`.
pub fn write_region_csv<W: Write>(mut out: W, map: &RegionMap) -> std::io::Result<()> {
    writeln!(out, "alpha,beta,classification,n_roots,selected_price,selected_solvent")?;
    for c in &map.cells {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            real(c.alpha),
            real(c.beta),
            c.classification.as_str(),
            c.n_roots,
            real(c.selected_price),
            c.selected_solvent
        )?;
    }
    Ok(())
}

/// Extent of the triple-equilibrium band in one `beta` row.
///
/// Shocks get milder as `alpha` grows at fixed `beta`. The root pair first
/// appears at `onset_alpha` (the band's lower boundary, where the local
/// minimum of total demand touches zero at the insolvency price) and the
/// solvent pair disappears at `collapse_alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldRow {
    pub beta: f64,
    pub onset_alpha: f64,
    pub collapse_alpha: f64,
}

/// Per-row extent of `Triple` cells, at grid resolution. Rows without any
/// `Triple` cell are omitted.
pub fn fold_boundaries(map: &RegionMap) -> Result<Vec<FoldRow>> {
    let mut rows = Vec::new();
    for (j, &beta) in map.betas.iter().enumerate() {
        let triple: Vec<f64> = map
            .row(j)
            .iter()
            .filter(|c| c.classification == RegionClass::Triple)
            .map(|c| c.alpha)
            .collect();
        if let (Some(lo), Some(hi)) = (
            triple.iter().cloned().reduce(f64::min),
            triple.iter().cloned().reduce(f64::max),
        ) {
            rows.push(FoldRow {
                beta,
                onset_alpha: hi,
                collapse_alpha: lo,
            });
        }
    }
    if rows.is_empty() {
        return Err(ModelError::EmptyBand);
    }
    Ok(rows)
}

fn is_triple(s: &MarketState, alpha: f64, beta: f64, params: &ModelParams, scan: &ScanSettings) -> Result<bool> {
    let b = Belief::new(alpha, beta)?;
    Ok(find_equilibria(s, &b, params, scan)?.len() >= 3)
}

/// Bisects on `alpha` between `inside` (triple) and `outside` (not triple).
fn bisect_alpha(
    s: &MarketState,
    mut inside: f64,
    mut outside: f64,
    beta: f64,
    params: &ModelParams,
    scan: &ScanSettings,
    tol: f64,
) -> Result<f64> {
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        if is_triple(s, mid, beta, params, scan)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

/// [`fold_boundaries`] with each edge bisected on `alpha` to `tol` against
/// its non-triple grid neighbour. Edges on the border of the grid are kept.
pub fn refine_fold_boundaries(
    map: &RegionMap,
    s: &MarketState,
    params: &ModelParams,
    scan: &ScanSettings,
    tol: f64,
) -> Result<Vec<FoldRow>> {
    let coarse = fold_boundaries(map)?;
    let alphas = &map.alphas;
    let index = |a: f64| alphas.iter().position(|&x| x == a).unwrap_or(0);
    coarse
        .par_iter()
        .map(|row| {
            let mut out = *row;
            let i = index(row.onset_alpha);
            if i + 1 < alphas.len() {
                out.onset_alpha = bisect_alpha(s, alphas[i], alphas[i + 1], row.beta, params, scan, tol)?;
            }
            let i = index(row.collapse_alpha);
            if i > 0 {
                out.collapse_alpha = bisect_alpha(s, alphas[i], alphas[i - 1], row.beta, params, scan, tol)?;
            }
            Ok(out)
        })
        .collect()
}
