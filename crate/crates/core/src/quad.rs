//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The integrator works on `[f64; N]`-valued integrands so that related
//! integrals (a gradient and its derivative, say) share one set of function
//! evaluations. Nodes are interior only, so integrable endpoint
//! singularities are never sampled.

use crate::error::{ModelError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_intervals: 400,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment<const N: usize> {
    lo: f64,
    hi: f64,
    value: [f64; N],
    error: [f64; N],
    /// Rounding floor of `error`.
    floor: [f64; N],
}

impl<const N: usize> Segment<N> {
    /// Largest error relative to the per-component weights.
    fn worst(&self, weight: &[f64; N]) -> f64 {
        (0..N).map(|j| self.error[j] * weight[j]).fold(0.0, f64::max)
    }
}

fn kronrod<const N: usize, F>(f: &mut F, lo: f64, hi: f64) -> Segment<N>
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    let mut abs = [0.0; N];
    for j in 0..N {
        k[j] = fc[j] * WGK[7];
        g[j] = fc[j] * WG[3];
        abs[j] = fc[j].abs() * WGK[7];
    }
    let mut fx = [([0.0; N], [0.0; N]); 7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fx[i] = (f1, f2);
        for j in 0..N {
            let s = f1[j] + f2[j];
            k[j] += WGK[i] * s;
            abs[j] += WGK[i] * (f1[j].abs() + f2[j].abs());
            // odd Kronrod indices are the Gauss nodes
            if i % 2 == 1 {
                g[j] += WG[i / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut floor = [0.0; N];
    for j in 0..N {
        // QUADPACK's error scaling
        let mean = 0.5 * k[j];
        let mut asc = WGK[7] * (fc[j] - mean).abs();
        for i in 0..7 {
            asc += WGK[i] * ((fx[i].0[j] - mean).abs() + (fx[i].1[j] - mean).abs());
        }
        let raw = ((k[j] - g[j]) * half).abs();
        let asc = asc * half.abs();
        let mut err = raw;
        if asc != 0.0 && raw != 0.0 {
            err = asc * (200.0 * raw / asc).powf(1.5).min(1.0);
        }
        value[j] = k[j] * half;
        floor[j] = 50.0 * f64::EPSILON * (abs[j] * half).abs();
        error[j] = err.max(floor[j]);
    }
    Segment {
        lo,
        hi,
        value,
        error,
        floor,
    }
}

/// Integrates a vector-valued function over `[lo, hi]`.
///
/// Each component must satisfy `err <= max(abs_tol, rel_tol * |value|)`,
/// or be within twice the rounding floor `50 eps ∫|f|`.
/// Returns a numerical error if the interval budget is exhausted or the
/// integrand produces non-finite values.
pub fn integrate<const N: usize, F>(f: F, lo: f64, hi: f64, opts: QuadOptions) -> Result<[f64; N]>
where
    F: FnMut(f64) -> [f64; N],
{
    integrate_loose(f, lo, hi, opts, [1.0; N])
}

/// [`integrate`] with component `j`'s tolerances multiplied by `slack[j]`.
/// Components with `slack > 1` are refined while the interval budget lasts
/// but never cause a failure.
pub fn integrate_loose<const N: usize, F>(
    f: F,
    lo: f64,
    hi: f64,
    opts: QuadOptions,
    slack: [f64; N],
) -> Result<[f64; N]>
where
    F: FnMut(f64) -> [f64; N],
{
    integrate_split(f, &[lo, hi], opts, slack)
}

/// Like [`integrate_loose`] over `[points[0], points[last]]`, starting from
/// the segments between consecutive `points` (ascending).
pub fn integrate_split<const N: usize, F>(mut f: F, points: &[f64], opts: QuadOptions, slack: [f64; N]) -> Result<[f64; N]>
where
    F: FnMut(f64) -> [f64; N],
{
    let (lo, hi) = match (points.first(), points.last()) {
        (Some(&lo), Some(&hi)) if hi > lo => (lo, hi),
        _ => return Ok([0.0; N]),
    };
    let mut segments: Vec<Segment<N>> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&mut f, w[0], w[1]))
        .collect();
    loop {
        let mut total = [0.0; N];
        let mut err = [0.0; N];
        let mut floor = [0.0; N];
        for s in &segments {
            for j in 0..N {
                total[j] += s.value[j];
                err[j] += s.error[j];
                floor[j] += s.floor[j];
            }
        }
        if total.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::Numerical(format!(
                "non-finite integrand on [{lo}, {hi}]"
            )));
        }
        // heavy cancellation can put the request below rounding
        let tol: [f64; N] =
            std::array::from_fn(|j| (slack[j] * opts.abs_tol.max(opts.rel_tol * total[j].abs())).max(2.0 * floor[j]));
        if (0..N).all(|j| err[j] <= tol[j]) {
            return Ok(total);
        }
        if segments.len() >= opts.max_intervals + points.len() {
            if (0..N).all(|j| slack[j] > 1.0 || err[j] <= tol[j]) {
                return Ok(total);
            }
            return Err(ModelError::Numerical(format!(
                "quadrature did not converge on [{lo}, {hi}] (error {err:?}, value {total:?})"
            )));
        }
        // refine where the unconverged components lose most
        let weight: [f64; N] = std::array::from_fn(|j| if err[j] > tol[j] { 1.0 / tol[j] } else { 0.0 });
        let (idx, _) = segments.iter().enumerate().fold((0, -1.0), |acc, (i, s)| {
            let w = s.worst(&weight);
            if w > acc.1 {
                (i, w)
            } else {
                acc
            }
        });
        let s = segments.swap_remove(idx);
        let mid = 0.5 * (s.lo + s.hi);
        if mid <= s.lo || mid >= s.hi {
            return Err(ModelError::Numerical(format!(
                "quadrature interval underflow near {mid}"
            )));
        }
        segments.push(kronrod(&mut f, s.lo, mid));
        segments.push(kronrod(&mut f, mid, s.hi));
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(mut f: F, lo: f64, hi: f64, opts: QuadOptions) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| [f(x)], lo, hi, opts).map(|v| v[0])
}
