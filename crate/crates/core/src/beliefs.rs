//! Beta-distributed beliefs about the terminal value of a bond.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::special::{beta_inc, ln_beta};

/// Common belief `V ~ Beta(alpha, beta)` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBelief", into = "RawBelief")]
pub struct Belief {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBelief {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawBelief> for Belief {
    type Error = ModelError;
    fn try_from(raw: RawBelief) -> Result<Self> {
        Belief::new(raw.alpha, raw.beta)
    }
}

impl From<Belief> for RawBelief {
    fn from(b: Belief) -> Self {
        RawBelief {
            alpha: b.alpha,
            beta: b.beta,
        }
    }
}

/// Direction of a belief shock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShockClass {
    Positive,
    Negative,
    Neither,
}

impl Belief {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(ModelError::Domain(format!(
                "Beta shapes must be positive and finite, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn pdf(&self, v: f64) -> Result<f64> {
        check_unit(v)?;
        let (a, b) = (self.alpha, self.beta);
        if v == 0.0 {
            return Ok(edge_density(a, b));
        }
        if v == 1.0 {
            return Ok(edge_density(b, a));
        }
        Ok(self.density(v))
    }

    /// Density on the open interval, without domain checks.
    pub(crate) fn density(&self, v: f64) -> f64 {
        ((self.alpha - 1.0) * v.ln() + (self.beta - 1.0) * (-v).ln_1p() - ln_beta(self.alpha, self.beta)).exp()
    }

    pub fn cdf(&self, v: f64) -> Result<f64> {
        check_unit(v)?;
        Ok(beta_inc(self.alpha, self.beta, v))
    }

    /// Inverse CDF. Newton steps safeguarded by a bisection bracket.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(ModelError::Domain(format!("quantile level {p} outside (0, 1)")));
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut x = self.mean();
        for _ in 0..300 {
            let resid = beta_inc(self.alpha, self.beta, x) - p;
            if resid == 0.0 {
                return Ok(x);
            }
            if resid < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let dens = self.density(x);
            let newton = x - resid / dens;
            let next = if dens > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 2.0 * f64::EPSILON * x || hi - lo <= 2.0 * f64::EPSILON * hi {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// `E[V^p] = B(alpha + p, beta) / B(alpha, beta)`.
    pub fn power_moment(&self, p: f64) -> Result<f64> {
        if self.alpha + p <= 0.0 {
            return Err(ModelError::Divergence(format!(
                "E[V^{p}] diverges for alpha = {}",
                self.alpha
            )));
        }
        Ok((ln_beta(self.alpha + p, self.beta) - ln_beta(self.alpha, self.beta)).exp())
    }

    /// Price at or below which a CRRA investor with risk aversion `lambda`
    /// spends all available money on bonds: `(alpha - lambda) / (alpha + beta - lambda)`.
    pub fn affordability_threshold(&self, lambda: f64) -> Result<f64> {
        if self.alpha <= lambda {
            return Err(ModelError::Divergence(format!(
                "affordability threshold needs alpha > lambda (alpha = {}, lambda = {lambda})",
                self.alpha
            )));
        }
        Ok((self.alpha - lambda) / (self.alpha + self.beta - lambda))
    }
}

fn check_unit(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ModelError::Domain(format!("{v} outside [0, 1]")))
    }
}

// density at the endpoint where the `shape - 1` exponent applies
fn edge_density(shape: f64, other: f64) -> f64 {
    if shape < 1.0 {
        f64::INFINITY
    } else if shape == 1.0 {
        (-ln_beta(1.0, other)).exp()
    } else {
        0.0
    }
}

const SOSD_GRID: usize = 10_001;
const SOSD_SLACK: f64 = 1e-9;

// running trapezoid integral of the CDF on a uniform grid
fn integrated_cdf(b: &Belief) -> Vec<f64> {
    let h = 1.0 / (SOSD_GRID - 1) as f64;
    let mut out = Vec::with_capacity(SOSD_GRID);
    let mut acc = 0.0;
    let mut prev = 0.0;
    out.push(0.0);
    for i in 1..SOSD_GRID {
        let f = beta_inc(b.alpha, b.beta, i as f64 * h);
        acc += 0.5 * h * (prev + f);
        prev = f;
        out.push(acc);
    }
    out
}

/// `true` when `a` second-order stochastically dominates `b`, strictly somewhere.
fn dominates(a: &[f64], b: &[f64]) -> bool {
    let weakly = a.iter().zip(b).all(|(x, y)| *x <= *y + SOSD_SLACK);
    let strictly = a.iter().zip(b).any(|(x, y)| *x < *y - SOSD_SLACK);
    weakly && strictly
}

/// Classifies `new` relative to `old`: positive when `new` dominates in the
/// second-order sense and has a strictly larger `eps`-quantile.
pub fn classify_shock(old: &Belief, new: &Belief, eps: f64) -> Result<ShockClass> {
    let q_old = old.quantile(eps)?;
    let q_new = new.quantile(eps)?;
    let i_old = integrated_cdf(old);
    let i_new = integrated_cdf(new);
    Ok(if dominates(&i_new, &i_old) && q_new > q_old {
        ShockClass::Positive
    } else if dominates(&i_old, &i_new) && q_old > q_new {
        ShockClass::Negative
    } else {
        ShockClass::Neither
    })
}
