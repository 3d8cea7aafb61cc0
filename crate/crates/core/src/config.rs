//! Run configuration: a versioned JSON document read by the command-line
//! driver. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beliefs::Belief;
use crate::equilibrium::{ScanSettings, SelectionPolicy};
use crate::error::ModelError;
use crate::state::{calibrate, LeverageBasis, MarketState, ModelParams, StateDocument};
use crate::sweep::linspace;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("invalid config: {0}")]
    Model(#[from] ModelError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

/// Inputs to [`calibrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub alpha: f64,
    pub beta: f64,
    pub total_bonds: f64,
    pub total_hpm: f64,
    pub bank_bonds: f64,
}

/// `points` evenly spaced values from `lo` to `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.points)
    }

    fn validate(&self, name: &str) -> Result<(), ConfigError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return invalid(format!("{name}: need lo < hi, got [{}, {}]", self.lo, self.hi));
        }
        if self.points < 2 {
            return invalid(format!("{name}: need at least 2 points"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandCurveConfig {
    /// Defaults to the initial state's belief.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belief: Option<Belief>,
    pub prices: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub beliefs: Vec<Belief>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepLineConfig {
    pub beta: f64,
    pub alpha: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub alpha: Grid,
    pub beta: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub params: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<StateDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
    /// Root-finding grid; region maps default to a coarser one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSettings>,
    #[serde(default)]
    pub policy: SelectionPolicy,
    #[serde(default)]
    pub leverage_basis: LeverageBasis,
    /// Largest excess demand, in bonds, still counted as consistent.
    #[serde(default = "default_tolerance")]
    pub tolerance_bonds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand_curve: Option<DemandCurveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shock: Option<Belief>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectoryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_line: Option<SweepLineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionConfig>,
}

fn default_tolerance() -> f64 {
    5.0
}

impl RunConfig {
    /// Parses and validates a config document.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return invalid(format!("unsupported version {} (expected {CONFIG_VERSION})", self.version));
        }
        self.params.validate()?;
        match (&self.initial_state, &self.calibration) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return invalid("exactly one of initial_state and calibration is required"),
        }
        if let Some(doc) = self.initial_state {
            MarketState::try_from(doc)?.validate(&self.params)?;
        }
        if let Some(c) = self.calibration {
            Belief::new(c.alpha, c.beta)?;
        }
        if let Some(scan) = self.scan {
            scan.validate()?;
        }
        if !(self.tolerance_bonds > 0.0) {
            return invalid("tolerance_bonds must be positive");
        }
        if let Some(d) = &self.demand_curve {
            d.prices.validate("demand_curve.prices")?;
            if d.prices.lo <= 0.0 || d.prices.hi > 1.0 {
                return invalid("demand_curve.prices must lie in (0, 1]");
            }
        }
        if let Some(t) = &self.trajectory {
            if t.beliefs.is_empty() {
                return invalid("trajectory.beliefs is empty");
            }
        }
        if let Some(l) = &self.sweep_line {
            l.alpha.validate("sweep_line.alpha")?;
            Belief::new(l.alpha.lo, l.beta)?;
        }
        if let Some(r) = &self.region {
            r.alpha.validate("region.alpha")?;
            r.beta.validate("region.beta")?;
            Belief::new(r.alpha.lo, r.beta.lo)?;
        }
        Ok(())
    }

    /// The explicit initial state, or the calibrated one.
    pub fn initial_market_state(&self) -> Result<MarketState, ConfigError> {
        match (self.initial_state, self.calibration) {
            (Some(doc), None) => {
                let s = MarketState::try_from(doc)?;
                s.validate(&self.params)?;
                Ok(s)
            }
            (None, Some(c)) => Ok(calibrate(
                Belief::new(c.alpha, c.beta)?,
                &self.params,
                c.total_bonds,
                c.total_hpm,
                c.bank_bonds,
            )?),
            _ => invalid("exactly one of initial_state and calibration is required"),
        }
    }

    pub fn scan_or(&self, default: ScanSettings) -> ScanSettings {
        self.scan.unwrap_or(default)
    }
}
