use thiserror::Error;

/// Errors produced by the model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),

    /// A CRRA moment or integral that does not converge.
    #[error("divergent: {0}")]
    Divergence(String),

    #[error("degenerate balance sheet: {0}")]
    Degenerate(String),

    #[error("banks are insolvent: equity {equity}")]
    Insolvent { equity: f64 },

    #[error("infeasible trade: {0}")]
    InfeasibleTrade(String),

    /// Demand is unbounded (reserve bound with zero currency fraction).
    #[error("unbounded demand: {0}")]
    Unbounded(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("total demand has no root in [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("region contains no triple-equilibrium cells")]
    EmptyBand,

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
