//! Inside-money banking model: beliefs over a bond payoff, bank and investor
//! balance sheets, demand schedules, market-clearing equilibria and sweeps
//! over belief shocks.

pub mod beliefs;
pub mod cli;
pub mod config;
pub mod demand;
pub mod equilibrium;
pub mod error;
pub mod format;
pub mod quad;
pub mod special;
pub mod state;
pub mod sweep;

pub use beliefs::{classify_shock, Belief, ShockClass};
pub use error::{ModelError, Result};
pub use state::{BankState, InvestorState, MarketState, ModelParams};
