//! Command-line driver. Every subcommand reads a [`RunConfig`] and writes
//! CSV, JSON Lines or a state document to standard output or `--out`.
//!
//! Exit codes: 0 ok, 1 negative verdict (`verify` on an inconsistent
//! state), 2 config or usage error, 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, RunConfig};
use crate::demand::{demand_curve, write_demand_csv};
use crate::equilibrium::{run_trajectory, write_trajectory, ScanSettings, SelectionPolicy};
use crate::error::ModelError;
use crate::state::verify_consistency;
use crate::sweep::{region_map, region_scan, sweep_severity, write_line_csv, write_region_csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "inside-money", version, about = "Bank and investor bond market with inside money")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that the initial state is consistent with its belief.
    Verify(Common),
    /// Bank, investor and total demand over a price grid.
    DemandCurve(Common),
    /// One shock from the initial state.
    Shock(Common),
    /// A sequence of shocks.
    Trajectory(Common),
    /// One-shot shocks along a line in alpha.
    SweepLine(Common),
    /// Classify one-shot shocks over an (alpha, beta) grid.
    Region(Common),
    /// Print the calibrated initial state.
    Calibrate(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = ["largest", "nearest", "smallest"])]
    policy: Option<String>,
    /// Overrides `params.gamma_min`.
    #[arg(long)]
    gamma_min: Option<f64>,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("write failed: {e}"))
    }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(g) = common.gamma_min {
        cfg.params = cfg.params.with_gamma_min(g).map_err(ConfigError::from)?;
    }
    if let Some(p) = &common.policy {
        cfg.policy = p.parse::<SelectionPolicy>().map_err(ConfigError::from)?;
    }
    Ok(cfg)
}

fn missing(block: &str) -> Failure {
    Failure::Config(format!("config has no {block} block"))
}

/// Runs one subcommand, returning its output and exit code.
fn execute(command: &Command, cfg: &RunConfig) -> Result<(Vec<u8>, i32), Failure> {
    let mut out = Vec::new();
    let mut code = EXIT_OK;
    match command {
        Command::Calibrate(_) => {
            if cfg.calibration.is_none() {
                return Err(missing("calibration"));
            }
            out.extend(cfg.initial_market_state()?.to_document().into_bytes());
        }
        Command::Verify(_) => {
            let s = cfg.initial_market_state()?;
            let r = verify_consistency(&s, &cfg.params, cfg.tolerance_bonds)?;
            writeln!(out, "bank_excess,investor_excess,consistent")?;
            writeln!(
                out,
                "{},{},{}",
                crate::format::real(r.bank_excess),
                crate::format::real(r.investor_excess),
                r.consistent
            )?;
            if !r.consistent {
                code = EXIT_NEGATIVE;
            }
        }
        Command::DemandCurve(_) => {
            let d = cfg.demand_curve.as_ref().ok_or_else(|| missing("demand_curve"))?;
            let s = cfg.initial_market_state()?;
            let belief = d.belief.unwrap_or(s.belief);
            let curve = demand_curve(&s, &belief, &cfg.params, &d.prices.values())?;
            write_demand_csv(&mut out, &curve)?;
        }
        Command::Shock(_) | Command::Trajectory(_) => {
            let beliefs = match command {
                Command::Shock(_) => vec![cfg.shock.ok_or_else(|| missing("shock"))?],
                _ => cfg.trajectory.as_ref().ok_or_else(|| missing("trajectory"))?.beliefs.clone(),
            };
            let s = cfg.initial_market_state()?;
            let scan = cfg.scan_or(ScanSettings::default());
            let steps = run_trajectory(&s, &beliefs, &cfg.params, cfg.policy, &scan)?;
            write_trajectory(&mut out, &steps, cfg.leverage_basis)?;
        }
        Command::SweepLine(_) => {
            let l = cfg.sweep_line.ok_or_else(|| missing("sweep_line"))?;
            let s = cfg.initial_market_state()?;
            let scan = cfg.scan_or(ScanSettings::default());
            let line = sweep_severity(&s, &l.alpha.values(), l.beta, &cfg.params, cfg.policy, &scan)?;
            write_line_csv(&mut out, &line)?;
        }
        Command::Region(_) => {
            let r = cfg.region.ok_or_else(|| missing("region"))?;
            let s = cfg.initial_market_state()?;
            let scan = cfg.scan_or(region_scan());
            let map = region_map(&s, &r.alpha.values(), &r.beta.values(), &cfg.params, cfg.policy, &scan)?;
            write_region_csv(&mut out, &map)?;
        }
    }
    Ok((out, code))
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Verify(c)
        | Command::DemandCurve(c)
        | Command::Shock(c)
        | Command::Trajectory(c)
        | Command::SweepLine(c)
        | Command::Region(c)
        | Command::Calibrate(c) => c,
    }
}

fn run_parsed(cli: &Cli) -> Result<i32, Failure> {
    let common = common(&cli.command);
    let cfg = load(common)?;
    let work = || execute(&cli.command, &cfg);
    let (bytes, code) = match common.threads {
        Some(0) => return Err(Failure::Config("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    match &common.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(code)
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run_parsed(&cli) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            EXIT_NUMERICAL
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["inside-money", "verify"]), EXIT_CONFIG);
        assert_eq!(run(["inside-money", "frobnicate", "--config", "x.json"]), EXIT_CONFIG);
        assert_eq!(run(["inside-money", "verify", "--config", "/nonexistent/x.json"]), EXIT_CONFIG);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["inside-money", "--help"]), EXIT_OK);
    }
}
