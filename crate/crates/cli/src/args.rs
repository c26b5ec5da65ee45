use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const MIN_STEPS: usize = 8;

/// Variational statics and dynamics of systems given by a JSON config.
#[derive(Debug, Parser)]
#[command(name = "varmech", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Record wall-clock time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the equilibrium under a constant force.
    Statics(StaticsArgs),
    /// Integrate the Lagrange equations and write a phase trajectory CSV.
    Simulate(SimulateArgs),
    /// Check a phase trajectory against the interval and pointwise dynamics.
    Check(CheckArgs),
    /// Tabulate the inverse Legendre map and the Hamiltonian.
    Legendre(LegendreArgs),
    /// Pair a trajectory with random displacements over a distribution.
    Pairing(PairingArgs),
}

#[derive(Debug, Args)]
pub struct StaticsArgs {
    /// System config (JSON).
    pub config: PathBuf,
    /// Applied force as comma-separated components; zero when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub force: Option<String>,
    /// Initial guess; the origin when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub config: PathBuf,
    /// Initial configuration; the origin when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Option<String>,
    /// Initial momentum; zero when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<String>,
    /// `zero`, or one expression in `t` per component, comma-separated.
    #[arg(long, default_value = "zero", allow_hyphen_values = true)]
    pub force: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: f64,
    #[arg(long, default_value_t = 512, value_parser = parse_steps)]
    pub steps: usize,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Interval,
    Dirac,
    Both,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub trajectory: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    pub mode: Mode,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random polynomial displacements for the action-principle probe.
    #[arg(long, default_value_t = 64)]
    pub probes: usize,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["grid", "points"])))]
pub struct LegendreArgs {
    pub config: PathBuf,
    /// `LO:HI:N` for every coordinate, or `QLO:QHI:NQ/PLO:PHI:NP`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// CSV with header `q0..,p0..`.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = varmech::hamiltonian::DEFAULT_COND_MAX)]
    pub cond_max: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PairingArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub trajectory: PathBuf,
    /// `interval(a,b)` or `dirac(t)`.
    #[arg(long)]
    pub dist: String,
    #[arg(long, default_value_t = 16)]
    pub probes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

fn parse_steps(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < MIN_STEPS {
        return Err(format!("at least {MIN_STEPS} steps are required, got {n}"));
    }
    Ok(n)
}
