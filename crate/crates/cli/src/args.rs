use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcp_recovery::bench::{EosChoice, Suite};
use pcp_recovery::{Eos, SolverConfig, SolverMode};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "pcp-nr",
    version,
    about = "Physical-constraint-preserving recovery of primitive variables for relativistic MHD",
    long_about = "Recovers (rho, v, B, p) from (D, m, B, E) by a Newton-Raphson iteration on \
                  the master function F(xi), xi = rho h W^2, started from an initial guess that \
                  keeps every iterate physical. Also runs randomized stress suites, prints \
                  master-function profiles, and checks the structural properties of F numerically.\n\n\
                  Exit codes: 0 success, 1 invalid input or arguments, 2 solver failure (recover), \
                  3 verification violation (verify)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover primitives from one state given as JSON.
    ///
    /// The input holds either conservative variables {"D", "m", "B", "E"} or
    /// primitive variables {"rho", "v", "B", "p"}; a primitive input is first
    /// mapped forward with the selected equation of state. Prints a JSON report.
    Recover(RecoverArgs),
    /// Run a randomized stress suite and print one CSV row of statistics.
    Bench(BenchArgs),
    /// Tabulate F(xi) and W(xi) in stable and naive form along a grid (CSV).
    Profile(ProfileArgs),
    /// Check monotonicity of F, root ordering, the safe interval and the
    /// shape of F' on randomly drawn states (JSON report).
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EosKind {
    /// Ideal gas h = 1 + gamma p / ((gamma - 1) rho); needs --gamma.
    Gamma,
    /// Mathews (Taub-Mathews) enthalpy.
    Mathews,
    /// Ryu-Chattopadhyay enthalpy.
    Rc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteEosKind {
    /// Ideal gas with gamma drawn uniformly from (1, 2) per trial.
    GammaRandom,
    Gamma,
    Mathews,
    Rc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::One => Suite::Suite1,
            SuiteArg::Two => Suite::Suite2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Uniform,
    /// Geometric spacing in xi.
    Log,
    /// Geometric spacing of xi - xi_min, resolving the lower end.
    Clustered,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Root finder.
    #[arg(long, default_value = "pcp-hybrid", value_parser = parse_solver)]
    pub solver: SolverMode,
    /// Absolute tolerance on the Newton step |xi_{n+1} - xi_n|.
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    /// Iteration cap.
    #[arg(long = "max-iter", default_value_t = 500)]
    pub max_iter: usize,
}

impl SolverArgs {
    pub fn config(&self, record_trace: bool) -> Result<SolverConfig, CliError> {
        let cfg = SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            mode: self.solver,
            record_trace,
            ..Default::default()
        };
        cfg.validate().map_err(CliError::validation)?;
        Ok(cfg)
    }
}

fn parse_solver(s: &str) -> Result<SolverMode, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = SolverMode::ALL.iter().map(|m| m.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// JSON file with the state; `-` reads standard input.
    #[arg(long)]
    pub input: PathBuf,
    /// Equation of state. Defaults to the ideal gas when --gamma is given.
    #[arg(long, value_enum)]
    pub eos: Option<EosKind>,
    /// Adiabatic index of the ideal gas, in (1, 2].
    #[arg(long)]
    pub gamma: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Include every iterate (xi_n, F(xi_n)) in the report.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "gamma-random")]
    pub eos: SuiteEosKind,
    /// Adiabatic index for --eos gamma.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the CSV here instead of standard output. Run metadata, including
    /// the random generator, goes to `<out>.meta.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write one CSV row per trial to this file.
    #[arg(long = "per-trial")]
    pub per_trial: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Relativistic mass density D.
    #[arg(long = "D", allow_negative_numbers = true)]
    pub d: f64,
    /// Total energy density E.
    #[arg(long = "E", allow_negative_numbers = true)]
    pub e: f64,
    /// Squared momentum density |m|^2.
    #[arg(long = "m2", allow_negative_numbers = true)]
    pub m2: f64,
    /// Magnetic field magnitude |B|.
    #[arg(long = "B", allow_negative_numbers = true)]
    pub b: f64,
    /// Projection m . B.
    #[arg(long = "tau", allow_negative_numbers = true)]
    pub tau: f64,
    #[arg(long, value_enum)]
    pub eos: Option<EosKind>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
    /// Lower end of the grid; defaults to the cubic root xi_c.
    #[arg(long = "xi-min")]
    pub xi_min: Option<f64>,
    /// Upper end of the grid; defaults to 2E - B^2.
    #[arg(long = "xi-max")]
    pub xi_max: Option<f64>,
    #[arg(long, value_enum, default_value = "uniform")]
    pub spacing: Spacing,
    /// Smallest offset from xi-min, relative to xi-min, for clustered spacing.
    #[arg(long = "rel-min", default_value_t = 1e-6)]
    pub rel_min: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "gamma-random")]
    pub eos: SuiteEosKind,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Grid points per state for the shape checks.
    #[arg(long = "grid-points", default_value_t = 256)]
    pub grid_points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn resolve_eos(eos: Option<EosKind>, gamma: Option<f64>) -> Result<Eos, CliError> {
    match (eos, gamma) {
        (None | Some(EosKind::Gamma), Some(g)) => Eos::gamma_law(g).map_err(CliError::validation),
        (Some(EosKind::Gamma), None) => Err(CliError::msg("--eos gamma requires --gamma")),
        (None, None) => Err(CliError::msg("specify --eos, or --gamma for the ideal gas")),
        (Some(_), Some(_)) => Err(CliError::msg("--gamma is only valid with --eos gamma")),
        (Some(EosKind::Mathews), None) => Ok(Eos::Mathews),
        (Some(EosKind::Rc), None) => Ok(Eos::RyuChattopadhyay),
    }
}

pub fn resolve_suite_eos(eos: SuiteEosKind, gamma: Option<f64>) -> Result<EosChoice, CliError> {
    let fixed = match eos {
        SuiteEosKind::GammaRandom if gamma.is_some() => {
            return Err(CliError::msg("--gamma is only valid with --eos gamma"));
        }
        SuiteEosKind::GammaRandom => return Ok(EosChoice::GammaRandom),
        SuiteEosKind::Gamma => EosKind::Gamma,
        SuiteEosKind::Mathews => EosKind::Mathews,
        SuiteEosKind::Rc => EosKind::Rc,
    };
    resolve_eos(Some(fixed), gamma).map(EosChoice::Fixed)
}
