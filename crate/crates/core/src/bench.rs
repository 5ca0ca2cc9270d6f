//! Randomized stress suites.
//!
//! Each trial draws a primitive state, maps it forward to conservative
//! variables, recovers it, and measures `|v' - v|`. Trial `i` of a suite
//! seeded with `seed` uses its own generator seeded from `(seed, i)`, so the
//! statistics do not depend on scheduling or thread count.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eos::Eos;
use crate::error::{Error, Result};
use crate::recovery::{recover, InitialKind, SolverConfig, SolverMode, Status};
use crate::state::{is_admissible, norm, prim_to_cons, Primitive};

/// Name of the random number generator, reported alongside results.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha), per-trial seed = splitmix64(seed + splitmix64(trial))";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    /// Moderate density/pressure, `|v|` up to `1 - 1e-10`, `|B|` up to ~170.
    Suite1,
    /// Low density/pressure, `0.99 <= |v| < 1`, `|B|` up to ~17.
    Suite2,
}

impl Suite {
    pub fn number(&self) -> u8 {
        match self {
            Suite::Suite1 => 1,
            Suite::Suite2 => 2,
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Suite::Suite1),
            "2" => Ok(Suite::Suite2),
            _ => Err(Error::domain("suite", format!("unknown suite `{s}` (expected 1 or 2)"))),
        }
    }
}

/// EOS used by a suite: either fixed, or a gamma law with
/// `gamma = 1 + U` drawn independently per trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EosChoice {
    GammaRandom,
    Fixed(Eos),
}

impl EosChoice {
    pub fn label(&self) -> String {
        match self {
            EosChoice::GammaRandom => "gamma-random".to_string(),
            EosChoice::Fixed(eos) => eos.label(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub eos: EosChoice,
    pub mode: SolverMode,
}

impl SuiteSpec {
    pub fn new(suite: Suite, trials: usize, seed: u64, eos: EosChoice, mode: SolverMode) -> Self {
        SuiteSpec { suite, trials, seed, eos, mode }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed.wrapping_add(splitmix64(trial))))
}

/// Uniform unit direction `u / |u|` with `u = 2(U, U, U) - (1, 1, 1)`.
fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let u: [f64; 3] = std::array::from_fn(|_| 2.0 * rng.random::<f64>() - 1.0);
        let n = norm(&u);
        if n > 0.0 {
            return u.map(|c| c / n);
        }
    }
}

/// Draws one primitive state of the given suite.
pub fn sample_primitive<R: Rng + ?Sized>(suite: Suite, rng: &mut R) -> Primitive {
    let (rho_scale, rho_floor, p_scale, p_floor, b_scale) = match suite {
        Suite::Suite1 => (1000.0, 1e-11, 1000.0, 1e-11, 100.0),
        Suite::Suite2 => (0.01, 1e-13, 0.01, 1e-13, 10.0),
    };
    let rho = rho_scale * rng.random::<f64>() + rho_floor;
    let dir = random_direction(rng);
    let speed = match suite {
        Suite::Suite1 => (1.0 - 1e-10) * rng.random::<f64>(),
        Suite::Suite2 => (0.01 - 1e-16) * rng.random::<f64>() + 0.99,
    };
    let v = dir.map(|c| speed * c);
    let p = p_scale * rng.random::<f64>() + p_floor;
    let b = std::array::from_fn(|_| 2.0 * b_scale * rng.random::<f64>() - b_scale);
    Primitive { rho, v, b, p }
}

/// `gamma = 1 + U`, redrawn in the measure-zero case `U = 0`.
pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let gamma = 1.0 + rng.random::<f64>();
        if gamma > 1.0 {
            return gamma;
        }
    }
}

/// The primitive state and EOS of trial `trial`.
pub fn draw_trial(spec: &SuiteSpec, trial: u64) -> (Primitive, Eos) {
    let mut rng = trial_rng(spec.seed, trial);
    let q = sample_primitive(spec.suite, &mut rng);
    let eos = match spec.eos {
        EosChoice::GammaRandom => Eos::GammaLaw { gamma: sample_gamma(&mut rng) },
        EosChoice::Fixed(eos) => eos,
    };
    (q, eos)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub status: Status,
    pub iterations: usize,
    /// `|v' - v|`, NaN unless converged.
    pub err_v: f64,
    /// `|rho' - rho| / rho`, NaN unless converged.
    pub err_rho: f64,
    /// `|p' - p| / p`, NaN unless converged.
    pub err_p: f64,
    pub pcp_violated: bool,
    pub initial_kind: InitialKind,
    /// Floating-point admissibility of the forward-mapped state.
    pub admissible: bool,
}

impl TrialRecord {
    pub fn is_success(&self) -> bool {
        self.status.is_success()
    }
}

/// Forward map, recovery, and error measurement for one state.
pub fn run_trial(q: &Primitive, eos: &Eos, cfg: &SolverConfig) -> TrialRecord {
    let u = match prim_to_cons(q, eos) {
        Ok(u) => u,
        Err(_) => {
            return TrialRecord {
                status: Status::InadmissibleInput,
                iterations: 0,
                err_v: f64::NAN,
                err_rho: f64::NAN,
                err_p: f64::NAN,
                pcp_violated: false,
                initial_kind: InitialKind::Other,
                admissible: false,
            }
        }
    };
    let admissible = is_admissible(&u);
    let recovery = recover(&u, eos, cfg);
    let (err_v, err_rho, err_p) = match recovery.primitive {
        Some(r) => {
            let dv: [f64; 3] = std::array::from_fn(|i| r.v[i] - q.v[i]);
            (norm(&dv), (r.rho - q.rho).abs() / q.rho, (r.p - q.p).abs() / q.p)
        }
        None => (f64::NAN, f64::NAN, f64::NAN),
    };
    TrialRecord {
        status: recovery.report.status,
        iterations: recovery.report.iterations,
        err_v,
        err_rho,
        err_p,
        pcp_violated: recovery.report.pcp_violated,
        initial_kind: recovery.report.initial_kind,
        admissible,
    }
}

/// Runs every trial of a suite; records are in trial order.
pub fn run_suite_records(spec: &SuiteSpec, cfg: &SolverConfig) -> Vec<TrialRecord> {
    let cfg = SolverConfig { mode: spec.mode, record_trace: false, ..*cfg };
    (0..spec.trials as u64)
        .into_par_iter()
        .map(|i| {
            let (q, eos) = draw_trial(spec, i);
            run_trial(&q, &eos, &cfg)
        })
        .collect()
}

/// Aggregate statistics of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteStats {
    pub solver: SolverMode,
    pub suite: u8,
    pub eos: String,
    pub trials: usize,
    pub non_pcp: usize,
    pub failures: usize,
    /// Mean/max iterations over successful trials.
    pub iter_mean: f64,
    pub iter_max: usize,
    /// Mean/max `|v' - v|` over successful trials.
    pub err_mean: f64,
    pub err_max: f64,
    pub xid_branch_rate: f64,
    /// Trials whose forward-mapped state fails the floating-point
    /// admissibility test; these are also counted as failures.
    pub inadmissible: usize,
    pub wall_time_s: f64,
}

/// Neumaier compensated sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

impl SuiteStats {
    pub const CSV_HEADER: &'static str =
        "solver,suite,eos,trials,non_pcp,failures,iter_mean,iter_max,err_mean,err_max,xid_branch_rate,wall_time_s";

    /// Aggregates records in order; the result is independent of how the
    /// records were produced.
    pub fn from_records(spec: &SuiteSpec, records: &[TrialRecord], wall_time_s: f64) -> Self {
        let mut iter_sum = CompensatedSum::default();
        let mut err_sum = CompensatedSum::default();
        let mut successes = 0usize;
        let mut iter_max = 0;
        let mut err_max = 0.0f64;
        let mut non_pcp = 0;
        let mut xid = 0;
        let mut inadmissible = 0;
        for r in records {
            non_pcp += r.pcp_violated as usize;
            xid += (r.initial_kind == InitialKind::XiD) as usize;
            inadmissible += (!r.admissible) as usize;
            if r.is_success() {
                successes += 1;
                iter_sum.add(r.iterations as f64);
                err_sum.add(r.err_v);
                iter_max = iter_max.max(r.iterations);
                err_max = err_max.max(r.err_v);
            }
        }
        let mean = |sum: &CompensatedSum| if successes > 0 { sum.total() / successes as f64 } else { 0.0 };
        SuiteStats {
            solver: spec.mode,
            suite: spec.suite.number(),
            eos: spec.eos.label(),
            trials: records.len(),
            non_pcp,
            failures: records.len() - successes,
            iter_mean: mean(&iter_sum),
            iter_max,
            err_mean: mean(&err_sum),
            err_max,
            xid_branch_rate: if records.is_empty() { 0.0 } else { xid as f64 / records.len() as f64 },
            inadmissible,
            wall_time_s,
        }
    }

    pub fn successes(&self) -> usize {
        self.trials - self.failures
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.solver.name(),
            self.suite,
            self.eos,
            self.trials,
            self.non_pcp,
            self.failures,
            fmt_f64(self.iter_mean),
            self.iter_max,
            fmt_f64(self.err_mean),
            fmt_f64(self.err_max),
            fmt_f64(self.xid_branch_rate),
            fmt_f64(self.wall_time_s)
        )
    }
}

pub fn run_suite(spec: &SuiteSpec, cfg: &SolverConfig) -> SuiteStats {
    let start = Instant::now();
    let records = run_suite_records(spec, cfg);
    SuiteStats::from_records(spec, &records, start.elapsed().as_secs_f64())
}

/// Fraction of trials on which the hybrid start takes `xi_d`.
pub fn hybrid_branch_rate(spec: &SuiteSpec, cfg: &SolverConfig) -> Result<f64> {
    if spec.mode != SolverMode::PcpHybrid {
        return Err(Error::domain("hybrid_branch_rate", "requires the pcp-hybrid solver"));
    }
    Ok(run_suite(spec, cfg).xid_branch_rate)
}

pub const TRIAL_CSV_HEADER: &str = "trial,status,iterations,err_v,err_rho,err_p,pcp_violated,initial_kind,admissible";

/// Shortest round-trip text for `x`, in exponent form outside
/// `[1e-4, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Per-trial records as CSV.
pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRIAL_CSV_HEADER);
    out.push('\n');
    for (i, r) in records.iter().enumerate() {
        let status = serde_plain_name(&r.status);
        let _ = writeln!(
            out,
            "{i},{status},{},{},{},{},{},{:?},{}",
            r.iterations,
            fmt_f64(r.err_v),
            fmt_f64(r.err_rho),
            fmt_f64(r.err_p),
            r.pcp_violated,
            r.initial_kind,
            r.admissible
        );
    }
    out
}

fn serde_plain_name(status: &Status) -> &'static str {
    match status {
        Status::Converged => "converged",
        Status::MaxIterExceeded => "max_iter_exceeded",
        Status::NonReal => "non_real",
        Status::NonPhysical => "non_physical",
        Status::InadmissibleInput => "inadmissible_input",
    }
}
