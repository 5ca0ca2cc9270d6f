//! Recovery of primitive variables: the PCP Newton-Raphson iteration and the
//! reference solvers it is compared against.
//!
//! All solvers work on the scalar reductions of a conservative state and
//! return a [`RecoveryReport`]; solver outcomes are data, never panics.

use serde::{Deserialize, Serialize};

use crate::eos::Eos;
use crate::error::{Error, Result};
use crate::master::{self, LorentzForm};
use crate::state::{derived_scalars, is_admissible, Conserved, Primitive, Scalars};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    /// Newton-Raphson from the hybrid `xi_d` / `xi_c` initial guess.
    PcpHybrid,
    /// Newton-Raphson always started from `xi_c`.
    PcpXiC,
    /// Newton-Raphson on the naive Lorentz factor, hybrid start.
    NaiveW,
    /// Bisection on `[xi_c, 2E - B^2]`.
    Bisection,
    /// Brent's method on `[xi_c, 2E - B^2]`.
    Brent,
}

impl SolverMode {
    pub const ALL: [SolverMode; 5] = [
        SolverMode::PcpHybrid,
        SolverMode::PcpXiC,
        SolverMode::NaiveW,
        SolverMode::Bisection,
        SolverMode::Brent,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SolverMode::PcpHybrid => "pcp-hybrid",
            SolverMode::PcpXiC => "pcp-xi-c",
            SolverMode::NaiveW => "naive-w",
            SolverMode::Bisection => "bisection",
            SolverMode::Brent => "brent",
        }
    }

    pub fn is_pcp_newton(&self) -> bool {
        matches!(self, SolverMode::PcpHybrid | SolverMode::PcpXiC)
    }
}

impl std::str::FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::domain("solver mode", format!("unknown solver `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Absolute tolerance on `|xi_{n+1} - xi_n|`.
    pub tol: f64,
    pub max_iter: usize,
    /// The iteration stops once the residual has changed sign more than
    /// this many times.
    pub osc_limit: usize,
    pub mode: SolverMode,
    /// Record `(xi_n, F(xi_n))` for every evaluated iterate.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-14,
            max_iter: 500,
            osc_limit: 3,
            mode: SolverMode::PcpHybrid,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn with_mode(mode: SolverMode) -> Self {
        SolverConfig { mode, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::domain("SolverConfig", format!("tol = {} must be positive", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::domain("SolverConfig", "max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIterExceeded,
    /// An iterate left the domain where the Lorentz factor is real, or the
    /// iteration produced a non-finite value.
    NonReal,
    /// The final extraction violates `rho > 0`, `p > 0`, `|v| < 1`.
    NonPhysical,
    InadmissibleInput,
}

impl Status {
    pub fn is_success(&self) -> bool {
        *self == Status::Converged
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialKind {
    XiD,
    XiC,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub xi: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub status: Status,
    pub xi: f64,
    /// Newton steps taken before the stopping test fired. The final pass,
    /// whose step size or oscillation count ends the loop, is not counted.
    pub iterations: usize,
    pub osc_count: usize,
    /// True if any evaluated iterate fell outside the physical domain.
    pub pcp_violated: bool,
    pub initial_kind: InitialKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TracePoint>>,
}

impl RecoveryReport {
    fn aborted(status: Status, initial_kind: InitialKind) -> Self {
        RecoveryReport {
            status,
            xi: f64::NAN,
            iterations: 0,
            osc_count: 0,
            pcp_violated: false,
            initial_kind,
            trace: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialGuess {
    pub xi0: f64,
    pub kind: InitialKind,
    /// `F(xi0)` when it was needed to choose the guess.
    pub f_at_xi0: Option<f64>,
}

/// Starting point of the iteration.
///
/// The hybrid takes `xi_d` whenever `F(xi_d) <= 0` (then `xi_d <= xi*`) and
/// otherwise falls back to `xi_c`. Bracketing modes start from `xi_c`.
pub fn initial_guess(s: &Scalars, eos: &Eos, mode: SolverMode) -> Result<InitialGuess> {
    let from_xi_c = |kind| master::xi_c(s).map(|xi0| InitialGuess { xi0, kind, f_at_xi0: None });
    match mode {
        SolverMode::PcpHybrid | SolverMode::NaiveW => {
            let xi_d = master::xi_d(s)?;
            match master::master_f(xi_d, s, eos) {
                Some(f) if f <= 0.0 => Ok(InitialGuess { xi0: xi_d, kind: InitialKind::XiD, f_at_xi0: Some(f) }),
                _ => from_xi_c(InitialKind::XiC),
            }
        }
        SolverMode::PcpXiC => from_xi_c(InitialKind::XiC),
        SolverMode::Bisection | SolverMode::Brent => from_xi_c(InitialKind::Other),
    }
}

/// Runs the configured solver on the reductions of an admissible state.
pub fn solve(s: &Scalars, eos: &Eos, cfg: &SolverConfig) -> RecoveryReport {
    match cfg.mode {
        SolverMode::PcpHybrid | SolverMode::PcpXiC => newton(s, eos, cfg, LorentzForm::Stable),
        SolverMode::NaiveW => newton(s, eos, cfg, LorentzForm::Naive),
        SolverMode::Bisection => bracketed(s, eos, cfg, bisection),
        SolverMode::Brent => bracketed(s, eos, cfg, brent),
    }
}

fn newton(s: &Scalars, eos: &Eos, cfg: &SolverConfig, form: LorentzForm) -> RecoveryReport {
    let guess = match initial_guess(s, eos, cfg.mode) {
        Ok(g) => g,
        Err(_) => return RecoveryReport::aborted(Status::InadmissibleInput, InitialKind::Other),
    };
    // The cached residual is only valid for the form it was computed with.
    let mut cached = if form == LorentzForm::Stable { guess.f_at_xi0 } else { None };

    let mut trace = cfg.record_trace.then(Vec::new);
    let mut pcp_violated = false;
    let mut osc_count = 0;
    let mut f_prev = 0.0;
    let mut xi = guess.xi0;
    let mut iterations = 0;
    let mut slope = f64::NAN;

    let status = loop {
        pcp_violated |= !master::in_physical_domain(xi, s);
        let Some((_, f, df)) = master::eval_newton(xi, s, eos, form, cached.take()) else {
            break Status::NonReal;
        };
        if let Some(t) = trace.as_mut() {
            t.push(TracePoint { xi, f });
        }

        let previous = xi;
        slope = df;
        xi -= f / df;
        if f_prev * f < 0.0 {
            osc_count += 1;
        }
        f_prev = f;

        if !xi.is_finite() {
            break Status::NonReal;
        }
        if (previous - xi).abs() <= cfg.tol {
            break Status::Converged;
        }
        if osc_count > cfg.osc_limit {
            // Oscillating at round-off level around the root counts as
            // converged; anything else does not.
            break match master::master_f_with(xi, s, eos, form) {
                None => Status::NonReal,
                Some(f) if f.abs() <= cfg.tol.sqrt() * s.e.max(1.0) => Status::Converged,
                Some(_) => Status::MaxIterExceeded,
            };
        }
        iterations += 1;
        if iterations >= cfg.max_iter {
            break Status::MaxIterExceeded;
        }
    };
    if status == Status::Converged {
        if form == LorentzForm::Stable {
            xi = refine(xi, slope, s, eos);
        }
        pcp_violated |= !master::in_physical_domain(xi, s);
    }

    RecoveryReport { status, xi, iterations, osc_count, pcp_violated, initial_kind: guess.kind, trace }
}

/// One uncounted Newton correction with the compensated residual. The loop
/// stops once the plain residual is at its rounding floor; this moves the
/// root to the compensated residual's much lower floor.
fn refine(xi: f64, slope: f64, s: &Scalars, eos: &Eos) -> f64 {
    let Some(f) = master::master_f_compensated(xi, s, eos) else {
        return xi;
    };
    let refined = xi - f / slope;
    if refined.is_finite() && master::in_physical_domain(refined, s) {
        refined
    } else {
        xi
    }
}

/// The bracket `[xi_c, 2E - B^2]` with the residuals at its ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// `F(lo) < 0 < F(hi)`.
    pub fn has_sign_change(&self) -> bool {
        self.f_lo < 0.0 && self.f_hi > 0.0
    }
}

/// Analytic bracket of the physical root.
pub fn pcp_bracket(s: &Scalars, eos: &Eos) -> Result<Bracket> {
    let lo = master::xi_c(s)?;
    let hi = master::xi_upper(s);
    let f_lo = master::master_f_compensated(lo, s, eos).ok_or(Error::NonReal { xi: lo })?;
    let f_hi = master::master_f_compensated(hi, s, eos).ok_or(Error::NonReal { xi: hi })?;
    Ok(Bracket { lo, hi, f_lo, f_hi })
}

struct BracketRun {
    xi: f64,
    iterations: usize,
    converged: bool,
    nonreal: bool,
}

type BracketSolver = fn(&Scalars, &Eos, &SolverConfig, Bracket, &mut Vec<TracePoint>) -> BracketRun;

fn bracketed(s: &Scalars, eos: &Eos, cfg: &SolverConfig, method: BracketSolver) -> RecoveryReport {
    let bracket = match pcp_bracket(s, eos) {
        Ok(b) => b,
        Err(Error::NonReal { .. }) => return RecoveryReport::aborted(Status::NonReal, InitialKind::Other),
        Err(_) => return RecoveryReport::aborted(Status::InadmissibleInput, InitialKind::Other),
    };
    let mut points = Vec::new();
    let run = if bracket.f_lo >= 0.0 || bracket.f_hi <= 0.0 {
        // Only reachable through rounding at xi_c, where F(xi_c) ~ 0.
        BracketRun { xi: bracket.lo, iterations: 0, converged: true, nonreal: false }
    } else {
        method(s, eos, cfg, bracket, &mut points)
    };
    let status = if run.nonreal {
        Status::NonReal
    } else if run.converged {
        Status::Converged
    } else {
        Status::MaxIterExceeded
    };
    let pcp_violated = points.iter().any(|p| !master::in_physical_domain(p.xi, s))
        || (status == Status::Converged && !master::in_physical_domain(run.xi, s));
    RecoveryReport {
        status,
        xi: run.xi,
        iterations: run.iterations,
        osc_count: 0,
        pcp_violated,
        initial_kind: InitialKind::Other,
        trace: cfg.record_trace.then_some(points),
    }
}

fn bisection(s: &Scalars, eos: &Eos, cfg: &SolverConfig, b: Bracket, trace: &mut Vec<TracePoint>) -> BracketRun {
    let (mut lo, mut hi, mut f_lo, mut f_hi) = (b.lo, b.hi, b.f_lo, b.f_hi);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if hi - lo <= cfg.tol || mid <= lo || mid >= hi {
            converged = true;
            break;
        }
        iterations += 1;
        let Some(f) = master::master_f_compensated(mid, s, eos) else {
            return BracketRun { xi: mid, iterations, converged: false, nonreal: true };
        };
        trace.push(TracePoint { xi: mid, f });
        if f == 0.0 {
            return BracketRun { xi: mid, iterations, converged: true, nonreal: false };
        }
        if f < 0.0 {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    let xi = if f_lo.abs() <= f_hi.abs() { lo } else { hi };
    BracketRun { xi, iterations, converged, nonreal: false }
}

/// Brent's method (inverse quadratic interpolation, secant, bisection).
fn brent(s: &Scalars, eos: &Eos, cfg: &SolverConfig, br: Bracket, trace: &mut Vec<TracePoint>) -> BracketRun {
    let (mut a, mut b) = (br.lo, br.hi);
    let (mut fa, mut fb) = (br.f_lo, br.f_hi);
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * cfg.tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return BracketRun { xi: b, iterations, converged: true, nonreal: false };
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s_ratio = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s_ratio, 1.0 - s_ratio)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s_ratio * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s_ratio - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        iterations += 1;
        let Some(f) = master::master_f_compensated(b, s, eos) else {
            return BracketRun { xi: b, iterations, converged: false, nonreal: true };
        };
        fb = f;
        trace.push(TracePoint { xi: b, f });
    }
    BracketRun { xi: b, iterations, converged: false, nonreal: false }
}

/// Primitive variables at `xi`.
///
/// The Lorentz factor comes from the stable form of `W(xi)`, which equals
/// `1/sqrt(1 - |v|^2)` but does not cancel when `|v| -> 1`.
pub fn extract_primitives(xi: f64, u: &Conserved, eos: &Eos) -> Result<Primitive> {
    extract_with_scalars(xi, u, &derived_scalars(u), eos)
}

fn extract_with_scalars(xi: f64, u: &Conserved, s: &Scalars, eos: &Eos) -> Result<Primitive> {
    let w = master::lorentz_w_stable(xi, s)
        .ok_or_else(|| Error::NonPhysical(format!("Lorentz factor not real at xi = {xi:e}")))?;
    let denom = xi + s.b_sq;
    let shift = s.tau / xi;
    let v = std::array::from_fn(|i| (u.m[i] + shift * u.b[i]) / denom);
    let rho = s.d / w;
    let h = xi / (s.d * w);
    let p = eos.pressure_unchecked(rho, h);
    Primitive::new(rho, v, u.b, p)
}

/// A recovered state together with the solver report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recovery {
    pub primitive: Option<Primitive>,
    pub report: RecoveryReport,
}

/// Admissibility check, reduction, solve, and extraction.
pub fn recover(u: &Conserved, eos: &Eos, cfg: &SolverConfig) -> Recovery {
    if !is_admissible(u) {
        return Recovery {
            primitive: None,
            report: RecoveryReport::aborted(Status::InadmissibleInput, InitialKind::Other),
        };
    }
    recover_unchecked(u, eos, cfg)
}

/// [`recover`] without the admissibility gate.
///
/// States built from valid primitives may fail the floating-point
/// admissibility test when the margins fall below round-off (high Lorentz
/// factors, cold gas), even though a physical preimage exists.
pub fn recover_unchecked(u: &Conserved, eos: &Eos, cfg: &SolverConfig) -> Recovery {
    let s = derived_scalars(u);
    let mut report = solve(&s, eos, cfg);
    let mut primitive = None;
    if report.status == Status::Converged {
        match extract_with_scalars(report.xi, u, &s, eos) {
            Ok(q) => primitive = Some(q),
            Err(_) => report.status = Status::NonPhysical,
        }
    }
    Recovery { primitive, report }
}
