//! Numerical checks of the structure of the master function: monotonicity,
//! the third-derivative inequality, root ordering, safe-interval membership,
//! and the shape of `F'`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bench::{draw_trial, SuiteSpec};
use crate::eos::Eos;
use crate::error::Result;
use crate::master::{self, LorentzForm};
use crate::recovery::{initial_guess, solve, InitialKind, SolverConfig, SolverMode, Status, TracePoint};
use crate::state::{derived_scalars, is_admissible, prim_to_cons, Scalars};

pub const DEFAULT_GRID_POINTS: usize = 256;

/// Relative offset of the first grid point above `xi_b`.
pub const GRID_OFFSET: f64 = 1e-6;

/// Relative tolerance of the third-derivative inequality.
pub const INEQUALITY_TOL: f64 = 1e-4;

/// Relative size of a change in `F'` that counts as a direction change.
pub const PATTERN_TOL: f64 = 1e-9;

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![hi],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut g: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
            g[0] = lo;
            g[n - 1] = hi;
            g
        }
    }
}

/// The default diagnostic grid on `(xi_b, 2E - B^2]`.
pub fn diagnostic_grid(s: &Scalars, points: usize) -> Result<Vec<f64>> {
    let (_, xi_b) = master::bracket_roots_ab(s)?;
    let lo = xi_b * (1.0 + GRID_OFFSET);
    let hi = master::xi_upper(s).max(lo);
    Ok(log_grid(lo, hi, points))
}

fn df(xi: f64, s: &Scalars, eos: &Eos) -> Option<f64> {
    master::master_df_with(xi, s, eos, LorentzForm::Stable)
}

/// `F''` and `F'''` at `xi` from central differences of `F'`, step
/// `xi * 1e-4` (shrunk to stay inside the real domain), with one Richardson
/// extrapolation each.
pub fn higher_derivatives(xi: f64, s: &Scalars, eos: &Eos) -> Option<(f64, f64)> {
    let (xi_a, _) = master::bracket_roots_ab(s).ok()?;
    higher_derivatives_above(xi, xi_a, s, eos).map(|d| (d.d2, d.d3))
}

struct Differences {
    d2: f64,
    d3: f64,
    /// Rounding error bounds of `d2` and `d3`.
    noise2: f64,
    noise3: f64,
}

fn higher_derivatives_above(xi: f64, xi_a: f64, s: &Scalars, eos: &Eos) -> Option<Differences> {
    let h = (xi * 1e-4).min(0.5 * (xi - xi_a));
    if !(h > 0.0) {
        return None;
    }
    let centre = df(xi, s, eos)?;
    let mut magnitude = centre.abs().max(1.0);
    let mut diffs = |h: f64| -> Option<(f64, f64)> {
        let (up, down) = (df(xi + h, s, eos)?, df(xi - h, s, eos)?);
        magnitude = magnitude.max(up.abs()).max(down.abs());
        Some(((up - down) / (2.0 * h), (up - 2.0 * centre + down) / (h * h)))
    };
    let (d2_h, d3_h) = diffs(h)?;
    let (d2_half, d3_half) = diffs(0.5 * h)?;
    let rounding = 256.0 * f64::EPSILON * magnitude;
    Some(Differences {
        d2: (4.0 * d2_half - d2_h) / 3.0,
        d3: (4.0 * d3_half - d3_h) / 3.0,
        noise2: rounding / h,
        noise3: rounding / (h * h),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct InequalityCheck {
    /// Points where `xi F''' + 4 F'' < -1e-4 (|xi F'''| + |4 F''|)`, beyond
    /// the rounding error of the differences.
    pub pointwise: usize,
    /// Decreases of `xi^4 F''` between consecutive grid points beyond the
    /// same relative tolerance and rounding error.
    pub monotone: usize,
    /// Points where the differences could not be formed.
    pub undefined: usize,
}

/// Third-derivative inequality `xi F''' + 4 F'' > 0` on a grid, pointwise
/// and in the equivalent form "`xi^4 F''` increases". Gamma law only.
pub fn check_crucial_inequality(s: &Scalars, gamma: f64, grid: &[f64]) -> InequalityCheck {
    let mut out = InequalityCheck::default();
    let Ok(eos) = Eos::gamma_law(gamma) else {
        out.undefined = grid.len();
        return out;
    };
    let Ok((xi_a, _)) = master::bracket_roots_ab(s) else {
        out.undefined = grid.len();
        return out;
    };
    // (xi^4 F'', tolerance, rounding bound) at the previous point
    let mut previous: Option<(f64, f64, f64)> = None;
    for &xi in grid {
        let Some(Differences { d2, d3, noise2, noise3 }) = higher_derivatives_above(xi, xi_a, s, &eos) else {
            out.undefined += 1;
            previous = None;
            continue;
        };
        let value = xi * d3 + 4.0 * d2;
        let scale = (xi * d3).abs() + (4.0 * d2).abs();
        if value < -(INEQUALITY_TOL * scale + xi * noise3 + 4.0 * noise2) {
            out.pointwise += 1;
        }
        let xi4 = xi.powi(4);
        let g = xi4 * d2;
        let tol = INEQUALITY_TOL * xi4 * scale;
        let noise = xi4 * noise2;
        if let Some((g_prev, tol_prev, noise_prev)) = previous {
            if g < g_prev - (tol.max(tol_prev) + noise + noise_prev) {
                out.monotone += 1;
            }
        }
        previous = Some((g, tol, noise));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FprimePattern {
    Monotone,
    /// Decreasing, then increasing.
    SingleInflection,
    Other,
}

/// Shape of `F'` sampled on `grid`. Changes smaller than
/// `1e-9 * max |F'|` are treated as flat.
pub fn classify_fprime_pattern(s: &Scalars, eos: &Eos, grid: &[f64]) -> FprimePattern {
    let Some(values) = grid.iter().map(|&xi| df(xi, s, eos)).collect::<Option<Vec<f64>>>() else {
        return FprimePattern::Other;
    };
    classify_sequence(&values)
}

fn classify_sequence(values: &[f64]) -> FprimePattern {
    let tol = PATTERN_TOL * values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // +1 rising, -1 falling, 0 not yet known; `extreme` is the running
    // extremum in the current direction.
    let mut direction = 0i8;
    let mut turns = Vec::new();
    let Some(&first) = values.first() else {
        return FprimePattern::Monotone;
    };
    let mut extreme = first;
    for &v in &values[1..] {
        match direction {
            0 => {
                if (v - extreme).abs() > tol {
                    direction = if v > extreme { 1 } else { -1 };
                    extreme = v;
                }
            }
            1 if v > extreme => extreme = v,
            -1 if v < extreme => extreme = v,
            d => {
                if (v - extreme).abs() > tol {
                    turns.push(-d);
                    direction = -d;
                    extreme = v;
                }
            }
        }
    }
    match turns.as_slice() {
        [] => FprimePattern::Monotone,
        [1] => FprimePattern::SingleInflection,
        _ => FprimePattern::Other,
    }
}

/// The four characteristic points, ordered `xi_d > xi_c > xi_b > xi_a` for
/// admissible states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootOrdering {
    pub xi_a: f64,
    pub xi_b: f64,
    pub xi_c: f64,
    pub xi_d: f64,
    pub ok: bool,
}

pub fn check_root_ordering(s: &Scalars) -> Result<RootOrdering> {
    let (xi_a, xi_b) = master::bracket_roots_ab(s)?;
    let xi_c = master::xi_c(s)?;
    let xi_d = master::xi_d(s)?;
    let ok = xi_d > xi_c && xi_c > xi_b && xi_b > xi_a;
    Ok(RootOrdering { xi_a, xi_b, xi_c, xi_d, ok })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SafeInterval {
    pub xi_b: f64,
    pub xi_c: f64,
    /// `xi_d`, when the hybrid start takes it.
    pub xi_d: Option<f64>,
    pub xi_star: f64,
    pub ok: bool,
}

/// `xi_b < xi_c <= xi*`, and `xi_b < xi_d <= xi*` when the hybrid takes
/// `xi_d`, with `xi*` the root found by the hybrid solver.
pub fn check_safe_interval(s: &Scalars, eos: &Eos, cfg: &SolverConfig) -> Result<SafeInterval> {
    let (_, xi_b) = master::bracket_roots_ab(s)?;
    let xi_c = master::xi_c(s)?;
    let guess = initial_guess(s, eos, SolverMode::PcpHybrid)?;
    let xi_d = (guess.kind == InitialKind::XiD).then_some(guess.xi0);
    let report = solve(s, eos, &SolverConfig { mode: SolverMode::PcpHybrid, record_trace: false, ..*cfg });
    let xi_star = report.xi;
    let inside = |x: f64| xi_b < x && x <= xi_star;
    let ok = report.status == Status::Converged && inside(xi_c) && xi_d.is_none_or(inside);
    Ok(SafeInterval { xi_b, xi_c, xi_d, xi_star, ok })
}

/// `F` non-decreasing along the grid; returns the number of strict decreases
/// and non-real values.
pub fn check_monotonicity(s: &Scalars, eos: &Eos, grid: &[f64]) -> usize {
    let mut violations = 0;
    let mut previous: Option<f64> = None;
    for &xi in grid {
        match master::master_f(xi, s, eos) {
            Some(f) => {
                if previous.is_some_and(|p| f < p) {
                    violations += 1;
                }
                previous = Some(f);
            }
            None => {
                violations += 1;
                previous = None;
            }
        }
    }
    violations
}

/// `n` points on `[lo, hi]`: `lo` itself, then offsets from `lo` growing
/// geometrically from `rel_min * |lo|` to `hi - lo`. Resolves the
/// neighbourhood of `lo` and still reaches `hi`.
pub fn clustered_grid(lo: f64, hi: f64, n: usize, rel_min: f64) -> Vec<f64> {
    if n < 2 || !(hi > lo) {
        return log_grid(lo, hi, n.min(1));
    }
    let mut g = vec![lo];
    g.extend(log_grid(rel_min * lo.abs().max(f64::MIN_POSITIVE), hi - lo, n - 1).into_iter().map(|d| lo + d));
    g[n - 1] = hi;
    g
}

/// One row of a master-function profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub xi: f64,
    pub f_stable: Option<f64>,
    pub f_naive: Option<f64>,
    pub w_stable: Option<f64>,
    pub w_naive: Option<f64>,
    /// Sign of `f_b`, from the sign-equivalent stable test.
    pub fb_sign: i8,
}

pub fn profile(s: &Scalars, eos: &Eos, grid: &[f64]) -> Vec<ProfileRow> {
    grid.iter()
        .map(|&xi| ProfileRow {
            xi,
            f_stable: master::master_f(xi, s, eos),
            f_naive: master::master_f_naive(xi, s, eos),
            w_stable: master::lorentz_w_stable(xi, s),
            w_naive: master::lorentz_w_naive(xi, s),
            fb_sign: if master::in_physical_domain(xi, s) { 1 } else { -1 },
        })
        .collect()
}

/// Decreases and non-real values of `F` along a grid, per Lorentz form.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RoundoffContrast {
    pub stable_decreases: usize,
    pub stable_nonreal: usize,
    pub naive_decreases: usize,
    pub naive_nonreal: usize,
}

impl RoundoffContrast {
    /// Stable profile clean, naive profile not.
    pub fn shows_contrast(&self) -> bool {
        self.stable_decreases == 0 && self.stable_nonreal == 0 && self.naive_decreases + self.naive_nonreal > 0
    }
}

pub fn roundoff_contrast(s: &Scalars, eos: &Eos, grid: &[f64]) -> RoundoffContrast {
    let count = |form: LorentzForm| {
        let (mut decreases, mut nonreal) = (0, 0);
        let mut previous: Option<f64> = None;
        for &xi in grid {
            match master::master_f_with(xi, s, eos, form) {
                Some(f) => {
                    decreases += previous.is_some_and(|p| f < p) as usize;
                    previous = Some(f);
                }
                None => nonreal += 1,
            }
        }
        (decreases, nonreal)
    };
    let (stable_decreases, stable_nonreal) = count(LorentzForm::Stable);
    let (naive_decreases, naive_nonreal) = count(LorentzForm::Naive);
    RoundoffContrast { stable_decreases, stable_nonreal, naive_decreases, naive_nonreal }
}

/// Ratios `e_{n+1} / e_n^2` of consecutive errors `e_n = |xi_n - xi_final|`
/// over the last three iterates before convergence. Pairs whose errors are
/// at or below `floor` are left out, since round-off dominates there.
/// `None` for traces shorter than four points.
pub fn convergence_ratios(trace: &[TracePoint], xi_final: f64, floor: f64) -> Option<Vec<f64>> {
    if trace.len() < 4 {
        return None;
    }
    let errors: Vec<f64> = trace.iter().map(|t| (t.xi - xi_final).abs()).collect();
    // The last trace point is the converged iterate itself.
    let tail = &errors[errors.len().saturating_sub(4)..errors.len() - 1];
    Some(
        tail.windows(2)
            .filter(|w| w[0] > floor && w[1] > floor)
            .map(|w| w[1] / (w[0] * w[0]))
            .collect(),
    )
}

/// Asymptotic constant `|F''| / (2 F')` at the root.
pub fn quadratic_constant(xi: f64, s: &Scalars, eos: &Eos) -> Option<f64> {
    let (d2, _) = higher_derivatives(xi, s, eos)?;
    Some(d2.abs() / (2.0 * df(xi, s, eos)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerifyOptions {
    pub grid_points: usize,
    pub inequality: bool,
    pub patterns: bool,
    pub monotonicity: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { grid_points: DEFAULT_GRID_POINTS, inequality: true, patterns: true, monotonicity: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PatternCounts {
    pub monotone: usize,
    pub single_inflection: usize,
    pub other: usize,
}

impl PatternCounts {
    fn add(&mut self, p: FprimePattern) {
        match p {
            FprimePattern::Monotone => self.monotone += 1,
            FprimePattern::SingleInflection => self.single_inflection += 1,
            FprimePattern::Other => self.other += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ViolationExample {
    pub trial: u64,
    pub check: &'static str,
    pub eos: Eos,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub states: usize,
    /// Draws rejected by the floating-point admissibility test.
    pub skipped: usize,
    /// Grid points violating `xi F''' + 4 F'' > 0` (gamma law only).
    pub inequality_violations: usize,
    /// Decreases of `xi^4 F''` along the grid (gamma law only).
    pub inequality_monotone_violations: usize,
    /// Grid points where `F''`, `F'''` could not be formed.
    pub inequality_undefined: usize,
    /// Decreases or non-real values of `F` along the grid.
    pub monotonicity_violations: usize,
    pub ordering_violations: usize,
    pub safe_interval_violations: usize,
    /// States where a check could not run (bound or cubic errors).
    pub errors: usize,
    pub fprime_pattern: PatternCounts,
    /// First few offending trials.
    pub examples: Vec<ViolationExample>,
}

impl TheoryReport {
    pub fn total_violations(&self) -> usize {
        self.inequality_violations
            + self.inequality_monotone_violations
            + self.monotonicity_violations
            + self.ordering_violations
            + self.safe_interval_violations
            + self.errors
            + self.fprime_pattern.other
    }

    pub fn is_clean(&self) -> bool {
        self.total_violations() == 0
    }
}

#[derive(Default)]
struct StateOutcome {
    skipped: bool,
    errors: usize,
    inequality: InequalityCheck,
    monotonicity: usize,
    ordering: bool,
    safe: bool,
    pattern: Option<FprimePattern>,
    eos: Option<Eos>,
}

impl StateOutcome {
    fn failed_checks(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.errors > 0 {
            out.push("error");
        }
        if self.inequality.pointwise > 0 {
            out.push("inequality");
        }
        if self.inequality.monotone > 0 {
            out.push("inequality_monotone");
        }
        if self.monotonicity > 0 {
            out.push("monotonicity");
        }
        if !self.ordering {
            out.push("ordering");
        }
        if !self.safe {
            out.push("safe_interval");
        }
        if self.pattern == Some(FprimePattern::Other) {
            out.push("fprime_pattern");
        }
        out
    }
}

fn verify_state(spec: &SuiteSpec, trial: u64, cfg: &SolverConfig, opts: &VerifyOptions) -> StateOutcome {
    let (q, eos) = draw_trial(spec, trial);
    let Ok(u) = prim_to_cons(&q, &eos) else {
        return StateOutcome { skipped: true, ..Default::default() };
    };
    if !is_admissible(&u) {
        return StateOutcome { skipped: true, ..Default::default() };
    }
    let s = derived_scalars(&u);
    let mut out = StateOutcome { eos: Some(eos), ordering: true, safe: true, ..Default::default() };

    match check_root_ordering(&s) {
        Ok(r) => out.ordering = r.ok,
        Err(_) => out.errors += 1,
    }
    match check_safe_interval(&s, &eos, cfg) {
        Ok(r) => out.safe = r.ok,
        Err(_) => out.errors += 1,
    }
    if opts.inequality || opts.patterns || opts.monotonicity {
        let Ok(grid) = diagnostic_grid(&s, opts.grid_points) else {
            out.errors += 1;
            return out;
        };
        if opts.inequality {
            if let Eos::GammaLaw { gamma } = eos {
                out.inequality = check_crucial_inequality(&s, gamma, &grid);
            }
        }
        if opts.patterns {
            out.pattern = Some(classify_fprime_pattern(&s, &eos, &grid));
        }
        if opts.monotonicity {
            out.monotonicity = check_monotonicity(&s, &eos, &grid);
        }
    }
    out
}

const MAX_EXAMPLES: usize = 10;

/// Runs every enabled check on each admissible draw of a suite.
pub fn verify_suite(spec: &SuiteSpec, cfg: &SolverConfig, opts: &VerifyOptions) -> TheoryReport {
    let outcomes: Vec<StateOutcome> =
        (0..spec.trials as u64).into_par_iter().map(|i| verify_state(spec, i, cfg, opts)).collect();
    let mut report = TheoryReport {
        states: 0,
        skipped: 0,
        inequality_violations: 0,
        inequality_monotone_violations: 0,
        inequality_undefined: 0,
        monotonicity_violations: 0,
        ordering_violations: 0,
        safe_interval_violations: 0,
        errors: 0,
        fprime_pattern: PatternCounts::default(),
        examples: Vec::new(),
    };
    for (trial, o) in outcomes.iter().enumerate() {
        if o.skipped {
            report.skipped += 1;
            continue;
        }
        report.states += 1;
        report.errors += o.errors;
        report.inequality_violations += o.inequality.pointwise;
        report.inequality_monotone_violations += o.inequality.monotone;
        report.inequality_undefined += o.inequality.undefined;
        report.monotonicity_violations += o.monotonicity;
        report.ordering_violations += (!o.ordering) as usize;
        report.safe_interval_violations += (!o.safe) as usize;
        if let Some(p) = o.pattern {
            report.fprime_pattern.add(p);
        }
        for check in o.failed_checks() {
            if report.examples.len() < MAX_EXAMPLES {
                report.examples.push(ViolationExample { trial: trial as u64, check, eos: o.eos.unwrap() });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Conserved;

    fn static_mag() -> Scalars {
        derived_scalars(&Conserved::new(1.0, [0.0; 3], [1.0, 0.0, 0.0], 2.5))
    }

    fn gamma2() -> Eos {
        Eos::gamma_law(2.0).unwrap()
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1.0, 1000.0, 4);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[3], 1000.0);
        assert!((g[1] - 10.0).abs() < 1e-12 && (g[2] - 100.0).abs() < 1e-10);
    }

    #[test]
    fn linear_master_function_has_flat_derivative() {
        let s = static_mag();
        let grid = diagnostic_grid(&s, 1000).unwrap();
        assert_eq!(classify_fprime_pattern(&s, &gamma2(), &grid), FprimePattern::Monotone);
        let (d2, d3) = higher_derivatives(2.0, &s, &gamma2()).unwrap();
        assert!(d2.abs() < 1e-6 && d3.abs() < 1e-2);
        let c = check_crucial_inequality(&s, 2.0, &grid);
        assert_eq!(c, InequalityCheck::default());
    }

    #[test]
    fn finite_differences_match_polynomial() {
        // W = 1 and B = 0 make F'(xi) = 1 - gamma0 exactly constant, so probe
        // the scheme on a moving hydro state against a fine-step oracle.
        let s = derived_scalars(&Conserved::new(1.0, [1.0, 0.5, 0.0], [0.0; 3], 3.0));
        let eos = Eos::gamma_law(5.0 / 3.0).unwrap();
        let xi = 3.5;
        let (d2, _) = higher_derivatives(xi, &s, &eos).unwrap();
        let h = 1e-3;
        let f = |x: f64| master::master_f(x, &s, &eos).unwrap();
        let oracle = (f(xi + h) - 2.0 * f(xi) + f(xi - h)) / (h * h);
        assert!((d2 - oracle).abs() < 1e-5 * oracle.abs().max(1.0), "{d2} {oracle}");
    }

    #[test]
    fn sequence_classification() {
        assert_eq!(classify_sequence(&[1.0, 2.0, 3.0]), FprimePattern::Monotone);
        assert_eq!(classify_sequence(&[3.0, 2.0, 1.0, 1.5, 2.0]), FprimePattern::SingleInflection);
        assert_eq!(classify_sequence(&[1.0, 2.0, 1.0]), FprimePattern::Other);
        assert_eq!(classify_sequence(&[3.0, 2.0, 3.0, 2.0]), FprimePattern::Other);
        // Sub-tolerance jitter on a plateau is ignored.
        assert_eq!(classify_sequence(&[1.0, 1.0 + 1e-12, 1.0, 1.0 + 1e-12, 2.0]), FprimePattern::Monotone);
    }

    #[test]
    fn ordering_of_static_states() {
        let r = check_root_ordering(&static_mag()).unwrap();
        assert!(r.ok);
        assert!((r.xi_d - 2.414).abs() < 1e-3 && (r.xi_c - 1.678).abs() < 1e-3);
        assert!((r.xi_b - 1.0).abs() < 1e-12 && r.xi_a == 0.0);

        let s = derived_scalars(&Conserved::new(1.0, [0.0; 3], [0.0; 3], 2.0));
        let r = check_root_ordering(&s).unwrap();
        assert!(r.ok);
        assert!((r.xi_d - 2.535).abs() < 1e-3);
        assert_eq!(r.xi_c, 2.0);
    }

    #[test]
    fn safe_interval_of_static_states() {
        let r = check_safe_interval(&static_mag(), &gamma2(), &SolverConfig::default()).unwrap();
        assert!(r.ok);
        assert!((r.xi_star - 3.0).abs() < 1e-14);

        let s = derived_scalars(&Conserved::new(1.0, [0.0; 3], [0.0; 3], 2.0));
        let r = check_safe_interval(&s, &gamma2(), &SolverConfig::default()).unwrap();
        assert!(r.ok && r.xi_c == 2.0);
    }

    #[test]
    fn clustered_grid_shape() {
        let g = clustered_grid(10.0, 1010.0, 5, 1e-3);
        assert_eq!(g.len(), 5);
        assert_eq!((g[0], g[4]), (10.0, 1010.0));
        assert!((g[1] - 10.01).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn static_profile_is_linear() {
        let s = static_mag();
        let rows = profile(&s, &gamma2(), &[2.0, 3.0, 4.0]);
        assert!((rows[1].f_stable.unwrap()).abs() < 1e-15);
        assert_eq!(rows[0].f_stable, rows[0].f_naive);
        assert!(rows.iter().all(|r| r.fb_sign == 1 && r.w_stable == Some(1.0)));
        let c = roundoff_contrast(&s, &gamma2(), &log_grid(1.5, 100.0, 64));
        assert_eq!(c, RoundoffContrast::default());
        assert!(!c.shows_contrast());
    }

    #[test]
    fn ratios_need_four_points() {
        let t: Vec<TracePoint> = [2.0, 1.5].iter().map(|&xi| TracePoint { xi, f: 0.0 }).collect();
        assert!(convergence_ratios(&t, 1.0, 0.0).is_none());
        let t: Vec<TracePoint> =
            [1.1, 1.01, 1.0001, 1.0].iter().map(|&xi| TracePoint { xi, f: 0.0 }).collect();
        let r = convergence_ratios(&t, 1.0, 0.0).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|&c| (c - 1.0).abs() < 1e-6));
    }
}
