//! Property tests. The oracle is always a known primitive state: the
//! forward map gives `U` and the exact root `xi* = rho h W^2`.

use pcp_recovery::bench::{self, EosChoice, Suite, SuiteSpec};
use pcp_recovery::diagnostics::{self, check_root_ordering, check_safe_interval};
use pcp_recovery::master::{self, LorentzForm};
use pcp_recovery::recovery::{initial_guess, pcp_bracket, solve, InitialKind};
use pcp_recovery::state::{admissibility_functions, derived_scalars, is_admissible, norm, prim_to_cons};
use pcp_recovery::{recover, Eos, Primitive, Scalars, SolverConfig, SolverMode, Status};
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.log10()..hi.log10()).prop_map(|e| 10f64.powf(e))
}

fn eos_strategy() -> impl Strategy<Value = Eos> {
    prop_oneof![
        (1.01f64..=2.0).prop_map(|g| Eos::GammaLaw { gamma: g }),
        Just(Eos::Mathews),
        Just(Eos::RyuChattopadhyay),
    ]
}

fn direction() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("nonzero", |u| norm(u) > 1e-3)
        .prop_map(|u| {
            let n = norm(&u);
            u.map(|c| c / n)
        })
}

/// Primitive states with `W <= ~7` and moderate dynamic range.
fn primitive() -> impl Strategy<Value = Primitive> {
    (
        log_uniform(1e-3, 1e3),
        direction(),
        0.0f64..0.99,
        prop::array::uniform3(-10.0f64..10.0),
        log_uniform(1e-3, 1e3),
    )
        .prop_map(|(rho, dir, speed, b, p)| Primitive { rho, v: dir.map(|c| speed * c), b, p })
}

fn xi_exact(q: &Primitive, eos: &Eos) -> f64 {
    let w = q.lorentz_factor();
    q.rho * eos.enthalpy(q.rho, q.p).unwrap() * w * w
}

/// Root error allowed by the rounding of `U`: the terms of `F` are of size
/// `xi + E + B^2`, and a residual perturbation moves the root by that over `F'`.
fn xi_tol(xi: f64, s: &Scalars, eos: &Eos) -> f64 {
    1e-13 * (xi + s.e + s.b_sq) / master::master_df(xi, s, eos).unwrap()
}

/// `|d ln W / d xi|` by central differences.
fn log_w_slope(xi: f64, s: &Scalars) -> f64 {
    let h = 1e-6 * xi;
    let w = |x: f64| master::lorentz_w_stable(x, s).unwrap().ln();
    ((w(xi + h) - w(xi - h)) / (2.0 * h)).abs()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn eos_round_trip_and_monotone(eos in eos_strategy(), rho in log_uniform(1e-6, 1e6), p in log_uniform(1e-6, 1e6)) {
        let h = eos.enthalpy(rho, p).unwrap();
        prop_assert!(h > 1.0);
        let back = eos.pressure_from_enthalpy(rho, h).unwrap();
        // h - 1 carries the information about p; its rounding bounds the round trip.
        let cond = h / (h - 1.0);
        prop_assert!(rel(back, p) <= 1e-13 * cond, "p {p} back {back}");
        let (dh_drho, dh_dp) = eos.enthalpy_partials(rho, p).unwrap();
        prop_assert!(dh_dp > 0.0 && dh_drho < 0.0);
        prop_assert!(eos.enthalpy(rho, p * 1.01).unwrap() > h);
    }

    #[test]
    fn reductions_are_consistent(q in primitive(), eos in eos_strategy()) {
        let u = prim_to_cons(&q, &eos).unwrap();
        let s = derived_scalars(&u);
        prop_assert!(s.beta1 >= 0.0 && s.beta2 >= 0.0);
        prop_assert!((s.beta1 + s.beta2 - s.m_sq).abs() <= 1e-15 * s.m_sq);
        prop_assert_eq!(s.alpha1, s.b_sq - s.e);
        prop_assert_eq!(s.alpha2, s.b_sq - s.m);
    }

    #[test]
    fn forward_map_is_admissible(q in primitive(), eos in eos_strategy()) {
        let u = prim_to_cons(&q, &eos).unwrap();
        prop_assert!(is_admissible(&u));
        let a = admissibility_functions(&u).unwrap();
        prop_assert!(a.phi > 0.0 && a.psi > 0.0);
        prop_assert!(u.d > 0.0 && u.e > u.d);
    }

    #[test]
    fn lorentz_forms_agree_at_the_root(q in primitive(), eos in eos_strategy()) {
        let u = prim_to_cons(&q, &eos).unwrap();
        let s = derived_scalars(&u);
        let xi = xi_exact(&q, &eos);
        let w = q.lorentz_factor();
        let stable = master::lorentz_w(xi, &s, LorentzForm::Stable).unwrap();
        let naive = master::lorentz_w(xi, &s, LorentzForm::Naive).unwrap();
        prop_assert!(rel(stable, w) <= 1e-10, "stable {stable} exact {w}");
        prop_assert!(rel(naive, w) <= 1e-8, "naive {naive} exact {w}");
        let f = master::master_f(xi, &s, &eos).unwrap();
        prop_assert!(f.abs() <= 1e-13 * (xi + s.e + s.b_sq), "F(xi*) = {f}");
    }

    #[test]
    fn master_function_increases(q in primitive(), eos in eos_strategy()) {
        let u = prim_to_cons(&q, &eos).unwrap();
        let s = derived_scalars(&u);
        let grid = diagnostics::diagnostic_grid(&s, 64).unwrap();
        prop_assert_eq!(diagnostics::check_monotonicity(&s, &eos, &grid), 0);
        for &xi in &grid[1..] {
            prop_assert!(master::master_df(xi, &s, &eos).unwrap() > 0.0, "F'({xi}) <= 0");
        }
    }

    #[test]
    fn recovery_is_pcp_and_round_trips(q in primitive(), eos in eos_strategy(), xi_c_only in any::<bool>()) {
        let u = prim_to_cons(&q, &eos).unwrap();
        let mode = if xi_c_only { SolverMode::PcpXiC } else { SolverMode::PcpHybrid };
        let cfg = SolverConfig { record_trace: true, ..SolverConfig::with_mode(mode) };
        let r = recover(&u, &eos, &cfg);
        prop_assert_eq!(r.report.status, Status::Converged);
        prop_assert!(!r.report.pcp_violated);
        prop_assert!(r.report.iterations <= 30);
        let s = derived_scalars(&u);
        for t in r.report.trace.as_ref().unwrap() {
            prop_assert!(master::in_physical_domain(t.xi, &s));
        }
        let got = r.primitive.unwrap();
        let dv: [f64; 3] = std::array::from_fn(|i| got.v[i] - q.v[i]);
        // |dp/dxi| <= 1 at fixed D and W, so p inherits the root error.
        let xi = xi_exact(&q, &eos);
        prop_assert!((r.report.xi - xi).abs() <= xi_tol(xi, &s, &eos), "xi {} exact {xi}", r.report.xi);
        // v = (m + tau B / xi) / (xi + B^2)
        let v_slope = (s.tau.abs() * s.b / (xi * xi) + 1.0) / (xi + s.b_sq);
        prop_assert!(norm(&dv) <= 1e-13 + 2.0 * v_slope * xi_tol(xi, &s, &eos), "dv {}", norm(&dv));
        let w_tol = 2.0 * log_w_slope(xi, &s) * xi_tol(xi, &s, &eos);
        prop_assert!(rel(got.rho, q.rho) <= 1e-13 + w_tol, "rho {} vs {}", got.rho, q.rho);
        prop_assert!((got.p - q.p).abs() <= xi_tol(xi, &s, &eos) + 1e-13 * (q.p + xi), "p {} vs {}", got.p, q.p);
        prop_assert_eq!(got.b, q.b);
    }

    #[test]
    fn cubic_root_residual_and_order(q in primitive(), eos in eos_strategy()) {
        let u = prim_to_cons(&q, &eos).unwrap();
        let s = derived_scalars(&u);
        let xi_c = master::xi_c(&s).unwrap();
        let scale = xi_c.powi(3) + s.alpha1.abs() * xi_c * xi_c + 0.5 * (s.b_sq * s.d * s.d + s.tau * s.tau);
        prop_assert!(master::cubic_fc(xi_c, &s).abs() <= 1e-14 * scale);
        let xi = xi_exact(&q, &eos);
        prop_assert!(xi_c <= xi + xi_tol(xi, &s, &eos) && xi <= master::xi_upper(&s));
        let ordering = check_root_ordering(&s).unwrap();
        prop_assert!(ordering.ok, "{ordering:?}");
        let safe = check_safe_interval(&s, &eos, &SolverConfig::default()).unwrap();
        prop_assert!(safe.ok, "{safe:?}");
    }

    #[test]
    fn bracket_encloses_the_root(q in primitive(), eos in eos_strategy()) {
        let u = prim_to_cons(&q, &eos).unwrap();
        let s = derived_scalars(&u);
        let b = pcp_bracket(&s, &eos).unwrap();
        prop_assert!(b.has_sign_change());
        prop_assert!(b.f_lo <= 0.0 && b.f_hi >= 0.0);
        let xi = xi_exact(&q, &eos);
        prop_assert!(b.lo <= xi + xi_tol(xi, &s, &eos) && xi <= b.hi);
        for mode in [SolverMode::Bisection, SolverMode::Brent] {
            let r = solve(&s, &eos, &SolverConfig::with_mode(mode));
            prop_assert_eq!(r.status, Status::Converged);
            prop_assert!((r.xi - xi).abs() <= xi_tol(xi, &s, &eos), "{mode:?}: {} vs {xi}", r.xi);
        }
    }

    #[test]
    fn hybrid_guess_is_safe(q in primitive(), eos in eos_strategy()) {
        let u = prim_to_cons(&q, &eos).unwrap();
        let s = derived_scalars(&u);
        let g = initial_guess(&s, &eos, SolverMode::PcpHybrid).unwrap();
        prop_assert!(matches!(g.kind, InitialKind::XiD | InitialKind::XiC));
        let xi = xi_exact(&q, &eos);
        prop_assert!(g.xi0 <= xi + xi_tol(xi, &s, &eos));
        prop_assert!(master::in_physical_domain(g.xi0, &s));
    }

    #[test]
    fn suite_draws_are_reproducible(seed in any::<u64>(), trial in 0u64..1_000_000, two in any::<bool>()) {
        let suite = if two { Suite::Suite2 } else { Suite::Suite1 };
        let spec = SuiteSpec::new(suite, 1, seed, EosChoice::GammaRandom, SolverMode::PcpHybrid);
        let (q, eos) = bench::draw_trial(&spec, trial);
        prop_assert_eq!(bench::draw_trial(&spec, trial), (q, eos));
        prop_assert!(q.validate().is_ok());
        let speed = norm(&q.v);
        if two {
            prop_assert!((0.99 * (1.0 - 1e-15)..1.0).contains(&speed));
        } else {
            prop_assert!(speed < 1.0);
        }
        match eos {
            Eos::GammaLaw { gamma } => prop_assert!(gamma > 1.0 && gamma < 2.0),
            _ => prop_assert!(false, "gamma-random drew {eos:?}"),
        }
    }

    #[test]
    fn float_text_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(bench::fmt_f64(x).parse::<f64>().unwrap(), x);
    }
}
