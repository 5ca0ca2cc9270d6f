use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use pcp_recovery::bench::{self, SuiteSpec, SuiteStats};
use pcp_recovery::diagnostics::{self, VerifyOptions};
use pcp_recovery::master;
use pcp_recovery::recovery;
use pcp_recovery::state::prim_to_cons;
use pcp_recovery::{Conserved, Primitive, Scalars, SolverMode, Status};
use serde::Deserialize;
use serde_json::json;

use crate::args::{resolve_eos, resolve_suite_eos, BenchArgs, ProfileArgs, RecoverArgs, Spacing, VerifyArgs};
use crate::{CliError, EXIT_SOLVER, EXIT_VALIDATION, EXIT_VIOLATION};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum StateInput {
    Conserved(Conserved),
    Primitive(Primitive),
}

fn read_input(path: &Path) -> Result<String, CliError> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut text).context("reading standard input")?;
    } else {
        text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    Ok(text)
}

fn write_output(out: Option<&PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().lock().write_all(content.as_bytes()).context("writing standard output")?,
    }
    Ok(())
}

fn to_json(value: &impl serde::Serialize) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).context("serializing report")?;
    s.push('\n');
    Ok(s)
}

pub fn recover(a: RecoverArgs) -> Result<u8, CliError> {
    let eos = resolve_eos(a.eos, a.gamma)?;
    let cfg = a.solver.config(a.trace)?;
    let text = read_input(&a.input)?;
    let input: StateInput = serde_json::from_str(&text).map_err(|e| {
        CliError::msg(format!(
            "{}: expected {{\"D\", \"m\", \"B\", \"E\"}} or {{\"rho\", \"v\", \"B\", \"p\"}} ({e})",
            a.input.display()
        ))
    })?;
    let u = match input {
        StateInput::Conserved(u) => u,
        StateInput::Primitive(q) => {
            q.validate().map_err(CliError::validation)?;
            prim_to_cons(&q, &eos).map_err(CliError::validation)?
        }
    };

    let r = recovery::recover(&u, &eos, &cfg);
    let q = r.primitive;
    let mut report = json!({
        "status": r.report.status,
        "rho": q.map(|q| q.rho),
        "v": q.map(|q| q.v),
        "B": u.b,
        "p": q.map(|q| q.p),
        "xi": r.report.xi,
        "iterations": r.report.iterations,
        "osc_count": r.report.osc_count,
        "pcp_violated": r.report.pcp_violated,
        "initial_kind": r.report.initial_kind,
        "solver": cfg.mode.name(),
        "eos": eos,
        "conserved": u,
    });
    if let Some(trace) = r.report.trace {
        report["trace"] = json!(trace);
    }
    write_output(None, &to_json(&report)?)?;
    Ok(match r.report.status {
        Status::Converged => 0,
        Status::InadmissibleInput => {
            eprintln!("error: input state is not admissible");
            EXIT_VALIDATION
        }
        s => {
            eprintln!("error: recovery failed with status {s:?}");
            EXIT_SOLVER
        }
    })
}

fn check_trials(trials: usize) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::msg("--trials must be at least 1"));
    }
    Ok(())
}

pub fn bench(a: BenchArgs) -> Result<u8, CliError> {
    check_trials(a.trials)?;
    let eos = resolve_suite_eos(a.eos, a.gamma)?;
    let cfg = a.solver.config(false)?;
    let spec = SuiteSpec::new(a.suite.into(), a.trials, a.seed, eos, cfg.mode);

    let start = Instant::now();
    let records = bench::run_suite_records(&spec, &cfg);
    let stats = SuiteStats::from_records(&spec, &records, start.elapsed().as_secs_f64());

    let meta = json!({
        "rng": bench::RNG_NAME,
        "suite": spec.suite.number(),
        "trials": spec.trials,
        "seed": spec.seed,
        "eos": spec.eos.label(),
        "solver": cfg.mode.name(),
        "tol": cfg.tol,
        "max_iter": cfg.max_iter,
    });
    match &a.out {
        Some(path) => {
            let mut meta_path = path.clone().into_os_string();
            meta_path.push(".meta.json");
            write_output(Some(&PathBuf::from(meta_path)), &to_json(&meta)?)?;
        }
        None => eprintln!("rng: {}", bench::RNG_NAME),
    }
    if let Some(path) = &a.per_trial {
        write_output(Some(path), &bench::records_to_csv(&records))?;
    }
    let csv = format!("{}\n{}\n", SuiteStats::CSV_HEADER, stats.to_csv_row());
    write_output(a.out.as_ref(), &csv)?;
    if stats.failures > 0 {
        eprintln!("{} of {} trials failed", stats.failures, stats.trials);
    }
    Ok(0)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), bench::fmt_f64)
}

pub fn profile(a: ProfileArgs) -> Result<u8, CliError> {
    let eos = resolve_eos(a.eos, a.gamma)?;
    if !(a.d > 0.0 && a.d.is_finite()) {
        return Err(CliError::msg("--D must be positive"));
    }
    if !(a.e.is_finite() && a.m2 >= 0.0 && a.m2.is_finite() && a.b >= 0.0 && a.b.is_finite() && a.tau.is_finite()) {
        return Err(CliError::msg("--E, --tau must be finite; --m2, --B non-negative"));
    }
    if a.tau * a.tau > a.m2 * a.b * a.b * (1.0 + 1e-12) {
        return Err(CliError::msg("--tau exceeds |m| |B|"));
    }
    if a.points < 2 {
        return Err(CliError::msg("--points must be at least 2"));
    }
    let s = Scalars::from_reductions(a.d, a.e, a.m2, a.b, a.tau);
    let lo = match a.xi_min {
        Some(x) => x,
        None => master::xi_c(&s).map_err(CliError::validation)?,
    };
    let hi = a.xi_max.unwrap_or_else(|| master::xi_upper(&s));
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(CliError::msg(format!("empty grid: xi-min = {lo}, xi-max = {hi}")));
    }
    let grid = match a.spacing {
        Spacing::Uniform => (0..a.points).map(|i| lo + (hi - lo) * i as f64 / (a.points - 1) as f64).collect(),
        Spacing::Log => diagnostics::log_grid(lo, hi, a.points),
        Spacing::Clustered => {
            if !(a.rel_min > 0.0) {
                return Err(CliError::msg("--rel-min must be positive"));
            }
            diagnostics::clustered_grid(lo, hi, a.points, a.rel_min)
        }
    };

    let mut csv = String::from("xi,f_stable,f_naive,w_stable,w_naive,fb_sign\n");
    for r in diagnostics::profile(&s, &eos, &grid) {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            bench::fmt_f64(r.xi),
            fmt_opt(r.f_stable),
            fmt_opt(r.f_naive),
            fmt_opt(r.w_stable),
            fmt_opt(r.w_naive),
            r.fb_sign
        ));
    }
    write_output(a.out.as_ref(), &csv)?;
    let c = diagnostics::roundoff_contrast(&s, &eos, &grid);
    eprintln!(
        "decreases of F: stable {} (non-real {}), naive {} (non-real {})",
        c.stable_decreases, c.stable_nonreal, c.naive_decreases, c.naive_nonreal
    );
    Ok(0)
}

pub fn verify(a: VerifyArgs) -> Result<u8, CliError> {
    check_trials(a.trials)?;
    if a.grid_points < 8 {
        return Err(CliError::msg("--grid-points must be at least 8"));
    }
    let eos = resolve_suite_eos(a.eos, a.gamma)?;
    let cfg = pcp_recovery::SolverConfig::with_mode(SolverMode::PcpHybrid);
    let spec = SuiteSpec::new(a.suite.into(), a.trials, a.seed, eos, cfg.mode);
    let opts = VerifyOptions { grid_points: a.grid_points, ..Default::default() };
    let report = diagnostics::verify_suite(&spec, &cfg, &opts);
    let out = json!({
        "suite": spec.suite.number(),
        "trials": spec.trials,
        "seed": spec.seed,
        "eos": spec.eos.label(),
        "rng": bench::RNG_NAME,
        "grid_points": a.grid_points,
        "clean": report.is_clean(),
        "report": report,
    });
    write_output(a.out.as_ref(), &to_json(&out)?)?;
    if report.is_clean() {
        Ok(0)
    } else {
        eprintln!("{} violations", report.total_violations());
        Ok(EXIT_VIOLATION)
    }
}
