use std::fs::File;
use std::io::{self, BufReader};
use std::path::Path;

use anyhow::{Context, Result};
use cekit_core::bounds::guessing::GuessingPoint;
use cekit_core::bounds::surface::{surface_column, HminSurface};
use cekit_core::bounds::{linspace_step, optimize_pwin, optimizer_entropy, BoundPoint, SeesawConfig};
use cekit_core::finitekey::{
    default_slack, key_length, key_length_from_tilde, tilde_params, tune, KeyRateReport, SecurityParams, TUNE_FACTORS,
};
use cekit_core::game::ResourceKind;
use cekit_core::protocol::{
    abort_check, estimate, run_protocol, Detector, DeviceModel, Estimates, Transcript, Verdict,
};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::audit::{self, AuditSettings};
use crate::output::{fmt_opt, fmt_sig, Format, Sink};
use crate::{transcript, Command, Outcome, Solver, UsageError};

pub fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Bounds(a) => bounds(&a),
        Command::Entropy(a) => entropy(&a),
        Command::Randomness(a) => randomness(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Keyrate(a) => keyrate(&a),
        Command::Audit(a) => audit_cmd(&a),
    }
}

fn seesaw(s: &Solver, seed: u64) -> SeesawConfig {
    SeesawConfig { starts: s.starts, tol: s.tol, max_rounds: s.max_rounds, seed }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// `start:end:step`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(usage(format!("grid `{spec}`: expected start:end:step")));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("grid `{spec}`: `{s}` is not a number")));
    let grid = linspace_step(num(a)?, num(b)?, num(c)?)?;
    if grid.iter().any(|d| !(0.0..=1.0).contains(d)) {
        return Err(usage(format!("grid `{spec}`: d_eps values must lie in [0, 1]")));
    }
    Ok(grid)
}

#[derive(Serialize)]
struct BoundRow {
    d_eps: f64,
    family: ResourceKind,
    pwin: f64,
    c00: Option<f64>,
    c01: Option<f64>,
    nx: Option<f64>,
    method: String,
}

impl From<&BoundPoint> for BoundRow {
    fn from(p: &BoundPoint) -> Self {
        Self {
            d_eps: p.d_eps,
            family: p.kind,
            pwin: p.value,
            c00: p.params.map(|q| q.c00),
            c01: p.params.map(|q| q.c01),
            nx: p.params.map(|q| q.n_x),
            method: p.method.to_string(),
        }
    }
}

pub const BOUNDS_HEADER: [&str; 7] = ["d_eps", "family", "pwin", "c00", "c01", "nx", "method"];
pub const GUESSING_HEADER: [&str; 4] = ["d_eps", "pwin_target", "p_guess", "h_min"];
pub const ENTROPY_HEADER: [&str; 2] = ["d_eps", "entropy"];
pub const KEYRATE_HEADER: [&str; 9] = ["m", "gamma", "eta", "d_eps", "pwin", "kappa", "ell", "key_length", "budget"];

fn bounds(a: &crate::BoundsArgs) -> Result<Outcome> {
    let grid = parse_grid(&a.deps_grid)?;
    let cfg = seesaw(&a.solver, a.common.seed);
    let jobs: Vec<(ResourceKind, f64)> = a.families.iter().flat_map(|&k| grid.iter().map(move |&d| (k, d))).collect();
    info!("bounds: {} optimisations", jobs.len());
    let points: Vec<BoundPoint> = jobs
        .par_iter()
        .map(|&(k, d)| optimize_pwin(k, d, &cfg).with_context(|| format!("{k} at d_eps = {d}")))
        .collect::<Result<_>>()?;
    let rows: Vec<BoundRow> = points.iter().map(BoundRow::from).collect();
    let sink = Sink::new(a.common.out.as_deref());
    match a.format {
        Format::Json => sink.write_json(&rows)?,
        Format::Csv => sink.write_csv(
            &BOUNDS_HEADER,
            rows.iter().map(|r| {
                vec![
                    fmt_sig(r.d_eps),
                    r.family.to_string(),
                    fmt_sig(r.pwin),
                    fmt_opt(r.c00),
                    fmt_opt(r.c01),
                    fmt_opt(r.nx),
                    r.method.clone(),
                ]
            }),
        )?,
    }
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct EntropyRow {
    d_eps: f64,
    entropy: f64,
}

fn entropy(a: &crate::EntropyArgs) -> Result<Outcome> {
    let grid = parse_grid(&a.deps_grid)?;
    let cfg = seesaw(&a.solver, a.common.seed);
    let rows: Vec<EntropyRow> = grid
        .par_iter()
        .map(|&d| -> Result<EntropyRow> {
            let p = optimize_pwin(ResourceKind::EntangledCoherent, d, &cfg)?;
            Ok(EntropyRow { d_eps: d, entropy: optimizer_entropy(&p)? })
        })
        .collect::<Result<_>>()?;
    let sink = Sink::new(a.common.out.as_deref());
    match a.format {
        Format::Json => sink.write_json(&rows)?,
        Format::Csv => {
            sink.write_csv(&ENTROPY_HEADER, rows.iter().map(|r| vec![fmt_sig(r.d_eps), fmt_sig(r.entropy)]))?
        }
    }
    Ok(Outcome::Success)
}

/// Guessing-probability columns computed in parallel, in input order.
fn columns(d_values: &[f64], points: usize, cfg: &SeesawConfig) -> Result<Vec<GuessingPoint>> {
    let cols: Vec<Vec<GuessingPoint>> = d_values
        .par_iter()
        .map(|&d| surface_column(d, points, cfg).with_context(|| format!("guessing curve at d_eps = {d}")))
        .collect::<Result<_>>()?;
    Ok(cols.into_iter().flatten().collect())
}

#[derive(Serialize)]
struct GuessRow {
    d_eps: f64,
    pwin_target: f64,
    p_guess: f64,
    h_min: f64,
}

fn randomness(a: &crate::RandomnessArgs) -> Result<Outcome> {
    if a.deps_values.is_empty() || a.deps_values.iter().any(|d| !(0.0..=1.0).contains(d)) {
        return Err(usage("--deps-values must be a non-empty list in [0, 1]"));
    }
    if a.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let min = cekit_core::bounds::surface::MIN_AXIS_POINTS;
    if a.surface_out.is_some() && a.deps_values.len() < min {
        return Err(usage(format!("--surface-out needs at least {min} d_eps values")));
    }
    let cfg = seesaw(&a.solver, a.common.seed);
    let nodes = columns(&a.deps_values, a.points, &cfg)?;
    let sink = Sink::new(a.common.out.as_deref());
    let rows: Vec<GuessRow> = nodes
        .iter()
        .map(|n| GuessRow { d_eps: n.d_eps, pwin_target: n.pwin_target, p_guess: n.p_guess, h_min: n.h_min })
        .collect();
    match a.format {
        Format::Json => sink.write_json(&rows)?,
        Format::Csv => sink.write_csv(
            &GUESSING_HEADER,
            rows.iter().map(|r| vec![fmt_sig(r.d_eps), fmt_sig(r.pwin_target), fmt_sig(r.p_guess), fmt_sig(r.h_min)]),
        )?,
    }
    if let Some(path) = &a.surface_out {
        let surface = HminSurface::from_nodes(nodes)?;
        Sink::new(Some(path)).write_json(&surface)?;
    }
    Ok(Outcome::Success)
}

fn simulate(a: &crate::SimulateArgs) -> Result<Outcome> {
    if !(0.0..=1.0).contains(&a.deps) {
        return Err(usage("--deps must lie in [0, 1]"));
    }
    let cfg = seesaw(&a.solver, a.common.seed);
    let mut model = DeviceModel::honest_optimal(a.deps, &cfg)?;
    model.visibility = a.visibility;
    model.detector_a = Detector { efficiency: a.efficiency_a, dark_count: a.dark_a };
    model.detector_b = Detector { efficiency: a.efficiency_b, dark_count: a.dark_b };
    model.validate()?;
    let t = run_protocol(&model, a.m, a.gamma, a.common.seed)?;
    let sink = Sink::new(a.common.out.as_deref());
    match a.format {
        Format::Csv => transcript::write(&sink, &t.rounds)?,
        Format::Json => sink.write_json(&t)?,
    }
    if let Some(path) = &a.estimates_out {
        let mut e = estimate(&t)?;
        let verdict = abort_check(&mut e, a.eta);
        Sink::new(Some(path)).write_json(&e)?;
        if verdict == Verdict::Abort {
            return Ok(Outcome::Failed);
        }
    }
    Ok(Outcome::Success)
}

fn load_estimates(a: &crate::KeyrateArgs) -> Result<Estimates> {
    let raw = [a.pwin.is_some(), a.deps.is_some(), a.d_size.is_some()];
    if raw.iter().any(|&b| b) {
        if a.transcript.is_some() {
            return Err(usage("give either --transcript or raw statistics (--pwin, --deps, --D), not both"));
        }
        let (Some(pwin), Some(deps), Some(d_size)) = (a.pwin, a.deps, a.d_size) else {
            return Err(usage("raw statistics need all of --pwin, --deps and --D"));
        };
        for (name, v) in [("--pwin", pwin), ("--deps", deps), ("--eta-b", a.eta_b)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(usage(format!("{name} must lie in [0, 1]")));
            }
        }
        if d_size == 0 {
            return Err(usage("--D must be positive"));
        }
        let m = a.m.unwrap_or(4 * d_size);
        if m < d_size {
            return Err(usage("--m must be at least --D"));
        }
        let b_size = cekit_core::protocol::test_set_size(d_size, a.gamma);
        return Ok(Estimates { pwin_hat: pwin, deps_hat: deps, eta_b: a.eta_b, aborted: false, m, d_size, b_size });
    }
    let path = a.transcript.as_deref().unwrap_or(Path::new("-"));
    let rounds = if path.as_os_str() == "-" {
        transcript::read(io::stdin().lock(), "<stdin>")?
    } else {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        transcript::read(BufReader::new(f), &path.display().to_string())?
    };
    if rounds.is_empty() {
        return Err(usage("transcript has no rounds"));
    }
    // The test set is re-drawn from this command's seed.
    let t = Transcript::from_rounds(rounds, a.gamma, a.common.seed)?;
    Ok(estimate(&t)?)
}

/// Columns `0 = d_0 < ... < d_max` with `d_max` just above the largest
/// adjusted `d_eps` the key computation may query.
fn surface_grid(a: &crate::KeyrateArgs, est: &Estimates) -> Result<Vec<f64>> {
    let d_max = match a.surface_dmax {
        Some(v) if v > 0.0 && v <= 1.0 => v,
        Some(_) => return Err(usage("--surface-dmax must lie in (0, 1]")),
        None => {
            let s = default_slack(est.m);
            let (eps, delta) = if a.tune {
                let top = TUNE_FACTORS[TUNE_FACTORS.len() - 1];
                (top * s, top * s)
            } else {
                (a.eps.unwrap_or(s), a.delta.unwrap_or(s))
            };
            let needed = if delta < 1.0 { (est.deps_hat + eps) / (1.0 - delta) } else { 1.0 };
            (((needed * 1.2 + 0.005) * 100.0).ceil() / 100.0).clamp(0.05, 1.0)
        }
    };
    if a.surface_columns < cekit_core::bounds::surface::MIN_AXIS_POINTS {
        return Err(usage(format!(
            "--surface-columns must be at least {}",
            cekit_core::bounds::surface::MIN_AXIS_POINTS
        )));
    }
    let n = a.surface_columns;
    Ok((0..n).map(|k| d_max * k as f64 / (n - 1) as f64).collect())
}

fn keyrate(a: &crate::KeyrateArgs) -> Result<Outcome> {
    let mut est = load_estimates(a)?;
    let cfg = seesaw(&a.solver, a.common.seed);
    if abort_check(&mut est, a.eta) == Verdict::Abort {
        eprintln!("protocol aborted: test-set error rate {} exceeds eta = {}", est.eta_b, a.eta);
        return Ok(Outcome::Failed);
    }
    let max_pwin = match a.max_pwin {
        Some(v) => v,
        None => optimize_pwin(ResourceKind::EntangledCoherent, est.deps_hat, &cfg)?.value,
    };
    let mut p = SecurityParams::with_default_slacks(est.m, a.gamma, a.eta, a.mu, max_pwin);
    p.eps = a.eps.unwrap_or(p.eps);
    p.delta = a.delta.unwrap_or(p.delta);
    p.eps_prime = a.eps_prime.unwrap_or(p.eps_prime);
    p.delta_prime = a.delta_prime.unwrap_or(p.delta_prime);
    p.eps_ir = a.eps_ir.unwrap_or(p.eps_ir);
    p.eps_pa = a.eps_pa.unwrap_or(p.eps_pa);
    p.deps_exponent = a.deps_exponent.into();
    p.validate()?;
    if a.tune && a.pwin_tilde.is_some() {
        return Err(usage("--tune and --pwin-tilde cannot be combined"));
    }

    let surface = match &a.surface {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            serde_json::from_reader(BufReader::new(f)).with_context(|| format!("parsing surface {}", path.display()))?
        }
        None => {
            let grid = surface_grid(a, &est)?;
            info!("computing min-entropy surface on d_eps columns {grid:?}");
            HminSurface::from_nodes(columns(&grid, a.surface_points, &cfg)?)?
        }
    };
    if let Some(path) = &a.surface_out {
        Sink::new(Some(path)).write_json(&surface)?;
    }

    let report: KeyRateReport = if a.tune {
        tune(&est, &p, &surface)?
    } else if let Some(pt) = a.pwin_tilde {
        let (_, dt) = tilde_params(est.pwin_hat, est.deps_hat, &p)?;
        key_length_from_tilde(&est, &p, &surface, (pt, dt))?
    } else {
        key_length(&est, &p, &surface)?
    };
    let sink = Sink::new(a.common.out.as_deref());
    match a.format {
        Format::Json => sink.write_json(&report)?,
        Format::Csv => sink.write_csv(
            &KEYRATE_HEADER,
            [vec![
                report.m.to_string(),
                fmt_sig(report.params.gamma),
                fmt_sig(report.params.eta),
                fmt_sig(report.deps_hat),
                fmt_sig(report.pwin_hat),
                fmt_sig(report.kappa),
                fmt_sig(report.ell),
                report.key_length.to_string(),
                fmt_sig(report.total_failure),
            ]],
        )?,
    }
    Ok(if report.feasible { Outcome::Success } else { Outcome::Failed })
}

fn audit_cmd(a: &crate::AuditArgs) -> Result<Outcome> {
    if !(a.resolution > 0.0 && a.resolution <= 1.0) {
        return Err(usage("--resolution must lie in (0, 1]"));
    }
    if a.runs == 0 || a.rounds == 0 || a.points == 0 {
        return Err(usage("--runs, --rounds and --points must be positive"));
    }
    let cfg = seesaw(&a.solver, a.common.seed);
    let settings = AuditSettings {
        resolution: a.resolution,
        runs: a.runs,
        rounds: a.rounds,
        points: a.points,
        seed: a.common.seed,
    };
    let report = audit::run_all(&settings, &cfg)?;
    let sink = Sink::new(a.common.out.as_deref());
    match a.format {
        Format::Json => sink.write_json(&report)?,
        Format::Csv => sink.write_csv(
            &["check", "passed", "detail"],
            report.checks.iter().map(|c| vec![c.name.clone(), c.passed.to_string(), c.detail.clone()]),
        )?,
    }
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(if report.passed() { Outcome::Success } else { Outcome::Failed })
}
