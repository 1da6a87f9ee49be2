//! The `audit` battery: each check returns a pass/fail line plus the data
//! behind it.

use cekit_core::bounds::analytic::{solve_stationarity, AnalyticOutcome};
use cekit_core::bounds::{optimize_pwin, SeesawConfig};
use cekit_core::finitekey::{azuma_empirical_check, formula_audit, AuditLine, EmpiricalLine};
use cekit_core::game::{param_strategy, presence_measurement, pwin, pwin_param, ResourceKind, Strategy};
use cekit_core::oracle::{self, OracleBest};
use cekit_core::protocol::DeviceModel;
use cekit_core::qmat::DensityMatrix;
use cekit_core::seed;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }
}

/// Winning probability of `|11>` with photon-number servers.
pub fn perfect_resource() -> anyhow::Result<Check> {
    let m = presence_measurement(1)?;
    let v = pwin(&Strategy::new(DensityMatrix::basis(4, 3), m.clone(), m)?)?;
    Ok(Check::new("perfect-resource", (v - 1.0).abs() <= 1e-12, format!("pwin = {v:.15}")))
}

/// Closed-form winning probability against two Born-rule evaluations on
/// random feasible `(c00, c01, d_eps, n_x)`.
pub fn objective_algebra(samples: usize, master: u64) -> anyhow::Result<Check> {
    let mut rng = seed::stream(master, "objective-algebra", 0);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let d: f64 = rng.random();
        let phi = rng.random::<f64>() * std::f64::consts::TAU;
        let n: f64 = rng.random_range(-1.0..=1.0);
        let r = (1.0 - d).sqrt();
        let (c00, c01) = (r * phi.cos(), r * phi.sin() / std::f64::consts::SQRT_2);
        let closed = pwin_param(c00, c01, d, n)?;
        let born = pwin(&param_strategy(c00, c01, d, n)?)?;
        let psi = [c00, c01, c01, d.sqrt()];
        let proj = oracle_projector(n.asin());
        let independent = oracle::pwin_born(&oracle::pure(&psi), &proj, &proj);
        worst = worst.max((closed - born).abs()).max((closed - independent).abs());
    }
    Ok(Check::new("objective-algebra", worst <= 1e-9, format!("{samples} samples, max |diff| = {worst:.3e}")))
}

fn oracle_projector(t: f64) -> [[f64; 2]; 2] {
    let (s, c) = t.sin_cos();
    [[0.5 * (1.0 + c), 0.5 * s], [0.5 * s, 0.5 * (1.0 - c)]]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub d_eps: f64,
    pub seesaw: f64,
    pub grid: f64,
    pub grid_point: OracleBest,
}

pub const ORACLE_D_VALUES: [f64; 6] = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9];

/// Brute-force grid never above the see-saw by more than 1e-3; at
/// `d_eps = 0` the grid also optimises the state exactly.
pub fn oracle_agreement(
    d_values: &[f64],
    resolution: f64,
    cfg: &SeesawConfig,
) -> anyhow::Result<(Check, Vec<OracleRow>)> {
    let rows: Vec<OracleRow> = d_values
        .par_iter()
        .map(|&d| -> anyhow::Result<OracleRow> {
            let seesaw = optimize_pwin(ResourceKind::EntangledCoherent, d, cfg)?.value;
            let mut best = oracle::grid_symmetric(d, resolution)?;
            if d == 0.0 {
                let exact = oracle::grid_exact_state(d, resolution)?;
                if exact.value > best.value {
                    best = exact;
                }
            }
            Ok(OracleRow { d_eps: d, seesaw, grid: best.value, grid_point: best })
        })
        .collect::<anyhow::Result<_>>()?;
    let excess = rows.iter().map(|r| r.grid - r.seesaw).fold(f64::NEG_INFINITY, f64::max);
    let check = Check::new(
        "oracle-agreement",
        excess <= 1e-3,
        format!("{} d_eps values, resolution {resolution}, max(grid - seesaw) = {excess:.3e}", rows.len()),
    );
    Ok((check, rows))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub d_eps: f64,
    pub analytic: f64,
    pub seesaw: f64,
}

/// Stationarity system: no interior solution at 0, `(n_x = 0, pwin = 1)`
/// at 1, and every interior solution on the sweep compared to the see-saw.
pub fn stationarity_system(sweep: &[f64], cfg: &SeesawConfig) -> anyhow::Result<(Check, Vec<Mismatch>)> {
    let at_zero = matches!(solve_stationarity(0.0)?, AnalyticOutcome::NoInteriorSolution);
    let at_one = match solve_stationarity(1.0)? {
        AnalyticOutcome::Solution(s) => s.n_x.abs() <= 1e-9 && (s.pwin - 1.0).abs() <= 1e-9,
        AnalyticOutcome::NoInteriorSolution => false,
    };
    let mut mismatches = Vec::new();
    let mut found = 0;
    for &d in sweep {
        if let AnalyticOutcome::Solution(s) = solve_stationarity(d)? {
            found += 1;
            let seesaw = optimize_pwin(ResourceKind::EntangledCoherent, d, cfg)?.value;
            if (s.pwin - seesaw).abs() > 1e-6 {
                mismatches.push(Mismatch { d_eps: d, analytic: s.pwin, seesaw });
            }
        }
    }
    let check = Check::new(
        "stationarity-system",
        at_zero && at_one,
        format!(
            "none at d=0: {at_zero}; (n_x=0, pwin=1) at d=1: {at_one}; {found} interior solutions on {} sweep points, {} mismatches",
            sweep.len(),
            mismatches.len()
        ),
    );
    Ok((check, mismatches))
}

pub fn formulas(points: usize, master: u64) -> (Check, Vec<AuditLine>) {
    let lines = formula_audit(points, master, 1e-12);
    let failed: Vec<&str> = lines.iter().filter(|l| !l.passed).map(|l| l.formula.as_str()).collect();
    let detail = if failed.is_empty() {
        format!("{} formulas x {points} points within 1e-12", lines.len())
    } else {
        format!("failed: {}", failed.join(", "))
    };
    (Check::new("formula-audit", failed.is_empty(), detail), lines)
}

pub const CONCENTRATION_EPS: [f64; 5] = [0.005, 0.01, 0.02, 0.05, 0.1];

/// Simulated frequency of large winning-rate deviations against the
/// concentration bound, for the honest optimal devices at `d_eps = 0`.
pub fn concentration(
    runs: usize,
    rounds: usize,
    cfg: &SeesawConfig,
    master: u64,
) -> anyhow::Result<(Check, Vec<EmpiricalLine>)> {
    let opt = optimize_pwin(ResourceKind::EntangledCoherent, 0.0, cfg)?;
    let model = DeviceModel::ideal(opt.strategy);
    let lines = azuma_empirical_check(&model, runs, rounds, &CONCENTRATION_EPS, opt.value, master)?;
    let ok = lines.iter().all(|l| l.passed);
    let worst = lines.iter().map(|l| l.frequency - l.bound).fold(f64::NEG_INFINITY, f64::max);
    let check = Check::new(
        "concentration-empirical",
        ok,
        format!("{runs} runs of {rounds} rounds, max(frequency - bound) = {worst:.4}"),
    );
    Ok((check, lines))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<Check>,
    pub oracle: Vec<OracleRow>,
    pub stationarity_mismatches: Vec<Mismatch>,
    pub formulas: Vec<AuditLine>,
    pub concentration: Vec<EmpiricalLine>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub struct AuditSettings {
    pub resolution: f64,
    pub runs: usize,
    pub rounds: usize,
    pub points: usize,
    pub seed: u64,
}

pub fn run_all(s: &AuditSettings, cfg: &SeesawConfig) -> anyhow::Result<AuditReport> {
    let sweep: Vec<f64> = (1..20).map(|k| k as f64 * 0.05).collect();
    let mut checks = vec![perfect_resource()?, objective_algebra(1000, s.seed)?];
    let (c, oracle) = oracle_agreement(&ORACLE_D_VALUES, s.resolution, cfg)?;
    checks.push(c);
    let (c, stationarity_mismatches) = stationarity_system(&sweep, cfg)?;
    checks.push(c);
    let (c, formulas) = formulas(s.points, s.seed);
    checks.push(c);
    let (c, concentration) = concentration(s.runs, s.rounds, cfg, s.seed)?;
    checks.push(c);
    Ok(AuditReport { checks, oracle, stationarity_mismatches, formulas, concentration })
}
