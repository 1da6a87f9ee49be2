//! Guessing probability of Alice's detection outcome.
//!
//! For a target winning probability `P` and detection level `d`, the
//! adversary picks a strategy that wins with probability at least `P`,
//! respects `Tr(P_11 rho) <= d`, and makes `alpha` (Alice's detection result
//! when she blocks) as predictable as possible. The value reported is the
//! best strategy found, so it lower-bounds the true optimum.
//!
//! The see-saw treats the two constraints through their Lagrange
//! multipliers: with measurements fixed the state step is an SDP that carries
//! both constraints explicitly (its dual variables are the multipliers), and
//! with the state fixed the Lagrangian depends on the measurements only
//! through `lambda * pwin`, so the measurement step is the best response for
//! the winning probability. Every round therefore keeps the iterate feasible
//! and the guessing probability non-decreasing.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    best_state, measurement_round, optimize_pwin, random_measurement, seesaw_measurements, BoundPoint, SeesawConfig,
};
use crate::game::{check_d_eps, objective_operator, pwin, ResourceKind, Strategy};
use crate::math::{log2, sqrt};
use crate::qmat::{kron, ComplexMatrix, DensityMatrix};
use crate::seed;
use crate::{Error, Result};

/// Slack allowed on the winning-probability constraint.
const TARGET_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuessMethod {
    /// A strategy with a deterministic detection outcome meets the target.
    Deterministic,
    Seesaw,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GuessingPoint {
    pub d_eps: f64,
    pub pwin_target: f64,
    pub p_guess: f64,
    pub h_min: f64,
    pub method: GuessMethod,
}

impl GuessingPoint {
    fn new(d_eps: f64, pwin_target: f64, p_guess: f64, method: GuessMethod) -> Self {
        let p_guess = p_guess.clamp(0.5, 1.0);
        Self { d_eps, pwin_target, p_guess, h_min: min_entropy(p_guess), method }
    }
}

/// `-log2 p`, exactly zero at `p = 1`.
pub fn min_entropy(p: f64) -> f64 {
    if p >= 1.0 {
        0.0
    } else {
        -log2(p)
    }
}

/// `|alpha><alpha| (x) I` on the two-qubit space.
fn alice_outcome(alpha: usize) -> ComplexMatrix {
    kron(&ComplexMatrix::basis_projector(2, alpha), &ComplexMatrix::identity(2))
}

fn guess_value(rho: &DensityMatrix) -> f64 {
    let p1 = rho.population(2) + rho.population(3);
    p1.max(1.0 - p1)
}

/// Separable resource with Alice's lab always occupied: `|1> (x) (sqrt(1-d)
/// |0> + sqrt(d) |1>)`, the mirror image of the separable-coherent family.
fn deterministic_state(d_eps: f64) -> Result<DensityMatrix> {
    let (a, b) = (sqrt(1.0 - d_eps), sqrt(d_eps));
    DensityMatrix::pure_real(&[0.0, 0.0, a, b])
}

/// Guessing see-saw for a fixed outcome `alpha` from a feasible start.
fn seesaw_guess(start: Strategy, alpha: usize, target: f64, d_eps: f64, cfg: &SeesawConfig) -> Result<(Strategy, f64)> {
    let objective = alice_outcome(alpha);
    let mut s = start;
    let mut value = objective_value(&s.rho, alpha);
    for _ in 0..cfg.max_rounds {
        let c = objective_operator(&s.povm_a, &s.povm_b)?;
        let constraint = (c.scale(-1.0), -(target - TARGET_SLACK));
        let rho = match best_state(&objective, d_eps, &[constraint]) {
            Ok((rho, _)) => rho,
            // Near the optimum the feasible set can be too thin for the
            // interior-point method; keep the last feasible iterate.
            Err(Error::Solver(_)) => break,
            Err(e) => return Err(e),
        };
        let candidate = Strategy::new(rho.clone(), s.povm_a.clone(), s.povm_b.clone())?;
        let next = objective_value(&rho, alpha);
        if pwin(&candidate)? < target - 2.0 * TARGET_SLACK || next < value - super::MONOTONE_SLACK {
            break;
        }
        s = candidate;
        measurement_round(&rho, &mut s)?;
        let improved = next - value;
        value = next;
        if improved < cfg.tol {
            break;
        }
    }
    Ok((s, value))
}

fn objective_value(rho: &DensityMatrix, alpha: usize) -> f64 {
    rho.matrix().inner(&alice_outcome(alpha))
}

/// Random start made feasible by plain winning-probability see-saw rounds.
fn feasible_start(rng: &mut seed::StreamRng, target: f64, d_eps: f64, cfg: &SeesawConfig) -> Result<Option<Strategy>> {
    let (mut a, mut b) = (random_measurement(rng)?, random_measurement(rng)?);
    let mut last = f64::NEG_INFINITY;
    for _ in 0..cfg.max_rounds {
        let (rho, _) = best_state(&objective_operator(&a, &b)?, d_eps, &[])?;
        let mut s = Strategy::new(rho.clone(), a, b)?;
        if pwin(&s)? >= target {
            return Ok(Some(s));
        }
        measurement_round(&rho, &mut s)?;
        let v = pwin(&s)?;
        if v >= target {
            return Ok(Some(s));
        }
        if v - last < cfg.tol {
            return Ok(None);
        }
        last = v;
        a = s.povm_a;
        b = s.povm_b;
    }
    Ok(None)
}

/// Guessing probability at `(pwin_target, d_eps)`, given the entangled
/// optimum at this `d_eps` and optional extra feasible starting strategies.
pub fn guessing_probability_from(
    pwin_target: f64,
    optimum: &BoundPoint,
    extra_starts: &[Strategy],
    cfg: &SeesawConfig,
) -> Result<(GuessingPoint, Strategy)> {
    let d_eps = optimum.d_eps;
    check_d_eps(d_eps)?;
    if optimum.kind != ResourceKind::EntangledCoherent {
        return Err(Error::param("optimum", "expected the entangled-coherent optimum"));
    }
    if !(pwin_target <= optimum.value + TARGET_SLACK) {
        return Err(Error::InfeasibleTarget { target: pwin_target, optimum: optimum.value });
    }

    let mut rng = seed::stream(cfg.seed, "guessing", pwin_target.to_bits() ^ d_eps.to_bits().rotate_left(32));

    let det = deterministic_state(d_eps)?;
    let mut best_det: Option<(Strategy, f64)> = None;
    for _ in 0..cfg.starts.min(8) {
        let run = seesaw_measurements(&det, (random_measurement(&mut rng)?, random_measurement(&mut rng)?), cfg)?;
        if best_det.as_ref().is_none_or(|(_, v)| run.1 > *v) {
            best_det = Some(run);
        }
    }
    if let Some((s, v)) = best_det {
        if v >= pwin_target - TARGET_SLACK {
            return Ok((GuessingPoint::new(d_eps, pwin_target, 1.0, GuessMethod::Deterministic), s));
        }
    }

    let mut starts: Vec<Strategy> = vec![optimum.strategy.clone()];
    starts.extend(extra_starts.iter().filter(|s| pwin(s).is_ok_and(|v| v >= pwin_target - TARGET_SLACK)).cloned());
    let mut attempts = 0;
    while starts.len() < cfg.starts && attempts < 4 * cfg.starts {
        attempts += 1;
        if let Some(s) = feasible_start(&mut rng, pwin_target, d_eps, cfg)? {
            starts.push(s);
        }
    }

    let mut best = (optimum.strategy.clone(), guess_value(&optimum.strategy.rho));
    for s in &starts {
        let v0 = guess_value(&s.rho);
        if v0 > best.1 {
            best = (s.clone(), v0);
        }
        for alpha in 0..2 {
            let (t, v) = seesaw_guess(s.clone(), alpha, pwin_target, d_eps, cfg)?;
            if v > best.1 {
                best = (t, v);
            }
        }
    }
    Ok((GuessingPoint::new(d_eps, pwin_target, best.1, GuessMethod::Seesaw), best.0))
}

/// Guessing probability at `(pwin_target, d_eps)`.
pub fn guessing_probability(pwin_target: f64, d_eps: f64, cfg: &SeesawConfig) -> Result<GuessingPoint> {
    let optimum = optimize_pwin(ResourceKind::EntangledCoherent, d_eps, cfg)?;
    Ok(guessing_probability_from(pwin_target, &optimum, &[], cfg)?.0)
}

/// Guessing probabilities along increasing targets at one `d_eps`.
///
/// Targets are processed from the largest down and each optimiser seeds the
/// next point: a strategy feasible at a higher target is feasible at every
/// lower one, so `p_guess` comes out non-increasing in the target.
pub fn guessing_curve(targets: &[f64], optimum: &BoundPoint, cfg: &SeesawConfig) -> Result<Vec<GuessingPoint>> {
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&i, &j| targets[j].total_cmp(&targets[i]));
    let mut out: Vec<Option<GuessingPoint>> = vec![None; targets.len()];
    let mut carried: Option<(Strategy, f64)> = None;
    for i in order {
        let extra: Vec<Strategy> = carried.iter().map(|(s, _)| s.clone()).collect();
        let (mut point, strategy) = guessing_probability_from(targets[i], optimum, &extra, cfg)?;
        if let Some((s, v)) = &carried {
            if *v > point.p_guess {
                point = GuessingPoint::new(point.d_eps, point.pwin_target, *v, point.method);
                out[i] = Some(point);
                carried = Some((s.clone(), *v));
                continue;
            }
        }
        carried = Some((strategy, point.p_guess));
        out[i] = Some(point);
    }
    Ok(out.into_iter().map(|p| p.expect("every target visited")).collect())
}

/// Targets `1/2, ..., optimum - 1e-6` evenly spaced; the top point sits just
/// inside the feasible set so the state SDP keeps an interior.
pub fn default_targets(optimum: f64, points: usize) -> Vec<f64> {
    let top = optimum - 1e-6;
    if points < 2 {
        return vec![top];
    }
    (0..points).map(|i| 0.5 + (top - 0.5) * i as f64 / (points - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SeesawConfig {
        SeesawConfig { starts: 6, ..SeesawConfig::default() }
    }

    #[test]
    fn deterministic_below_separable_bound() {
        for d in [0.0, 0.1, 0.5] {
            let sep = (1.0 + sqrt(d)) / 2.0;
            for t in [0.5, sep - 0.01, sep] {
                let g = guessing_probability(t, d, &quick()).unwrap();
                assert_eq!(g.p_guess, 1.0, "d {d} t {t}");
                assert_eq!(g.h_min, 0.0);
                assert_eq!(g.method, GuessMethod::Deterministic);
            }
        }
    }

    #[test]
    fn positive_entropy_at_the_optimum() {
        let cfg = quick();
        for d in [0.0, 0.2] {
            let opt = optimize_pwin(ResourceKind::EntangledCoherent, d, &cfg).unwrap();
            let (g, s) = guessing_probability_from(opt.value - 1e-6, &opt, &[], &cfg).unwrap();
            assert!(g.h_min > 1e-3, "d {d}: {g:?}");
            assert!(pwin(&s).unwrap() >= opt.value - 1e-6 - 1e-8);
            assert!((g.h_min + log2(g.p_guess)).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_state_is_unpredictable() {
        let opt = optimize_pwin(ResourceKind::EntangledCoherent, 0.0, &quick()).unwrap();
        let (g, _) = guessing_probability_from(opt.value, &opt, &[], &quick()).unwrap();
        assert!((g.p_guess - 0.5).abs() < 1e-3, "{g:?}");
    }

    #[test]
    fn infeasible_target_is_rejected() {
        let opt = optimize_pwin(ResourceKind::EntangledCoherent, 0.1, &quick()).unwrap();
        let r = guessing_probability_from(opt.value + 1e-3, &opt, &[], &quick());
        assert!(matches!(r, Err(Error::InfeasibleTarget { .. })));
    }

    #[test]
    fn curve_is_monotone() {
        let cfg = quick();
        let opt = optimize_pwin(ResourceKind::EntangledCoherent, 0.05, &cfg).unwrap();
        let targets = default_targets(opt.value, 7);
        let curve = guessing_curve(&targets, &opt, &cfg).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].p_guess <= w[0].p_guess + 1e-12, "{w:?}");
        }
        assert_eq!(curve[0].p_guess, 1.0);
        assert!(curve.last().unwrap().h_min > 1e-3);
    }

    #[test]
    fn entropy_helper() {
        assert_eq!(min_entropy(1.0), 0.0);
        assert!((min_entropy(0.5) - 1.0).abs() < 1e-15);
    }
}
