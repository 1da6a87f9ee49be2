//! Optimal winning probabilities and the quantities derived from them.
//!
//! Everything here works in the one-photon-per-lab (two-qubit) sector with
//! real states and measurements. The entangled-coherent optimum comes from a
//! see-saw: with both server measurements fixed the best state is an SDP, and
//! with the state fixed each server's best measurement is a projector onto a
//! positive eigenspace. The other two families have their state pinned by
//! `d_eps`, so only the measurements are optimised.

pub mod analytic;
pub mod guessing;
mod simplex;
pub mod surface;

use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::game::{
    best_response, check_d_eps, objective_operator, pwin, pwin_param, single_detection_operator, ResourceFamily,
    ResourceKind, Server, Strategy,
};
use crate::math::{cos, sin, sqrt};
use crate::qmat::{
    eig_hermitian, partial_trace, pauli, re, von_neumann_entropy, ComplexMatrix, DensityMatrix, Keep, Povm,
};
use crate::sdp::{self, SdpProblem};
use crate::seed;
use crate::{Error, Result};

/// How a bound was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Seesaw,
    Analytic,
    Grid,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Seesaw => "seesaw",
            Method::Analytic => "analytic",
            Method::Grid => "grid",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SeesawConfig {
    /// Random initial measurement pairs.
    pub starts: usize,
    /// Stop a start once one full round improves the objective by less.
    pub tol: f64,
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self { starts: 32, tol: 1e-9, max_rounds: 500, seed: 0 }
    }
}

/// Parameters of the symmetric form `c00 |00> + c01 (|01> + |10>) +
/// sqrt(d_eps) |11>` with both servers measuring the same equatorial
/// projectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricParams {
    pub c00: f64,
    pub c01: f64,
    pub n_x: f64,
}

#[derive(Clone, Debug)]
pub struct BoundPoint {
    pub kind: ResourceKind,
    pub d_eps: f64,
    pub value: f64,
    /// Present when the optimiser is (up to symmetries) of the symmetric
    /// form and the closed form reproduces `value` within 1e-7.
    pub params: Option<SymmetricParams>,
    pub strategy: Strategy,
    pub method: Method,
}

/// A decrease larger than this between see-saw half steps is a solver bug.
pub(crate) const MONOTONE_SLACK: f64 = 1e-7;

/// Real projective qubit measurement with Bloch vector `(sin t, 0, cos t)`.
pub fn angle_measurement(theta: f64) -> Result<Povm> {
    let bloch = &pauli::x().scale(sin(theta)) + &pauli::z().scale(cos(theta));
    Povm::binary((&ComplexMatrix::identity(2) + &bloch).scale(0.5))
}

fn real_part(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| re(m[(i, j)].re))
}

pub(crate) fn random_measurement(rng: &mut seed::StreamRng) -> Result<Povm> {
    angle_measurement(rng.random::<f64>() * TAU)
}

fn real_povm(p: Povm) -> Result<Povm> {
    Povm::binary(real_part(p.element(0)))
}

fn restrict(m: &ComplexMatrix, keep: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(keep.len(), keep.len(), |i, j| m[(keep[i], keep[j])])
}

fn embed(m: &ComplexMatrix, keep: &[usize], n: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, &a) in keep.iter().enumerate() {
        for (j, &b) in keep.iter().enumerate() {
            out[(a, b)] = m[(i, j)];
        }
    }
    out
}

/// Best two-qubit state for the objective `c` subject to
/// `Tr(P rho) <= d_eps` plus any extra `Tr(G rho) <= g` constraints.
///
/// At `d_eps = 0` the feasible set has no interior, so the problem is solved
/// on the complement of `|11>` instead; at `d_eps = 1` the constraint is void
/// and dropped.
pub(crate) fn best_state(
    c: &ComplexMatrix,
    d_eps: f64,
    extra: &[(ComplexMatrix, f64)],
) -> Result<(DensityMatrix, sdp::SdpSolution)> {
    let n = c.rows();
    let p = single_detection_operator(1);
    let keep: Vec<usize> =
        if d_eps <= 0.0 { (0..n).filter(|&i| p[(i, i)].re == 0.0).collect() } else { (0..n).collect() };
    let mut prob = SdpProblem::over_states(restrict(&real_part(c), &keep))?;
    if d_eps > 0.0 && d_eps < 1.0 {
        prob = prob.with_inequality(p, d_eps)?;
    }
    for (g, rhs) in extra {
        prob = prob.with_inequality(restrict(&real_part(g), &keep), *rhs)?;
    }
    let sol = sdp::solve(&prob).ensure_optimal()?;
    let rho = DensityMatrix::from_approximate(&embed(&real_part(&sol.x), &keep, n))?;
    Ok((rho, sol))
}

pub(crate) fn measurement_round(rho: &DensityMatrix, s: &mut Strategy) -> Result<()> {
    s.povm_a = real_povm(best_response(rho, &s.povm_b, Server::A)?)?;
    s.povm_b = real_povm(best_response(rho, &s.povm_a, Server::B)?)?;
    Ok(())
}

fn check_monotone(before: f64, after: f64) -> Result<()> {
    if after < before - MONOTONE_SLACK {
        return Err(Error::Solver(alloc::format!("see-saw objective decreased from {before} to {after}")));
    }
    Ok(())
}

/// One see-saw run over state and measurements from the given start.
fn seesaw_entangled(d_eps: f64, start: (Povm, Povm), cfg: &SeesawConfig) -> Result<(Strategy, f64)> {
    let (mut a, mut b) = start;
    let mut value = f64::NEG_INFINITY;
    let mut best: Option<Strategy> = None;
    for _ in 0..cfg.max_rounds {
        let (rho, _) = best_state(&objective_operator(&a, &b)?, d_eps, &[])?;
        let mut s = Strategy::new(rho.clone(), a, b)?;
        let after_state = pwin(&s)?;
        check_monotone(value, after_state)?;
        measurement_round(&rho, &mut s)?;
        let after_meas = pwin(&s)?;
        check_monotone(after_state, after_meas)?;
        let improved = after_meas - value;
        value = after_meas;
        a = s.povm_a.clone();
        b = s.povm_b.clone();
        best = Some(s);
        if improved < cfg.tol {
            break;
        }
    }
    Ok((best.expect("at least one round"), value))
}

/// Alternating best responses with the state held fixed.
pub(crate) fn seesaw_measurements(
    rho: &DensityMatrix,
    start: (Povm, Povm),
    cfg: &SeesawConfig,
) -> Result<(Strategy, f64)> {
    let mut s = Strategy::new(rho.clone(), start.0, start.1)?;
    let mut value = pwin(&s)?;
    for _ in 0..cfg.max_rounds {
        measurement_round(rho, &mut s)?;
        let next = pwin(&s)?;
        check_monotone(value, next)?;
        let improved = next - value;
        value = next;
        if improved < cfg.tol {
            break;
        }
    }
    Ok((s, value))
}

/// Optimal winning probability of a resource class at a given
/// single-detection level.
pub fn optimize_pwin(kind: ResourceKind, d_eps: f64, cfg: &SeesawConfig) -> Result<BoundPoint> {
    check_d_eps(d_eps)?;
    if cfg.starts == 0 {
        return Err(Error::param("starts", "at least one start"));
    }
    let mut rng = seed::stream(cfg.seed, kind.name(), d_eps.to_bits());
    let fixed = match kind {
        ResourceKind::EntangledCoherent => None,
        ResourceKind::SeparableCoherent => {
            Some(crate::game::resource_state(&ResourceFamily::SeparableCoherent { d_eps })?)
        }
        ResourceKind::MixedNonCoherent => {
            Some(crate::game::resource_state(&ResourceFamily::MixedNonCoherent { d_eps })?)
        }
    };
    let mut best: Option<(Strategy, f64)> = None;
    for _ in 0..cfg.starts {
        let start = (random_measurement(&mut rng)?, random_measurement(&mut rng)?);
        let run = match &fixed {
            None => seesaw_entangled(d_eps, start, cfg)?,
            Some(rho) => seesaw_measurements(rho, start, cfg)?,
        };
        if best.as_ref().is_none_or(|(_, v)| run.1 > *v) {
            best = Some(run);
        }
    }
    let (strategy, value) = best.expect("starts > 0");
    if kind == ResourceKind::EntangledCoherent && d_eps < 1.0 {
        let p44 = strategy.rho.population(3);
        if p44 < d_eps - 1e-6 {
            return Err(Error::Solver(alloc::format!(
                "single-detection constraint slack at the optimum: {p44} < {d_eps}"
            )));
        }
    }
    let (mut strategy, mut value, mut params) = (strategy, value, None);
    if kind == ResourceKind::EntangledCoherent {
        if let Some(shape) = symmetric_shape(&strategy, d_eps) {
            let (p, v) = refine_symmetric(shape, d_eps)?;
            if v >= value - 1e-7 {
                params = Some(p);
                if v > value {
                    strategy = crate::game::param_strategy(p.c00, p.c01, d_eps, p.n_x)?;
                    value = v;
                }
            }
        }
    }
    Ok(BoundPoint { kind, d_eps, value: value.clamp(0.0, 1.0), params, strategy, method: Method::Seesaw })
}

/// Dominant eigenvector of a (numerically) pure real state, sign-fixed so
/// its largest component is positive.
fn dominant_vector(rho: &DensityMatrix) -> Option<Vec<f64>> {
    let eig = eig_hermitian(rho.matrix()).ok()?;
    if eig.max() < 1.0 - 1e-6 {
        return None;
    }
    let v = eig.vector(eig.values.len() - 1);
    let pivot = v.iter().copied().fold(re(0.0), |m, z| if z.norm() > m.norm() { z } else { m });
    let phase = pivot.conj() / pivot.norm();
    let w: Vec<_> = v.iter().map(|z| z * phase).collect();
    if w.iter().any(|z| z.im.abs() > 1e-6) {
        return None;
    }
    Some(w.iter().map(|z| z.re).collect())
}

fn bloch(p: &ComplexMatrix) -> (f64, f64) {
    (p.inner(&pauli::x()), p.inner(&pauli::z()))
}

/// Structural tolerance when matching an optimiser to the symmetric form.
/// Near flat optima the see-saw stops with the argmax off by ~1e-3, so the
/// shape check is loose and the match is then refined within the family.
const SHAPE_TOL: f64 = 1e-2;

/// Reads approximate `(c00, c01, n_x)` off a strategy, using the symmetries
/// of the game: relabelling both servers, a phase flip on one lab together
/// with its server's `X` component, and the global sign of the state.
pub fn symmetric_shape(s: &Strategy, d_eps: f64) -> Option<SymmetricParams> {
    if s.d() != 1 {
        return None;
    }
    let mut psi = dominant_vector(&s.rho)?;
    let (ea, eb) = (s.povm_a.element(0), s.povm_b.element(0));
    if (ea.trace().re - 1.0).abs() > SHAPE_TOL || (eb.trace().re - 1.0).abs() > SHAPE_TOL {
        return None;
    }
    let (mut ax, mut az) = bloch(ea);
    let (mut bx, mut bz) = bloch(eb);
    if az < 0.0 {
        (ax, az, bx, bz) = (-ax, -az, -bx, -bz);
    }
    if (bz - az).abs() > SHAPE_TOL {
        return None;
    }
    if (bx + ax).abs() < SHAPE_TOL && ax.abs() > SHAPE_TOL {
        // Z on Bob's qubit: |01> and |11> change sign.
        psi[1] = -psi[1];
        psi[3] = -psi[3];
        bx = -bx;
    }
    if (bx - ax).abs() > SHAPE_TOL {
        return None;
    }
    if psi[3] < 0.0 {
        psi.iter_mut().for_each(|x| *x = -*x);
    }
    if (psi[1] - psi[2]).abs() > SHAPE_TOL || (psi[3] * psi[3] - d_eps).abs() > SHAPE_TOL {
        return None;
    }
    let c00 = psi[0];
    let mag = sqrt(((1.0 - d_eps - c00 * c00) / 2.0).max(0.0));
    let c01 = if psi[1] < 0.0 { -mag } else { mag };
    Some(SymmetricParams { c00, c01, n_x: ax.clamp(-1.0, 1.0) })
}

/// Local maximisation of the closed form around `start`, in the angles
/// `c00 = r cos(phi)`, `c01 = r sin(phi) / sqrt 2`, `n_x = sin(t)` that keep
/// it feasible.
pub fn refine_symmetric(start: SymmetricParams, d_eps: f64) -> Result<(SymmetricParams, f64)> {
    check_d_eps(d_eps)?;
    let r = sqrt(1.0 - d_eps);
    let unpack = |x: [f64; 2]| SymmetricParams {
        c00: r * cos(x[0]),
        c01: r * sin(x[0]) / core::f64::consts::SQRT_2,
        n_x: sin(x[1]),
    };
    let value = |x: [f64; 2]| {
        let p = unpack(x);
        pwin_param(p.c00, p.c01, d_eps, p.n_x).unwrap_or(f64::NEG_INFINITY)
    };
    let phi = if r > 0.0 { libm::atan2(start.c01 * core::f64::consts::SQRT_2, start.c00) } else { 0.0 };
    let x0 = [phi, libm::asin(start.n_x.clamp(-1.0, 1.0))];
    let x = crate::math::nelder_mead_max(value, x0, 0.05, 1e-14, 2000);
    let p = unpack(x);
    Ok((p, pwin_param(p.c00, p.c01, d_eps, p.n_x)?))
}

/// Entanglement entropy (bits) of the pure state carried by the optimiser.
pub fn optimizer_entropy(point: &BoundPoint) -> Result<f64> {
    let psi = dominant_vector(&point.strategy.rho)
        .ok_or_else(|| Error::Solver(alloc::string::String::from("optimal state is not pure")))?;
    let pure = DensityMatrix::pure_real(&psi)?;
    Ok(von_neumann_entropy(&partial_trace(&pure, (2, 2), Keep::A)?))
}

/// `(d_eps, entropy)` of the entangled-coherent optimisers.
pub fn entanglement_entropy_curve(grid: &[f64], cfg: &SeesawConfig) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .map(|&d| {
            let p = optimize_pwin(ResourceKind::EntangledCoherent, d, cfg)?;
            Ok((d, optimizer_entropy(&p)?))
        })
        .collect()
}

/// Evenly spaced `start, start + step, ...` up to `end` (inclusive within
/// half a step), with the last point snapped to `end`.
pub fn linspace_step(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(end >= start) {
        return Err(Error::param("grid", "need step > 0 and end >= start"));
    }
    let n = crate::math::floor((end - start) / step + 0.5) as usize;
    let mut v: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).collect();
    if let Some(last) = v.last_mut() {
        if (*last - end).abs() < step / 2.0 {
            *last = end;
        }
    }
    Ok(v)
}
