//! Brute-force reference computations.
//!
//! Nothing here shares code with [`crate::game`] or [`crate::sdp`]: the state
//! transforms and the Born rule are re-implemented in plain real arithmetic
//! so that agreement with the see-saw is evidence rather than tautology.
//! Measurements are real projective qubit measurements with Bloch vector
//! `(sin t, 0, cos t)`, gridded in `t` over the full circle.

use alloc::vec::Vec;
use core::f64::consts::{SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::linalg::{sym_eigenvalues, RealMatrix};
use crate::math::{ceil, cos, sin, sqrt};
use crate::{Error, Result};

type M2 = [[f64; 2]; 2];
type M4 = [[f64; 4]; 4];

fn projector(t: f64) -> M2 {
    let (c, s) = (cos(t), sin(t));
    [[0.5 * (1.0 + c), 0.5 * s], [0.5 * s, 0.5 * (1.0 - c)]]
}

fn complement(p: &M2) -> M2 {
    [[1.0 - p[0][0], -p[0][1]], [-p[1][0], 1.0 - p[1][1]]]
}

/// `Tr[rho (A (x) B)]` with the two-qubit index `2 i + j`.
fn expect(rho: &M4, a: &M2, b: &M2) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    s += rho[2 * i + j][2 * k + l] * a[k][i] * b[l][j];
                }
            }
        }
    }
    s
}

/// The four forwarded states: blocked labs are replaced by vacuum.
fn forwarded(rho: &M4) -> [M4; 4] {
    let mut out = [[[0.0; 4]; 4]; 4];
    out[0] = *rho;
    for i in 0..2 {
        for k in 0..2 {
            // Bob blocks: rho_A (x) |0><0|.
            out[1][2 * i][2 * k] = (0..2).map(|j| rho[2 * i + j][2 * k + j]).sum();
            // Alice blocks: |0><0| (x) rho_B.
            out[2][i][k] = (0..2).map(|j| rho[2 * j + i][2 * j + k]).sum();
        }
    }
    out[3][0][0] = (0..4).map(|i| rho[i][i]).sum();
    out
}

/// Born-rule winning probability, linear in `rho` (any real 4x4 matrix).
pub fn pwin_born(rho: &M4, a0: &M2, b0: &M2) -> f64 {
    let a = [*a0, complement(a0)];
    let b = [*b0, complement(b0)];
    let states = forwarded(rho);
    let mut total = 0.0;
    for (idx, st) in states.iter().enumerate() {
        let parity = (idx >> 1) ^ (idx & 1);
        for (oa, pa) in a.iter().enumerate() {
            for (ob, pb) in b.iter().enumerate() {
                if oa ^ ob == parity {
                    total += expect(st, pa, pb);
                }
            }
        }
    }
    total / 4.0
}

/// Matrix `K` with `pwin(rho) = sum_ij rho_ij K_ij`.
fn response(a0: &M2, b0: &M2) -> M4 {
    let mut k = [[0.0; 4]; 4];
    for (i, row) in k.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let mut e = [[0.0; 4]; 4];
            e[i][j] = 1.0;
            *v = pwin_born(&e, a0, b0);
        }
    }
    k
}

fn quadratic(k: &M4, psi: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += psi[i] * psi[j] * k[i][j];
        }
    }
    s
}

fn grid(resolution: f64) -> Result<Vec<f64>> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::param("resolution", "must lie in (0, 1]"));
    }
    let n = ceil(TAU / resolution) as usize;
    Ok((0..n).map(|i| i as f64 * TAU / n as f64).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleBest {
    pub value: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    /// Amplitudes of the best pure state in `|00>, |01>, |10>, |11>`.
    pub state: [f64; 4],
}

impl OracleBest {
    fn empty() -> Self {
        Self { value: f64::NEG_INFINITY, theta_a: 0.0, theta_b: 0.0, state: [0.0; 4] }
    }
}

/// Grid over the symmetric state family `c00 |00> + c01 (|01> + |10>) +
/// sqrt(d) |11>` (with `c00 = r cos(phi)`, `c01 = r sin(phi) / sqrt 2`) and
/// independent measurement angles for the two servers, all at spacing
/// `resolution`.
pub fn grid_symmetric(d_eps: f64, resolution: f64) -> Result<OracleBest> {
    check(d_eps)?;
    let angles = grid(resolution)?;
    let r = sqrt(1.0 - d_eps);
    let states: Vec<[f64; 4]> = angles
        .iter()
        .map(|&phi| {
            let c01 = r * sin(phi) / SQRT_2;
            [r * cos(phi), c01, c01, sqrt(d_eps)]
        })
        .collect();
    let mut best = OracleBest::empty();
    for &ta in &angles {
        let pa = projector(ta);
        for &tb in &angles {
            let k = response(&pa, &projector(tb));
            for psi in &states {
                let v = quadratic(&k, psi);
                if v > best.value {
                    best = OracleBest { value: v, theta_a: ta, theta_b: tb, state: *psi };
                }
            }
        }
    }
    Ok(best)
}

/// Largest eigenvalue and eigenvector of a real symmetric matrix by power
/// iteration on a shifted copy; adequate for the 3x3 and 4x4 blocks here.
fn top_eigen(m: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = m.len();
    let mut rm = RealMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            rm[(i, j)] = m[i][j];
        }
    }
    let vals = sym_eigenvalues(&rm);
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Inverse iteration at the known eigenvalue gives the vector.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    for _ in 0..4 {
        let mut a: Vec<f64> = Vec::with_capacity(n * n);
        for (i, row) in m.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                a.push(x - if i == j { top + 1e-10 } else { 0.0 });
            }
        }
        if let Some(w) = crate::linalg::solve_dense(a, v.clone()) {
            let norm = sqrt(w.iter().map(|x| x * x).sum());
            if norm > 0.0 {
                v = w.iter().map(|x| x / norm).collect();
            }
        }
    }
    (top, v)
}

/// Grid over both measurement angles with the state optimised exactly for
/// each pair: the top eigenvector of the response restricted to the
/// complement of `|11>` when `d_eps = 0`, and otherwise the one-dimensional
/// dual `min_{l >= 0} lambda_max(K - l P_11) + l d_eps` by golden section.
pub fn grid_exact_state(d_eps: f64, resolution: f64) -> Result<OracleBest> {
    check(d_eps)?;
    let angles = grid(resolution)?;
    let mut best = OracleBest::empty();
    for &ta in &angles {
        let pa = projector(ta);
        for &tb in &angles {
            let k = response(&pa, &projector(tb));
            let sym: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| 0.5 * (k[i][j] + k[j][i])).collect()).collect();
            let (value, state) = if d_eps == 0.0 {
                let block: Vec<Vec<f64>> = (0..3).map(|i| sym[i][..3].to_vec()).collect();
                let (v, w) = top_eigen(&block);
                (v, [w[0], w[1], w[2], 0.0])
            } else {
                let shifted = |l: f64| {
                    let mut m = sym.clone();
                    m[3][3] -= l;
                    m
                };
                let dual = |l: f64| top_eigen(&shifted(l)).0 + l * d_eps;
                let l = golden_min(dual, 0.0, 4.0);
                let (_, w) = top_eigen(&shifted(l));
                (dual(l), [w[0], w[1], w[2], w[3]])
            };
            if value > best.value {
                best = OracleBest { value, theta_a: ta, theta_b: tb, state };
            }
        }
    }
    Ok(best)
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (sqrt(5.0) - 1.0);
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..80 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Grid over both measurement angles for a fixed state; trivial
/// measurements (always 0) are included for each server.
pub fn grid_fixed_state(rho: &M4, resolution: f64) -> Result<OracleBest> {
    let angles = grid(resolution)?;
    let mut options: Vec<(f64, M2)> = angles.iter().map(|&t| (t, projector(t))).collect();
    options.push((f64::NAN, [[1.0, 0.0], [0.0, 1.0]]));
    let mut best = OracleBest::empty();
    for (ta, pa) in &options {
        for (tb, pb) in &options {
            let v = pwin_born(rho, pa, pb);
            if v > best.value {
                best = OracleBest { value: v, theta_a: *ta, theta_b: *tb, state: [0.0; 4] };
            }
        }
    }
    Ok(best)
}

/// Best classical strategy for a diagonal (non-coherent) resource: each
/// server outputs a fixed function of the photon number it receives. The
/// 16 pairs of functions are enumerated; by convexity no randomised
/// strategy does better.
pub fn classical_best(populations: [f64; 4]) -> f64 {
    let mut rho = [[0.0; 4]; 4];
    for i in 0..4 {
        rho[i][i] = populations[i];
    }
    let mut best = f64::NEG_INFINITY;
    for fa in 0..4u8 {
        for fb in 0..4u8 {
            // Outcome-0 projector: photon numbers n with f(n) = 0.
            let diag = |f: u8| -> M2 {
                [[if f & 1 == 0 { 1.0 } else { 0.0 }, 0.0], [0.0, if f & 2 == 0 { 1.0 } else { 0.0 }]]
            };
            best = best.max(pwin_born(&rho, &diag(fa), &diag(fb)));
        }
    }
    best
}

/// Density matrix of a real pure state.
pub fn pure(psi: &[f64; 4]) -> M4 {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = psi[i] * psi[j];
        }
    }
    m
}

fn check(d_eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&d_eps) {
        return Err(Error::param("d_eps", "must lie in [0, 1]"));
    }
    Ok(())
}

/// Second, independently written forms of the finite-key expressions, used
/// by the formula audit. Exponentials are taken as powers of `e`,
/// logarithms through `ln`, so no code path is shared with
/// [`crate::finitekey`].
pub mod formulas {
    use core::f64::consts::{E, LN_2};

    use crate::math::{floor, ln, powf};

    pub fn azuma_pwin(m: f64, eps_prime: f64, max_pwin: f64) -> f64 {
        let x = eps_prime / (1.0 + max_pwin);
        powf(E, -m * x * x / 32.0)
    }

    pub fn pwin_detection(m: f64, eps_prime: f64, delta_prime: f64, pwin_hat: f64, max_pwin: f64) -> f64 {
        powf(E, -(m / 8.0) * delta_prime * delta_prime * (pwin_hat - eps_prime)) + azuma_pwin(m, eps_prime, max_pwin)
    }

    pub fn deps(m: f64, gamma: f64, eps: f64, delta: f64, deps_hat: f64) -> f64 {
        let chernoff = if deps_hat <= eps {
            1.0
        } else {
            powf(E, -(delta * gamma) * (delta * gamma) * m * (deps_hat - eps) / 8.0)
        };
        let azuma = 2.0 * powf(E, -(gamma * m) * (eps * eps) / 32.0);
        chernoff.min(1.0) + if azuma > 1.0 { 1.0 } else { azuma }
    }

    pub fn tilde(pwin_hat: f64, deps_hat: f64, eps: f64, delta: f64, eps_prime: f64, delta_prime: f64) -> (f64, f64) {
        (pwin_hat - eps_prime - delta_prime * (pwin_hat - eps_prime), (deps_hat + eps) / (1.0 - delta))
    }

    pub fn binary_entropy(p: f64) -> f64 {
        if p == 0.0 || p == 1.0 {
            return 0.0;
        }
        -(p * ln(p) + (1.0 - p) * ln(1.0 - p)) / LN_2
    }

    pub fn leakage(d_size: f64, eta: f64, eps_ir: f64) -> f64 {
        d_size * binary_entropy(1.1 * eta) + (ln(2.0) - ln(eps_ir)) / LN_2
    }

    pub fn error_rate_failure(d_size: f64, eta: f64, gamma: f64) -> f64 {
        (2.0 * powf(E, -gamma * eta * d_size / 250.0)).min(1.0)
    }

    pub fn pa_cost(eps_pa: f64) -> f64 {
        -2.0 * ln(eps_pa) / LN_2
    }

    pub fn key_bits(kappa: f64, d_size: f64, ell: f64, pa_cost: f64) -> f64 {
        floor(floor(kappa * d_size) - ell - pa_cost).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_resource() {
        let z = projector(0.0);
        let rho = pure(&[0.0, 0.0, 0.0, 1.0]);
        // Outcome 0 on vacuum, 1 on a photon.
        assert!((pwin_born(&rho, &z, &z) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classical_value_at_zero() {
        assert!((classical_best([0.0, 0.0, 1.0, 0.0]) - 0.5).abs() < 1e-15);
        assert!((classical_best([0.0, 0.0, 0.6, 0.4]) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn bell_state_with_x_measurements() {
        let h = 1.0 / SQRT_2;
        let x = projector(core::f64::consts::FRAC_PI_2);
        assert!((pwin_born(&pure(&[0.0, h, h, 0.0]), &x, &x) - 0.625).abs() < 1e-15);
    }

    #[test]
    fn coarse_grids_are_consistent() {
        let sym = grid_symmetric(0.0, 0.05).unwrap();
        let exact = grid_exact_state(0.0, 0.05).unwrap();
        assert!(exact.value >= sym.value - 1e-12);
        assert!((exact.value - 0.625).abs() < 1e-3);
        let e = grid_exact_state(0.3, 0.1).unwrap();
        let s = grid_symmetric(0.3, 0.1).unwrap();
        assert!(e.value >= s.value - 1e-9);
    }
}
