//! Dense semidefinite programming for small Hermitian problems.
//!
//! Solves
//!
//! ```text
//! maximize    Re Tr(C X)
//! subject to  Re Tr(A_i X) = b_i
//!             Re Tr(G_j X) <= g_j
//!             X >= 0
//! ```
//!
//! with an infeasible-start primal-dual interior-point method (Nesterov-Todd
//! scaling, Mehrotra predictor-corrector). Complex Hermitian variables are
//! embedded in the real symmetric cone as `[[Re X, -Im X], [Im X, Re X]]`;
//! when every data matrix is real the embedding is skipped, since the real
//! part of any optimal complex solution is then itself optimal. Each
//! inequality gets a scalar slack that is appended as a `1 x 1` diagonal block.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{jacobi_svd, solve_dense, sym_eigen, sym_eigenvalues, RealMatrix};
use crate::math::sqrt;
use crate::qmat::{c, eig_hermitian, ComplexMatrix};
use crate::{Error, Result};

/// A linear-trace constraint `Re Tr(M X) (=|<=) rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceConstraint {
    pub matrix: ComplexMatrix,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    objective: ComplexMatrix,
    equalities: Vec<TraceConstraint>,
    inequalities: Vec<TraceConstraint>,
}

impl SdpProblem {
    pub fn new(
        objective: ComplexMatrix,
        equalities: Vec<TraceConstraint>,
        inequalities: Vec<TraceConstraint>,
    ) -> Result<Self> {
        if !objective.is_square() {
            return Err(Error::DimensionMismatch { expected: objective.rows(), found: objective.cols() });
        }
        if equalities.is_empty() {
            return Err(Error::param("equalities", "at least one equality (normalisation) is required"));
        }
        let n = objective.rows();
        let herm_tol = 1e-9;
        for m in core::iter::once(&objective).chain(equalities.iter().chain(&inequalities).map(|c| &c.matrix)) {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.rows() });
            }
            let r = m.hermiticity_residual();
            if r > herm_tol * m.frobenius_norm().max(1.0) {
                return Err(Error::NotHermitian(r));
            }
        }
        for con in equalities.iter().chain(&inequalities) {
            if !con.rhs.is_finite() {
                return Err(Error::param("rhs", "non-finite right-hand side"));
            }
        }
        Ok(Self { objective, equalities, inequalities })
    }

    /// `max Tr(C X)` over density matrices.
    pub fn over_states(objective: ComplexMatrix) -> Result<Self> {
        let n = objective.rows();
        Self::new(objective, vec![TraceConstraint { matrix: ComplexMatrix::identity(n), rhs: 1.0 }], vec![])
    }

    /// Adds `Re Tr(G X) <= rhs`.
    pub fn with_inequality(mut self, matrix: ComplexMatrix, rhs: f64) -> Result<Self> {
        self.inequalities.push(TraceConstraint { matrix, rhs });
        Self::new(self.objective, self.equalities, self.inequalities)
    }

    pub fn dim(&self) -> usize {
        self.objective.rows()
    }

    pub fn objective(&self) -> &ComplexMatrix {
        &self.objective
    }

    pub fn equalities(&self) -> &[TraceConstraint] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[TraceConstraint] {
        &self.inequalities
    }

    fn is_real(&self) -> bool {
        self.objective.is_real() && self.equalities.iter().chain(&self.inequalities).all(|c| c.matrix.is_real())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// Primal optimiser (Hermitian, PSD up to solver accuracy).
    pub x: ComplexMatrix,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `dual_value - primal_value`.
    pub gap: f64,
    pub status: SdpStatus,
    /// Dual multipliers of the equality constraints.
    pub eq_multipliers: Vec<f64>,
    /// Dual multipliers of the inequality constraints (non-negative).
    pub ineq_multipliers: Vec<f64>,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    pub fn ensure_optimal(self) -> Result<Self> {
        match self.status {
            SdpStatus::Optimal => Ok(self),
            s => Err(Error::Solver(format!("{s:?} after {} iterations (gap {:e})", self.iterations, self.gap))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Relative tolerance on both feasibility residuals.
    pub tol: f64,
    /// Relative duality gap the iteration keeps pushing towards once `tol` is
    /// met. The optimiser error can scale like the square root of the gap,
    /// so stopping at `tol` would leave `X` accurate to only ~1e-4.
    pub gap_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-8, gap_tol: 1e-15 }
    }
}

pub fn solve(p: &SdpProblem) -> SdpSolution {
    solve_with(p, SolverOptions::default())
}

pub fn solve_with(p: &SdpProblem, opts: SolverOptions) -> SdpSolution {
    let real = p.is_real();
    let n = p.dim();
    let block = if real { n } else { 2 * n };
    let k = p.inequalities.len();
    let size = block + k;

    let embed = |m: &ComplexMatrix| -> RealMatrix {
        let mut r = RealMatrix::zeros(size);
        if real {
            for i in 0..n {
                for j in 0..n {
                    r[(i, j)] = m[(i, j)].re;
                }
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    let z = m[(i, j)];
                    r[(i, j)] = 0.5 * z.re;
                    r[(i + n, j + n)] = 0.5 * z.re;
                    r[(i + n, j)] = 0.5 * z.im;
                    r[(i, j + n)] = -0.5 * z.im;
                }
            }
        }
        r.symmetrize();
        r
    };

    let objective = embed(&p.objective);
    let mut constraints = Vec::with_capacity(p.equalities.len() + k);
    let mut rhs = Vec::with_capacity(p.equalities.len() + k);
    for e in &p.equalities {
        constraints.push(embed(&e.matrix));
        rhs.push(e.rhs);
    }
    for (j, g) in p.inequalities.iter().enumerate() {
        let mut m = embed(&g.matrix);
        m[(block + j, block + j)] = 1.0;
        constraints.push(m);
        rhs.push(g.rhs);
    }

    let out = interior_point(&objective, &constraints, &rhs, opts);

    let y = &out.x;
    let x = if real {
        ComplexMatrix::from_fn(n, n, |i, j| c(y[(i, j)], 0.0))
    } else {
        ComplexMatrix::from_fn(n, n, |i, j| {
            c(0.5 * (y[(i, j)] + y[(i + n, j + n)]), 0.5 * (y[(i + n, j)] - y[(j + n, i)]))
        })
    };
    let x = x.hermitian_part();
    let neq = p.equalities.len();
    SdpSolution {
        x,
        primal_value: out.primal,
        dual_value: out.dual,
        gap: out.dual - out.primal,
        status: out.status,
        eq_multipliers: out.multipliers[..neq].to_vec(),
        ineq_multipliers: out.multipliers[neq..].to_vec(),
        iterations: out.iterations,
    }
}

struct IpmOutput {
    x: RealMatrix,
    multipliers: Vec<f64>,
    primal: f64,
    dual: f64,
    status: SdpStatus,
    iterations: usize,
}

/// Nesterov-Todd scaling `W = G G'` with `G' Z G = G^-1 X G^-T = diag(lambda)`.
struct NtScaling {
    g: RealMatrix,
    g_inv: RealMatrix,
    w: RealMatrix,
    lambda: Vec<f64>,
}

impl NtScaling {
    fn new(x: &RealMatrix, z: &RealMatrix) -> Option<Self> {
        let l = x.cholesky()?;
        let r = z.cholesky()?;
        // R' L = U diag(lambda) V'
        let (lambda, v) = jacobi_svd(&r.transpose().matmul(&l));
        if lambda.iter().any(|s| !(*s > 0.0)) {
            return None;
        }
        let n = x.n;
        let l_inv = l.lower_inverse();
        let mut g = l.matmul(&v);
        let mut g_inv = v.transpose().matmul(&l_inv);
        for i in 0..n {
            let s = sqrt(lambda[i]);
            for k in 0..n {
                g[(k, i)] /= s;
                g_inv[(i, k)] *= s;
            }
        }
        let mut w = g.matmul(&g.transpose());
        w.symmetrize();
        Some(Self { g, g_inv, w, lambda })
    }

    fn scale_primal(&self, dx: &RealMatrix) -> RealMatrix {
        self.g_inv.matmul(dx).matmul(&self.g_inv.transpose())
    }

    fn scale_dual(&self, dz: &RealMatrix) -> RealMatrix {
        self.g.transpose().matmul(dz).matmul(&self.g)
    }

    fn unscale_primal(&self, d: &RealMatrix) -> RealMatrix {
        let mut out = self.g.matmul(d).matmul(&self.g.transpose());
        out.symmetrize();
        out
    }

    /// Solves `(lambda D + D lambda) / 2 = rc` for `D`.
    fn lyapunov(&self, rc: &RealMatrix) -> RealMatrix {
        let n = rc.n;
        let mut d = RealMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                d[(i, j)] = 2.0 * rc[(i, j)] / (self.lambda[i] + self.lambda[j]);
            }
        }
        d
    }
}

/// Largest `alpha` with `X + alpha * dX` PSD (infinite when no bound).
fn max_step(x: &RealMatrix, dx: &RealMatrix) -> f64 {
    let l = match x.cholesky() {
        Some(l) => l,
        None => return 0.0,
    };
    let li = l.lower_inverse();
    let s = li.matmul(dx).matmul(&li.transpose());
    let lmin = sym_eigenvalues(&s).into_iter().fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

// Maximises <C, X> s.t. <A_i, X> = b_i, X >= 0. Internally the minimisation
// form min <-C, X> with dual max b'y, Z = -C - sum y_i A_i is iterated.
fn interior_point(c_max: &RealMatrix, a: &[RealMatrix], b: &[f64], opts: SolverOptions) -> IpmOutput {
    let size = c_max.n;
    let m = a.len();
    let mut cmin = c_max.clone();
    cmin.scale_mut(-1.0);
    let norm_b = 1.0 + sqrt(b.iter().map(|v| v * v).sum());
    let norm_c = 1.0 + cmin.norm();

    let mut x = RealMatrix::identity(size);
    let mut z = RealMatrix::scaled_identity(size, norm_c);
    let mut y = vec![0.0; m];
    let mut converged = false;
    // Residuals within reach of the Newton polish.
    let mut near = false;
    let mut infeasible = false;
    let mut iterations = 0;

    let at_y = |y: &[f64]| {
        let mut s = RealMatrix::zeros(size);
        for (ai, yi) in a.iter().zip(y) {
            s.add_scaled(ai, *yi);
        }
        s
    };

    // One pass past the cap so the final iterate is assessed too.
    for iter in 0..=opts.max_iter {
        iterations = iter;
        let rp: Vec<f64> = a.iter().zip(b).map(|(ai, bi)| bi - ai.dot(&x)).collect();
        let mut rd = cmin.sub(&z);
        rd.add_scaled(&at_y(&y), -1.0);
        if rd.norm() < 1e-13 * norm_c {
            // Once dual feasible, rebuild Z from y so that round-off in Rd is
            // not amplified by the scaling (W Rd W grows like 1/mu).
            let mut zf = cmin.sub(&at_y(&y));
            zf.symmetrize();
            if zf.cholesky().is_some() {
                z = zf;
                rd = RealMatrix::zeros(size);
            }
        }
        let pobj = cmin.dot(&x);
        let dobj: f64 = b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
        let xz = x.dot(&z);
        let mu = xz / size as f64;

        // Weak duality for an infeasible iterate: the duality gap equals
        // <X, Z> + <X, Rd> - y'rp and <X, Z> >= 0.
        debug_assert!(
            pobj - dobj
                >= x.dot(&rd) - y.iter().zip(&rp).map(|(yi, ri)| yi * ri).sum::<f64>() - 1e-8 * (1.0 + pobj.abs()),
            "weak duality violated at iteration {iter}"
        );

        let scale = 1.0 + pobj.abs() + dobj.abs();
        let pinf = sqrt(rp.iter().map(|v| v * v).sum()) / norm_b;
        let dinf = rd.norm() / norm_c;
        let rel_gap = (pobj - dobj).abs().max(xz) / scale;
        converged = rel_gap < opts.tol && pinf < opts.tol && dinf < opts.tol;
        near = rel_gap < 1e-6 && pinf < 1e-6 && dinf < 1e-6;
        if converged && rel_gap < opts.gap_tol || iter == opts.max_iter {
            break;
        }

        // Primal infeasibility certificate: A'y <= 0 with b'y > 0, seen as a
        // diverging dual objective.
        if dobj > 1e6 * norm_c {
            let aty = at_y(&y);
            let lmax = sym_eigenvalues(&aty).into_iter().fold(f64::NEG_INFINITY, f64::max);
            if lmax / dobj < 1e-6 {
                infeasible = true;
                break;
            }
        }

        let nt = match NtScaling::new(&x, &z) {
            Some(nt) => nt,
            None => break,
        };

        // Schur complement M_ij = Tr(A_i W A_j W).
        let wa: Vec<RealMatrix> = a.iter().map(|aj| nt.w.matmul(aj).matmul(&nt.w)).collect();
        let mut schur = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = a[i].dot(&wa[j]);
                schur[i * m + j] = v;
                schur[j * m + i] = v;
            }
        }
        let w_rd_w = nt.w.matmul(&rd).matmul(&nt.w);

        // Direction for the scaled complementarity residual `rc`: solves
        // dX + W dZ W = G lyap(rc) G', A(dX) = rp, dZ = Rd - A'dy.
        let direction = |rc: &RealMatrix| -> Option<(RealMatrix, Vec<f64>, RealMatrix)> {
            let k = nt.unscale_primal(&nt.lyapunov(rc));
            let r: Vec<f64> = a.iter().zip(&rp).map(|(ai, ri)| ri - ai.dot(&k) + ai.dot(&w_rd_w)).collect();
            let dy = solve_dense(schur.clone(), r)?;
            let mut dz = rd.clone();
            dz.add_scaled(&at_y(&dy), -1.0);
            dz.symmetrize();
            let mut dx = k;
            dx.add_scaled(&nt.w.matmul(&dz).matmul(&nt.w), -1.0);
            dx.symmetrize();
            Some((dx, dy, dz))
        };

        let lambda_sq = RealMatrix::diagonal(&nt.lambda.iter().map(|l| l * l).collect::<Vec<_>>());
        let mut rc = lambda_sq.clone();
        rc.scale_mut(-1.0);
        let (dxa, _, dza) = match direction(&rc) {
            Some(d) => d,
            None => break,
        };
        let ap = max_step(&x, &dxa).min(1.0);
        let ad = max_step(&z, &dza).min(1.0);
        let mut xa = x.clone();
        xa.add_scaled(&dxa, ap);
        let mut za = z.clone();
        za.add_scaled(&dza, ad);
        let mu_aff = xa.dot(&za) / size as f64;
        let ratio = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0) } else { 0.0 };
        let sigma = ratio * ratio * ratio;

        // Mehrotra corrector in the scaled space.
        let sx = nt.scale_primal(&dxa);
        let sz = nt.scale_dual(&dza);
        let mut second = sx.matmul(&sz);
        second.symmetrize();
        let mut rc = RealMatrix::scaled_identity(size, sigma * mu);
        rc.add_scaled(&lambda_sq, -1.0);
        rc.add_scaled(&second, -1.0);
        let (dx, dy, dz) = match direction(&rc) {
            Some(d) => d,
            None => break,
        };
        let ap = (0.95 * max_step(&x, &dx)).min(1.0);
        let ad = (0.95 * max_step(&z, &dz)).min(1.0);
        if !(ap > 0.0) || !(ad > 0.0) || (converged && ap.min(ad) < 1e-3) {
            break;
        }
        x.add_scaled(&dx, ap);
        x.symmetrize();
        for (yi, di) in y.iter_mut().zip(&dy) {
            *yi += ad * di;
        }
        z.add_scaled(&dz, ad);
        z.symmetrize();
        iterations = iter + 1;
    }

    // A scaling breakdown just short of the tolerances is common on faces
    // where X and Z are both nearly singular. The polish either certifies
    // the point (X = UU' exact, Z PSD, Z U = 0, residual < 1e-9) or is
    // discarded.
    if converged || (near && !infeasible) {
        if let Some((xp, yp)) = polish(&x, &y, &cmin, a, b) {
            x = xp;
            y = yp;
            converged = true;
        }
    }

    // Iterates that already meet the residual tolerances when progress
    // stalls are accepted; `gap_tol` only governs how far we push.
    let status = if infeasible {
        SdpStatus::Infeasible
    } else if converged {
        SdpStatus::Optimal
    } else {
        SdpStatus::MaxIter
    };
    let primal = c_max.dot(&x);
    let dual = -b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum::<f64>();
    IpmOutput { x, multipliers: y.iter().map(|v| -v).collect(), primal, dual, status, iterations }
}

/// Newton refinement on the optimal face.
///
/// Interior-point iterates stall once `mu` reaches ~1e-12, which leaves the
/// optimiser accurate only to about `sqrt(mu)`. With the rank `r` of `X` read
/// off its spectrum, `X = U U'` and the square system `Z(y) U = 0`,
/// `<A_i, U U'> = b_i` is solved by damped Gauss-Newton. The result is
/// kept only if it is strictly better and the dual slack stays PSD.
fn polish(x: &RealMatrix, y: &[f64], cmin: &RealMatrix, a: &[RealMatrix], b: &[f64]) -> Option<(RealMatrix, Vec<f64>)> {
    let n = x.n;
    let m = a.len();
    let (vals, vecs) = sym_eigen(x);
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&k| vals[k] > 1e-5 * top).collect();
    let r = keep.len();
    if r == 0 || r == n {
        return None;
    }
    let mut u = vec![0.0; n * r]; // column-major
    for (c, &k) in keep.iter().enumerate() {
        let s = sqrt(vals[k]);
        for i in 0..n {
            u[c * n + i] = vecs[(i, k)] * s;
        }
    }
    let mut y = y.to_vec();

    let residual = |u: &[f64], y: &[f64]| -> Vec<f64> {
        let mut z = cmin.clone();
        for (ai, yi) in a.iter().zip(y) {
            z.add_scaled(ai, -yi);
        }
        let mut f = Vec::with_capacity(n * r + m);
        for c in 0..r {
            for i in 0..n {
                f.push((0..n).map(|k| z[(i, k)] * u[c * n + k]).sum());
            }
        }
        for (ai, bi) in a.iter().zip(b) {
            let mut v = -bi;
            for c in 0..r {
                for i in 0..n {
                    for k in 0..n {
                        v += u[c * n + i] * ai[(i, k)] * u[c * n + k];
                    }
                }
            }
            f.push(v);
        }
        f
    };
    let norm = |f: &[f64]| sqrt(f.iter().map(|v| v * v).sum());

    let start = norm(&residual(&u, &y));
    let mut best = start;
    let unknowns = n * r + m;
    for _ in 0..8 {
        let f = residual(&u, &y);
        let mut z = cmin.clone();
        for (ai, yi) in a.iter().zip(&y) {
            z.add_scaled(ai, -yi);
        }
        let au: Vec<Vec<f64>> = a
            .iter()
            .map(|ai| {
                let mut v = vec![0.0; n * r];
                for c in 0..r {
                    for i in 0..n {
                        v[c * n + i] = (0..n).map(|k| ai[(i, k)] * u[c * n + k]).sum();
                    }
                }
                v
            })
            .collect();
        // Jacobian, rows = equations, columns = unknowns.
        let rows = f.len();
        let mut jac = vec![0.0; rows * unknowns];
        for c in 0..r {
            for k in 0..n {
                let col = c * n + k;
                for i in 0..n {
                    jac[(c * n + i) * unknowns + col] = z[(i, k)];
                }
                for (ie, aui) in au.iter().enumerate() {
                    jac[(n * r + ie) * unknowns + col] = 2.0 * aui[c * n + k];
                }
            }
        }
        for (ie, aui) in au.iter().enumerate() {
            let col = n * r + ie;
            for c in 0..r {
                for i in 0..n {
                    jac[(c * n + i) * unknowns + col] = -aui[c * n + i];
                }
            }
        }
        let mut jtj = vec![0.0; unknowns * unknowns];
        let mut jtf = vec![0.0; unknowns];
        for row in 0..rows {
            let jr = &jac[row * unknowns..(row + 1) * unknowns];
            for p in 0..unknowns {
                if jr[p] == 0.0 {
                    continue;
                }
                jtf[p] -= jr[p] * f[row];
                for q in 0..unknowns {
                    jtj[p * unknowns + q] += jr[p] * jr[q];
                }
            }
        }
        let diag_max = (0..unknowns).map(|p| jtj[p * unknowns + p]).fold(0.0, f64::max);
        for p in 0..unknowns {
            jtj[p * unknowns + p] += 1e-13 * diag_max;
        }
        let step = solve_dense(jtj, jtf)?;
        for (v, d) in u.iter_mut().zip(&step[..n * r]) {
            *v += d;
        }
        for (v, d) in y.iter_mut().zip(&step[n * r..]) {
            *v += d;
        }
        let now = norm(&residual(&u, &y));
        if !(now < best) {
            break;
        }
        best = now;
    }
    if !(best < start) || !(best < 1e-9) {
        return None;
    }
    let mut z = cmin.clone();
    for (ai, yi) in a.iter().zip(&y) {
        z.add_scaled(ai, -yi);
    }
    if sym_eigenvalues(&z).into_iter().fold(f64::INFINITY, f64::min) < -1e-10 {
        return None;
    }
    let mut xp = RealMatrix::zeros(n);
    for c in 0..r {
        for i in 0..n {
            for k in 0..n {
                xp[(i, k)] += u[c * n + i] * u[c * n + k];
            }
        }
    }
    Some((xp, y))
}

/// Residuals of the optimality conditions of a returned solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktReport {
    /// Worst violation of an equality, an inequality, Hermiticity or PSD-ness of `X`.
    pub primal_feasibility: f64,
    /// Worst violation of `Z = sum w_i A_i + sum z_j G_j - C >= 0` and `z >= 0`.
    pub dual_feasibility: f64,
    /// Largest of `|Tr(X Z)|` and `|z_j (g_j - Tr(G_j X))|`.
    pub complementarity: f64,
}

impl KktReport {
    pub fn worst(&self) -> f64 {
        self.primal_feasibility.max(self.dual_feasibility).max(self.complementarity)
    }

    pub fn accepted(&self) -> bool {
        self.worst() <= 1e-6
    }
}

/// Recomputes every KKT residual from the problem data; never fails.
pub fn verify_kkt(p: &SdpProblem, s: &SdpSolution) -> KktReport {
    let x = &s.x;
    let mut primal = x.hermiticity_residual();
    for e in &p.equalities {
        primal = primal.max((x.inner(&e.matrix) - e.rhs).abs());
    }
    for g in &p.inequalities {
        primal = primal.max((x.inner(&g.matrix) - g.rhs).max(0.0));
    }
    let x_min = eig_hermitian(&x.hermitian_part()).map(|e| e.min()).unwrap_or(f64::NEG_INFINITY);
    primal = primal.max(-x_min);

    let mut zmat = p.objective.scale(-1.0);
    for (e, w) in p.equalities.iter().zip(&s.eq_multipliers) {
        zmat = &zmat + &e.matrix.scale(*w);
    }
    for (g, w) in p.inequalities.iter().zip(&s.ineq_multipliers) {
        zmat = &zmat + &g.matrix.scale(*w);
    }
    let z_min = eig_hermitian(&zmat.hermitian_part()).map(|e| e.min()).unwrap_or(f64::NEG_INFINITY);
    let mut dual = (-z_min).max(0.0);
    for w in &s.ineq_multipliers {
        dual = dual.max(-w);
    }

    let mut comp = x.inner(&zmat).abs();
    for (g, w) in p.inequalities.iter().zip(&s.ineq_multipliers) {
        comp = comp.max((w * (g.rhs - x.inner(&g.matrix))).abs());
    }
    KktReport { primal_feasibility: primal, dual_feasibility: dual, complementarity: comp }
}
