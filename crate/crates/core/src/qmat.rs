//! Dense complex linear algebra for the small Hermitian matrices used
//! throughout the crate (dimension at most a few dozen).

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::math::{log2, sqrt};
use crate::{Error, Result};

pub type C64 = Complex64;

/// Tolerances shared by every validity check in the crate.
pub mod tol {
    /// Hermiticity residual, measured entrywise.
    pub const HERM: f64 = 1e-9;
    /// Deviation of a trace from one, or of a POVM sum from identity.
    pub const TRACE: f64 = 1e-9;
    /// Most negative eigenvalue tolerated in a PSD operator.
    pub const PSD: f64 = 1e-8;
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = re(1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major complex entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row-major real entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| re(x)).collect())
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = re(v);
        }
        m
    }

    /// The outer product `|v><v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    /// `|i><i|` in dimension `n`.
    pub fn basis_projector(n: usize, i: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, i)] = re(1.0);
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * k).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        debug_assert!(self.cols == other.rows && self.rows == other.cols);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    /// `Re Tr(A B)`, the real inner product for Hermitian pairs.
    pub fn inner(&self, other: &Self) -> f64 {
        self.trace_product(other).re
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, found: other.rows * other.cols });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self + other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        Ok(self * other)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols, "shape mismatch in add");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols, "shape mismatch in sub");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in mul");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Kronecker product: entry `(i*rb + k, j*cb + l)` is `a[i,j] * b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * rb, a.cols * cb, |r, s| a[(r / rb, s / cb)] * b[(r % rb, s % cb)])
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows()).map(|i| self.vectors[(i, k)]).collect()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Cyclic complex Jacobi eigensolver.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Eigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.rows, found: m.cols });
    }
    let scale = m.frobenius_norm().max(1.0);
    let herm = m.hermiticity_residual();
    if herm > tol::HERM * scale {
        return Err(Error::NotHermitian(herm));
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off == 0.0 || sqrt(off) <= 1e-16 * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase_conj = (apq / mag).conj();
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + sqrt(1.0 + tau * tau))
                };
                let cs = 1.0 / sqrt(1.0 + t * t);
                let sn = t * cs;
                // R = diag(1, e^{-i phi}) * [[c, s], [-s, c]]
                let r_pp = re(cs);
                let r_pq = re(sn);
                let r_qp = phase_conj * (-sn);
                let r_qq = phase_conj * cs;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * r_pp + akq * r_qp;
                    a[(k, q)] = akp * r_pq + akq * r_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = r_pp.conj() * apk + r_qp.conj() * aqk;
                    a[(q, k)] = r_pq.conj() * apk + r_qq.conj() * aqk;
                }
                a[(p, q)] = re(0.0);
                a[(q, p)] = re(0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * r_pp + vkq * r_qp;
                    v[(k, q)] = vkp * r_pq + vkq * r_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok(Eigen { values, vectors })
}

/// Which tensor factor survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of an operator on `C^dA (x) C^dB`.
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: (usize, usize), keep: Keep) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if !m.is_square() || m.rows != da * db {
        return Err(Error::DimensionMismatch { expected: da * db, found: m.rows });
    }
    Ok(match keep {
        Keep::A => ComplexMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Keep::B => ComplexMatrix::from_fn(db, db, |k, l| (0..da).map(|i| m[(i * db + k, i * db + l)]).sum()),
    })
}

/// Trace-one positive-semidefinite Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch { expected: mat.rows, found: mat.cols });
        }
        let herm = mat.hermiticity_residual();
        if herm > tol::HERM {
            return Err(Error::NotHermitian(herm));
        }
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > tol::TRACE {
            return Err(Error::TraceNotOne(tr));
        }
        let mat = mat.hermitian_part();
        let min = eig_hermitian(&mat)?.min();
        if min < -tol::PSD {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { mat })
    }

    /// Hermitises and renormalises a numerically computed state before
    /// validating it; used on solver output.
    pub fn from_approximate(mat: &ComplexMatrix) -> Result<Self> {
        let h = mat.hermitian_part();
        let tr = h.trace().re;
        if !(tr > 0.0) {
            return Err(Error::TraceNotOne(tr));
        }
        Self::new(h.scale(1.0 / tr))
    }

    /// `|psi><psi|` for a (not necessarily normalised) amplitude vector.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::param("amplitudes", "zero or non-finite vector"));
        }
        let k = 1.0 / sqrt(norm2);
        let v: Vec<C64> = amplitudes.iter().map(|z| z * k).collect();
        Self::new(ComplexMatrix::projector(&v))
    }

    pub fn pure_real(amplitudes: &[f64]) -> Result<Self> {
        let v: Vec<C64> = amplitudes.iter().map(|&x| re(x)).collect();
        Self::pure(&v)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { mat: ComplexMatrix::identity(dim).scale(1.0 / dim as f64) }
    }

    /// `|i><i|`.
    pub fn basis(dim: usize, i: usize) -> Self {
        Self { mat: ComplexMatrix::basis_projector(dim, i) }
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::param("w", "mixing weight outside [0, 1]"));
        }
        let m = self.mat.scale(w).try_add(&other.mat.scale(1.0 - w))?;
        Ok(Self { mat: m })
    }

    pub fn dim(&self) -> usize {
        self.mat.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Real part of the `i`-th diagonal element (0-indexed).
    pub fn population(&self, i: usize) -> f64 {
        self.mat[(i, i)].re
    }

    /// Tensor product of two states.
    pub fn tensor(&self, other: &Self) -> Self {
        Self { mat: kron(&self.mat, &other.mat) }
    }

    /// `Tr(rho O)` for a Hermitian observable.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<f64> {
        if op.rows != self.dim() || op.cols != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.rows });
        }
        Ok(self.mat.inner(op))
    }
}

/// Partial trace of a bipartite state, keeping the factor `keep`.
pub fn partial_trace(rho: &DensityMatrix, dims: (usize, usize), keep: Keep) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(&rho.mat, dims, keep)?;
    Ok(DensityMatrix { mat: m.hermitian_part() })
}

/// Von Neumann entropy in bits, with eigenvalues clamped to `[0, 1]`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let eig = match eig_hermitian(&rho.mat) {
        Ok(e) => e,
        Err(_) => return f64::NAN,
    };
    let s: f64 = eig.values.iter().map(|&l| l.clamp(0.0, 1.0)).filter(|&l| l > 0.0).map(|l| -l * log2(l)).sum();
    s.clamp(0.0, log2(rho.dim() as f64))
}

/// Finite set of positive operators summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::param("elements", "empty POVM"))?;
        let dim = first.rows;
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for e in &elements {
            if e.rows != dim || e.cols != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: e.rows });
            }
            let herm = e.hermiticity_residual();
            if herm > tol::HERM {
                return Err(Error::NotHermitian(herm));
            }
            let min = eig_hermitian(e)?.min();
            if min < -tol::PSD {
                return Err(Error::NotPsd(min));
            }
            sum = &sum + e;
        }
        let resid = (&sum - &ComplexMatrix::identity(dim)).as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if resid > tol::TRACE {
            return Err(Error::NotComplete(resid));
        }
        let elements = elements.iter().map(|e| e.hermitian_part()).collect();
        Ok(Self { dim, elements })
    }

    /// Two-outcome POVM `{E, I - E}`.
    pub fn binary(first: ComplexMatrix) -> Result<Self> {
        let dim = first.rows;
        let second = &ComplexMatrix::identity(dim) - &first;
        Self::new(vec![first, second])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, k: usize) -> &ComplexMatrix {
        &self.elements[k]
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Swaps the labels of a two-outcome POVM.
    pub fn relabelled(&self) -> Self {
        let mut elements = self.elements.clone();
        elements.reverse();
        Self { dim: self.dim, elements }
    }
}

/// Joint outcome distribution `p(a, b)`, row-major in `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    pub n_a: usize,
    pub n_b: usize,
    pub p: Vec<f64>,
}

impl JointDistribution {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.p[a * self.n_b + b]
    }

    pub fn marginal_a(&self, a: usize) -> f64 {
        (0..self.n_b).map(|b| self.get(a, b)).sum()
    }

    pub fn marginal_b(&self, b: usize) -> f64 {
        (0..self.n_a).map(|a| self.get(a, b)).sum()
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// Born rule `p(a, b) = Tr[rho A_a (x) B_b]`, clamped at zero.
pub fn born_probabilities(rho: &DensityMatrix, povm_a: &Povm, povm_b: &Povm) -> Result<JointDistribution> {
    let dim = povm_a.dim * povm_b.dim;
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho.dim() });
    }
    let mut p = Vec::with_capacity(povm_a.outcomes() * povm_b.outcomes());
    for ea in &povm_a.elements {
        for eb in &povm_b.elements {
            let v = rho.mat.inner(&kron(ea, eb));
            debug_assert!(v >= -tol::PSD, "negative Born probability {v}");
            p.push(v.max(0.0));
        }
    }
    Ok(JointDistribution { n_a: povm_a.outcomes(), n_b: povm_b.outcomes(), p })
}

/// Pauli matrices on a qubit.
pub mod pauli {
    use super::{c, ComplexMatrix};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        })
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::diag(&[1.0, -1.0])
    }
}
