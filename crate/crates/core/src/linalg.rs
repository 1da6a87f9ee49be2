// Real dense helpers for the interior-point and simplex solvers.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::math::sqrt;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct RealMatrix {
    pub n: usize,
    data: Vec<f64>,
}

// Square matrices only; that is all the solvers need.
impl RealMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn scaled_identity(n: usize, k: f64) -> Self {
        let mut m = Self::identity(n);
        m.scale_mut(k);
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, r) in dst.iter_mut().zip(row) {
                    *d += a * r;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Self, k: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += k * b;
        }
    }

    pub fn scale_mut(&mut self, k: f64) {
        for a in &mut self.data {
            *a *= k;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    /// `sum_ij a_ij b_ij`, equal to `Tr(A B)` when either factor is symmetric.
    pub fn dot(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.dot(self))
    }

    /// Lower Cholesky factor, or `None` if the matrix is not positive definite.
    pub fn cholesky(&self) -> Option<Self> {
        let n = self.n;
        let mut l = Self::zeros(n);
        for j in 0..n {
            let mut d = self.data[j * n + j];
            for k in 0..j {
                d -= l.data[j * n + k] * l.data[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = sqrt(d);
            l.data[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = self.data[i * n + j];
                for k in 0..j {
                    s -= l.data[i * n + k] * l.data[j * n + k];
                }
                l.data[i * n + j] = s / d;
            }
        }
        Some(l)
    }

    /// Inverse of a lower-triangular matrix.
    pub fn lower_inverse(&self) -> Self {
        let n = self.n;
        let mut inv = Self::zeros(n);
        for col in 0..n {
            for i in col..n {
                let mut s = if i == col { 1.0 } else { 0.0 };
                for k in col..i {
                    s -= self.data[i * n + k] * inv.data[k * n + col];
                }
                inv.data[i * n + col] = s / self.data[i * n + i];
            }
        }
        inv
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues of a real symmetric matrix, unordered.
pub(crate) fn sym_eigenvalues(m: &RealMatrix) -> Vec<f64> {
    sym_eigen(m).0
}

/// Eigenvalues (unordered) and eigenvectors (matching columns) of a real
/// symmetric matrix, by cyclic Jacobi.
pub(crate) fn sym_eigen(m: &RealMatrix) -> (Vec<f64>, RealMatrix) {
    let n = m.n;
    let mut v = RealMatrix::identity(n);
    let mut a = m.clone();
    a.symmetrize();
    let norm = a.norm();
    for _ in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off == 0.0 || sqrt(off) <= 1e-16 * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

/// One-sided Jacobi SVD `B V = U diag(sigma)`; returns `(sigma, V)`.
///
/// Singular values come out with high relative accuracy, which the
/// Nesterov-Todd scaling needs once the iterates approach the boundary.
pub(crate) fn jacobi_svd(b: &RealMatrix) -> (Vec<f64>, RealMatrix) {
    let n = b.n;
    let mut u = b.clone();
    let mut v = RealMatrix::identity(n);
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for k in 0..n {
                    alpha += u[(k, p)] * u[(k, p)];
                    beta += u[(k, q)] * u[(k, q)];
                    gamma += u[(k, p)] * u[(k, q)];
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = c * t;
                for m in [&mut u, &mut v] {
                    for k in 0..n {
                        let mp = m[(k, p)];
                        let mq = m[(k, q)];
                        m[(k, p)] = c * mp - s * mq;
                        m[(k, q)] = s * mp + c * mq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = (0..n).map(|j| sqrt((0..n).map(|k| u[(k, j)] * u[(k, j)]).sum())).collect();
    (sigma, v)
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
pub(crate) fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for i in (col + 1)..n {
            let f = a[i * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[i * n + k] -= f * a[col * n + k];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a[i * n + k] * x[k];
        }
        x[i] = s / a[i * n + i];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_and_inverse() {
        let mut m = RealMatrix::zeros(3);
        let vals = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = vals[i * 3 + j];
            }
        }
        let li = m.cholesky().unwrap().lower_inverse();
        let inv = li.transpose().matmul(&li);
        let prod = m.matmul(&inv);
        assert!(prod.sub(&RealMatrix::identity(3)).norm() < 1e-14);
        let mut neg = m.clone();
        neg[(2, 2)] = -1.0;
        assert!(neg.cholesky().is_none());
    }

    #[test]
    fn eigenvalues_of_known_matrix() {
        let mut m = RealMatrix::zeros(2);
        m[(0, 0)] = 2.0;
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 1.0;
        m[(1, 1)] = 2.0;
        let mut ev = sym_eigenvalues(&m);
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn svd_reconstructs_gram() {
        let mut b = RealMatrix::zeros(3);
        let vals = [1.0, 2.0, 0.5, -1.0, 0.3, 2.0, 0.0, 1.0, 1e-9];
        for i in 0..3 {
            for j in 0..3 {
                b[(i, j)] = vals[i * 3 + j];
            }
        }
        let (sigma, v) = jacobi_svd(&b);
        // B^T B = V diag(sigma^2) V^T
        let btb = b.transpose().matmul(&b);
        let mut rec = RealMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                rec[(i, j)] = (0..3).map(|k| v[(i, k)] * sigma[k] * sigma[k] * v[(j, k)]).sum();
            }
        }
        assert!(rec.sub(&btb).norm() < 1e-13);
        assert!(v.transpose().matmul(&v).sub(&RealMatrix::identity(3)).norm() < 1e-14);
    }

    #[test]
    fn eigenvectors_diagonalise() {
        let mut m = RealMatrix::zeros(3);
        let vals = [2.0, -1.0, 0.5, -1.0, 3.0, 0.2, 0.5, 0.2, -1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = vals[i * 3 + j];
            }
        }
        let (ev, v) = sym_eigen(&m);
        let d = v.transpose().matmul(&m).matmul(&v);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { ev[i] } else { 0.0 };
                assert!((d[(i, j)] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn dense_solve() {
        let x = solve_dense(vec![0.0, 2.0, 1.0, 1.0], vec![4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        assert!(solve_dense(vec![1.0, 1.0, 1.0, 1.0], vec![1.0, 2.0]).is_none());
    }
}
