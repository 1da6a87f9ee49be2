//! Dense two-phase simplex for small equality-form linear programs.

use alloc::vec;
use alloc::vec::Vec;

const EPS: f64 = 1e-12;

/// `min c'x` subject to `A x = b`, `x >= 0`. Returns the optimal value and
/// point, or `None` when the program is infeasible or unbounded. Bland's
/// rule keeps degenerate pivots from cycling.
pub(crate) fn minimize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = a.len();
    let n = c.len();
    // Tableau columns: n originals, m artificials, then the right-hand side.
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = sign * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase one: minimise the sum of artificials.
    let mut cost1 = vec![0.0; n + m];
    cost1[n..].iter_mut().for_each(|v| *v = 1.0);
    run(&mut t, &mut basis, &cost1, n + m)?;
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= n).map(|i| t[i][width - 1]).sum();
    if infeas > 1e-9 * (1.0 + b.iter().map(|v| v.abs()).sum::<f64>()) {
        return None;
    }
    // Drive remaining (zero-level) artificials out of the basis.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > EPS) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }

    // Phase two over the original columns only.
    let mut cost2 = c.to_vec();
    cost2.extend(core::iter::repeat_n(0.0, m));
    run(&mut t, &mut basis, &cost2, n)?;
    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][width - 1];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Some((value, x))
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    t[row].iter_mut().for_each(|v| *v /= p);
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = r[col];
        if f != 0.0 {
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
    basis[row] = col;
}

/// Simplex iterations for `cost` over the first `allowed` columns.
fn run(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) -> Option<()> {
    let m = t.len();
    let width = t.first().map_or(0, |r| r.len());
    for _ in 0..10_000 {
        // Reduced costs; entering column by Bland's rule.
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let reduced = cost[j] - (0..m).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>();
            reduced < -EPS
        });
        let Some(j) = entering else { return Some(()) };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][j] > EPS {
                let ratio = t[i][width - 1] / t[i][j];
                let better = match leave {
                    None => true,
                    Some((k, r)) => ratio < r - EPS || (ratio <= r + EPS && basis[i] < basis[k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (row, _) = leave?;
        pivot(t, basis, row, j);
    }
    None
}
