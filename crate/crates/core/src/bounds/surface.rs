//! Convex, monotone min-entropy surface over `(pwin, d_eps)`.
//!
//! The interpolant is the greatest function below every computed node that
//! is jointly convex, non-decreasing in `pwin` and non-increasing in
//! `d_eps`. At a query `(p, d)` it is the linear program
//!
//! ```text
//! min sum_i l_i h_i   s.t.  sum_i l_i = 1,  sum_i l_i p_i >= p,  sum_i l_i d_i <= d,  l >= 0,
//! ```
//!
//! the dual of maximising an affine minorant with non-negative `p` slope and
//! non-positive `d` slope.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::guessing::{default_targets, guessing_curve, GuessingPoint};
use super::{optimize_pwin, simplex, SeesawConfig};
use crate::game::ResourceKind;
use crate::{Error, Result};

/// Minimum number of distinct values along each axis.
pub const MIN_AXIS_POINTS: usize = 5;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HminSurface {
    nodes: Vec<GuessingPoint>,
    /// `(d_eps, largest pwin node)` per column, ascending in `d_eps`.
    columns: Vec<(f64, f64)>,
}

impl HminSurface {
    /// Builds the surface from computed nodes arranged in columns of equal
    /// `d_eps`.
    pub fn from_nodes(nodes: Vec<GuessingPoint>) -> Result<Self> {
        let mut columns: Vec<(f64, f64, usize)> = Vec::new();
        for n in &nodes {
            if !(n.h_min >= 0.0) || !n.pwin_target.is_finite() || !n.d_eps.is_finite() {
                return Err(Error::NonFinite);
            }
            match columns.iter_mut().find(|c| c.0 == n.d_eps) {
                Some(c) => {
                    c.1 = c.1.max(n.pwin_target);
                    c.2 += 1;
                }
                None => columns.push((n.d_eps, n.pwin_target, 1)),
            }
        }
        if columns.len() < MIN_AXIS_POINTS {
            return Err(Error::GridTooSparse(alloc::format!("{} d_eps values", columns.len())));
        }
        if let Some(c) = columns.iter().find(|c| c.2 < MIN_AXIS_POINTS) {
            return Err(Error::GridTooSparse(alloc::format!("{} pwin values at d_eps = {}", c.2, c.0)));
        }
        columns.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { nodes, columns: columns.into_iter().map(|c| (c.0, c.1)).collect() })
    }

    pub fn nodes(&self) -> &[GuessingPoint] {
        &self.nodes
    }

    pub fn d_range(&self) -> (f64, f64) {
        (self.columns[0].0, self.columns[self.columns.len() - 1].0)
    }

    /// Largest covered `pwin` at `d_eps`: the column tops, linearly
    /// interpolated (which stays inside the convex hull of the nodes).
    pub fn pwin_limit(&self, d_eps: f64) -> Option<f64> {
        let (lo, hi) = self.d_range();
        if !(d_eps >= lo && d_eps <= hi) {
            return None;
        }
        let k = self.columns.iter().position(|c| c.0 >= d_eps)?;
        if k == 0 || self.columns[k].0 == d_eps {
            return Some(self.columns[k].1);
        }
        let (d0, p0) = self.columns[k - 1];
        let (d1, p1) = self.columns[k];
        Some(p0 + (p1 - p0) * (d_eps - d0) / (d1 - d0))
    }

    pub fn contains(&self, pwin: f64, d_eps: f64) -> bool {
        self.pwin_limit(d_eps).is_some_and(|top| pwin <= top)
    }

    /// Interpolated min-entropy. Queries below every `pwin` node return the
    /// value at the lowest node's level, which monotonicity caps at zero.
    pub fn interpolate(&self, pwin: f64, d_eps: f64) -> Result<f64> {
        if !self.contains(pwin, d_eps) {
            return Err(Error::OutsideDomain { pwin, d_eps });
        }
        let n = self.nodes.len();
        // Columns: node weights, surplus on the pwin row, slack on the d row.
        let mut a = vec![vec![0.0; n + 2]; 3];
        let mut c = vec![0.0; n + 2];
        for (i, node) in self.nodes.iter().enumerate() {
            a[0][i] = 1.0;
            a[1][i] = node.pwin_target;
            a[2][i] = node.d_eps;
            c[i] = node.h_min;
        }
        a[1][n] = -1.0;
        a[2][n + 1] = 1.0;
        let (value, _) = simplex::minimize(&a, &[1.0, pwin, d_eps], &c)
            .ok_or_else(|| Error::Solver(alloc::string::String::from("surface LP failed")))?;
        Ok(value.max(0.0))
    }
}

/// Computes guessing curves on `points_per_d` targets per `d_eps` value and
/// fits the surface.
pub fn build_hmin_surface(d_values: &[f64], points_per_d: usize, cfg: &SeesawConfig) -> Result<HminSurface> {
    let mut distinct = d_values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < MIN_AXIS_POINTS || points_per_d < MIN_AXIS_POINTS {
        return Err(Error::GridTooSparse(alloc::format!("{} x {}", distinct.len(), points_per_d)));
    }
    let mut nodes = Vec::new();
    for &d in &distinct {
        nodes.extend(surface_column(d, points_per_d, cfg)?);
    }
    HminSurface::from_nodes(nodes)
}

/// One column of the surface grid; exposed so callers can compute columns
/// in parallel and assemble them with [`HminSurface::from_nodes`].
pub fn surface_column(d_eps: f64, points: usize, cfg: &SeesawConfig) -> Result<Vec<GuessingPoint>> {
    let opt = optimize_pwin(ResourceKind::EntangledCoherent, d_eps, cfg)?;
    guessing_curve(&default_targets(opt.value, points), &opt, cfg)
}

#[cfg(test)]
mod tests {
    use super::super::guessing::GuessMethod;
    use super::*;
    use crate::math::sqrt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Synthetic surface shaped like the real one: zero up to a concave
    /// threshold in `d`, then rising; deliberately not convex.
    fn synthetic() -> HminSurface {
        let mut nodes = Vec::new();
        for j in 0..6 {
            let d = j as f64 * 0.1;
            let sep = (1.0 + sqrt(d)) / 2.0;
            let top = sep + 0.1;
            for i in 0..8 {
                let p = 0.5 + (top - 0.5) * i as f64 / 7.0;
                let h = if p <= sep { 0.0 } else { ((p - sep) / 0.1).powf(0.7) };
                let p_guess = libm::exp2(-h);
                nodes.push(GuessingPoint { d_eps: d, pwin_target: p, p_guess, h_min: h, method: GuessMethod::Seesaw });
            }
        }
        HminSurface::from_nodes(nodes).unwrap()
    }

    #[test]
    fn lower_bounds_every_node() {
        let s = synthetic();
        for n in s.nodes() {
            let v = s.interpolate(n.pwin_target, n.d_eps).unwrap();
            assert!(v <= n.h_min + 1e-12, "{v} > {}", n.h_min);
        }
    }

    #[test]
    fn zero_below_separable_bound() {
        let s = synthetic();
        for d in [0.0, 0.1, 0.2, 0.5] {
            assert_eq!(s.interpolate(0.5, d).unwrap(), 0.0);
            // Everything up to the last zero node of the column is zero.
            let last_zero =
                s.nodes().iter().filter(|n| n.d_eps == d && n.h_min == 0.0).map(|n| n.pwin_target).fold(0.0, f64::max);
            assert!(last_zero >= 0.5);
            assert!(s.interpolate(last_zero, d).unwrap() < 1e-12);
            assert!(s.interpolate(0.5 + (last_zero - 0.5) * 0.3, d).unwrap() < 1e-12);
        }
    }

    #[test]
    fn convex_and_monotone() {
        let s = synthetic();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sample = |rng: &mut ChaCha8Rng| loop {
            let d = rng.random::<f64>() * 0.5;
            let p = 0.5 + rng.random::<f64>() * 0.4;
            if s.contains(p, d) {
                return (p, d);
            }
        };
        for _ in 0..200 {
            let (p1, d1) = sample(&mut rng);
            let (p2, d2) = sample(&mut rng);
            let w: f64 = rng.random();
            let (pm, dm) = (w * p1 + (1.0 - w) * p2, w * d1 + (1.0 - w) * d2);
            let f = |p, d| s.interpolate(p, d).unwrap();
            assert!(f(pm, dm) <= w * f(p1, d1) + (1.0 - w) * f(p2, d2) + 1e-9);
            // Monotone in each argument.
            let lower_p = 0.5 + (p1 - 0.5) * 0.9;
            assert!(f(lower_p, d1) <= f(p1, d1) + 1e-12);
            if s.contains(p1, d1 * 0.5) {
                assert!(f(p1, d1 * 0.5) >= f(p1, d1) - 1e-12);
            }
        }
    }

    #[test]
    fn rejects_sparse_grids_and_outside_queries() {
        let s = synthetic();
        assert!(matches!(s.interpolate(0.99, 0.0), Err(Error::OutsideDomain { .. })));
        assert!(matches!(s.interpolate(0.6, 0.7), Err(Error::OutsideDomain { .. })));
        let few: Vec<_> = s.nodes().iter().filter(|n| n.d_eps < 0.35).cloned().collect();
        assert!(matches!(HminSurface::from_nodes(few), Err(Error::GridTooSparse(_))));
        assert!(build_hmin_surface(&[0.0, 0.1], 11, &SeesawConfig::default()).is_err());
    }
}
