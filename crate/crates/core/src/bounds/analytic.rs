//! Stationarity system of the closed-form winning probability.
//!
//! Setting the partial derivatives in `c00` and `c01` to zero gives
//!
//! ```text
//! c00 = -sqrt(d) n^2 / (2 + n^2),    c01 = sqrt(d) n sqrt(1 - n^2) / (1 + n^2),
//! ```
//!
//! and substituting into the `n` derivative and into the normalisation
//! `c00^2 + 2 c01^2 = 1 - d` leaves two polynomials in `n`:
//!
//! ```text
//! n (4 + 28d + (12 + 24d) n^2 + (13 + 4d) n^4 + 6 n^6 + n^8) = 0
//! 4 - 4d + (12 - 20d) n^2 + (13 - 14d) n^4 + (6 - 2d) n^6 + n^8 = 0
//! ```
//!
//! Both `c` equations are unconstrained stationarity conditions (the
//! objective is a convex quadratic in `c00, c01`, so they locate a minimum in
//! those directions), and the normalisation is then imposed on top. The
//! system is overdetermined; its only common real root in `[-1, 1]` is
//! `n = 0` at `d = 1`. [`solve_stationarity`] reports exactly that and leaves the
//! see-saw authoritative. [`solve_variant`] re-derives the `n` equation
//! numerically for the four sign conventions of the linear terms.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::game::{check_d_eps, pwin_formula};
use crate::math::sqrt;
use crate::Result;

/// Spacing of the sign-change scan over `n in [-1, 1]`.
pub const SCAN_STEP: f64 = 1e-4;
/// Bisection stops at this bracket width.
pub const ROOT_TOL: f64 = 1e-12;
/// Roots of the two equations closer than this are treated as common.
const MATCH_TOL: f64 = 1e-6;

/// Signs of the `c00` term and of the cross term of the objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignVariant {
    pub c00_sign: i8,
    pub cross_sign: i8,
}

impl SignVariant {
    pub const BASE: SignVariant = SignVariant { c00_sign: 1, cross_sign: 1 };
    pub const ALL: [SignVariant; 4] = [
        SignVariant { c00_sign: 1, cross_sign: 1 },
        SignVariant { c00_sign: 1, cross_sign: -1 },
        SignVariant { c00_sign: -1, cross_sign: 1 },
        SignVariant { c00_sign: -1, cross_sign: -1 },
    ];

    pub fn label(&self) -> &'static str {
        match (self.c00_sign > 0, self.cross_sign > 0) {
            (true, true) => "+c00,+cross",
            (true, false) => "+c00,-cross",
            (false, true) => "-c00,+cross",
            (false, false) => "-c00,-cross",
        }
    }

    fn s1(&self) -> f64 {
        self.c00_sign.signum() as f64
    }

    fn s2(&self) -> f64 {
        self.cross_sign.signum() as f64
    }

    /// Objective with the two linear terms' signs flipped as requested.
    pub fn objective(&self, c00: f64, c01: f64, d: f64, n: f64) -> f64 {
        let s = sqrt(d);
        let n2 = n * n;
        (2.0 * self.s1() * c00 * s * n2
            - 8.0 * self.s2() * c01 * s * n * sqrt((1.0 - n2).max(0.0))
            - (1.0 + 3.0 * d) * (n2 - 2.0)
            + 4.0 * c01 * c01 * (1.0 + n2)
            + c00 * c00 * (2.0 + n2))
            / 8.0
    }

    /// Stationary `(c00, c01)` of [`Self::objective`] at fixed `n`.
    pub fn stationary_c(&self, d: f64, n: f64) -> (f64, f64) {
        let s = sqrt(d);
        let n2 = n * n;
        (-self.s1() * s * n2 / (2.0 + n2), self.s2() * s * n * sqrt((1.0 - n2).max(0.0)) / (1.0 + n2))
    }

    /// `sqrt(1 - n^2)` times the `n` derivative at the stationary `c`; the
    /// factor removes the endpoint singularity without moving interior roots.
    pub fn n_equation(&self, d: f64, n: f64) -> f64 {
        let (c00, c01) = self.stationary_c(d, n);
        let s = sqrt(d);
        let w = sqrt((1.0 - n * n).max(0.0));
        let dp = 4.0 * self.s1() * c00 * s * n - 2.0 * (1.0 + 3.0 * d) * n + 8.0 * c01 * c01 * n + 2.0 * c00 * c00 * n;
        (dp * w - 8.0 * self.s2() * c01 * s * (1.0 - 2.0 * n * n)) / 8.0
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Stationarity polynomial in `n`.
pub fn base_n_equation(d: f64, n: f64) -> f64 {
    n * horner(&[4.0 + 28.0 * d, 0.0, 12.0 + 24.0 * d, 0.0, 13.0 + 4.0 * d, 0.0, 6.0, 0.0, 1.0], n)
}

/// Normalisation polynomial in `n`.
pub fn normalisation_equation(d: f64, n: f64) -> f64 {
    horner(&[4.0 - 4.0 * d, 0.0, 12.0 - 20.0 * d, 0.0, 13.0 - 14.0 * d, 0.0, 6.0 - 2.0 * d, 0.0, 1.0], n)
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min_abs(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (sqrt(5.0) - 1.0);
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a).abs(), f(b).abs());
    while hi - lo > ROOT_TOL {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a).abs();
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b).abs();
        }
    }
    0.5 * (lo + hi)
}

/// Real roots of `f` on `[lo, hi]`: sign changes on a [`SCAN_STEP`] grid
/// refined by bisection, plus touching roots found as local minima of `|f|`
/// that reach `zero_tol`.
pub fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, zero_tol: f64) -> Vec<f64> {
    let steps = crate::math::ceil((hi - lo) / SCAN_STEP) as usize;
    let xs: Vec<f64> = (0..=steps).map(|i| if i == steps { hi } else { lo + i as f64 * SCAN_STEP }).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.iter().all(|&q| (q - r).abs() > 10.0 * ROOT_TOL.max(SCAN_STEP * 1e-3)) {
            roots.push(r);
        }
    };
    for i in 0..xs.len() {
        if fs[i] == 0.0 {
            push(xs[i], &mut roots);
            continue;
        }
        if i + 1 < xs.len() && fs[i + 1] != 0.0 && (fs[i] < 0.0) != (fs[i + 1] < 0.0) {
            push(bisect(&f, xs[i], xs[i + 1]), &mut roots);
        }
        // Touching root: |f| has an interior local minimum without a sign
        // change on either side.
        if i > 0 && i + 1 < xs.len() {
            let (l, m, r) = (fs[i - 1], fs[i], fs[i + 1]);
            if m.abs() <= l.abs() && m.abs() <= r.abs() && (l < 0.0) == (m < 0.0) && (m < 0.0) == (r < 0.0) {
                let x = golden_min_abs(&f, xs[i - 1], xs[i + 1]);
                if f(x).abs() <= zero_tol {
                    push(x, &mut roots);
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteriorSolution {
    pub n_x: f64,
    pub c00: f64,
    pub c01: f64,
    /// `x(d) = c00^2`, the `|00>` population of the optimal state.
    pub x: f64,
    /// Closed-form winning probability at the solution.
    pub pwin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AnalyticOutcome {
    Solution(InteriorSolution),
    NoInteriorSolution,
}

impl AnalyticOutcome {
    pub fn solution(&self) -> Option<&InteriorSolution> {
        match self {
            AnalyticOutcome::Solution(s) => Some(s),
            AnalyticOutcome::NoInteriorSolution => None,
        }
    }
}

const ZERO_TOL: f64 = 1e-10;

fn solve_with(
    d: f64,
    n_eq: impl Fn(f64) -> f64,
    c_of: impl Fn(f64) -> (f64, f64),
    value: impl Fn(f64, f64, f64) -> f64,
) -> Result<AnalyticOutcome> {
    check_d_eps(d)?;
    let r1 = scan_roots(&n_eq, -1.0, 1.0, ZERO_TOL);
    let r2 = scan_roots(|n| normalisation_equation(d, n), -1.0, 1.0, ZERO_TOL);
    let mut best: Option<InteriorSolution> = None;
    for &a in &r1 {
        for &b in &r2 {
            if (a - b).abs() > MATCH_TOL {
                continue;
            }
            let n = 0.5 * (a + b);
            if n_eq(n).abs() > 1e-8 || normalisation_equation(d, n).abs() > 1e-8 {
                continue;
            }
            let (c00, c01) = c_of(n);
            let sol = InteriorSolution { n_x: n, c00, c01, x: c00 * c00, pwin: value(c00, c01, n) };
            if best.is_none_or(|b| sol.pwin > b.pwin) {
                best = Some(sol);
            }
        }
    }
    Ok(best.map_or(AnalyticOutcome::NoInteriorSolution, AnalyticOutcome::Solution))
}

/// The stationarity system above, with the base signs, solved as is.
pub fn solve_stationarity(d_eps: f64) -> Result<AnalyticOutcome> {
    let v = SignVariant::BASE;
    solve_with(
        d_eps,
        |n| base_n_equation(d_eps, n),
        |n| v.stationary_c(d_eps, n),
        |c00, c01, n| pwin_formula(c00, c01, d_eps, n),
    )
}

/// The system re-derived for a sign variant of the objective; the reported
/// `pwin` is the unmodified closed form at the variant's solution.
pub fn solve_variant(d_eps: f64, v: SignVariant) -> Result<AnalyticOutcome> {
    solve_with(
        d_eps,
        |n| v.n_equation(d_eps, n),
        |n| v.stationary_c(d_eps, n),
        |c00, c01, n| pwin_formula(c00, c01, d_eps, n),
    )
}
