// Float functions that `core` does not provide.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Binary entropy in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * log2(p) - (1.0 - p) * log2(1.0 - p)
}

/// Nelder-Mead maximisation in two variables; stops when the simplex's value
/// spread drops below `ftol`.
pub fn nelder_mead_max(f: impl Fn([f64; 2]) -> f64, x0: [f64; 2], step: f64, ftol: f64, max_iter: usize) -> [f64; 2] {
    let mut pts = [x0, [x0[0] + step, x0[1]], [x0[0], x0[1] + step]];
    let mut val = pts.map(&f);
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..max_iter {
        // Order best first.
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| val[j].total_cmp(&val[i]));
        pts = idx.map(|i| pts[i]);
        val = idx.map(|i| val[i]);
        if val[0] - val[2] < ftol {
            break;
        }
        let centroid = lerp(pts[0], pts[1], 0.5);
        let reflected = lerp(centroid, pts[2], -1.0);
        let fr = f(reflected);
        if fr > val[0] {
            let expanded = lerp(centroid, pts[2], -2.0);
            let fe = f(expanded);
            (pts[2], val[2]) = if fe > fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr > val[1] {
            (pts[2], val[2]) = (reflected, fr);
        } else {
            let contracted = lerp(centroid, pts[2], 0.5);
            let fc = f(contracted);
            if fc > val[2] {
                (pts[2], val[2]) = (contracted, fc);
            } else {
                for k in 1..3 {
                    pts[k] = lerp(pts[0], pts[k], 0.5);
                    val[k] = f(pts[k]);
                }
            }
        }
    }
    let best = (0..3).max_by(|&i, &j| val[i].total_cmp(&val[j])).unwrap_or(0);
    pts[best]
}
