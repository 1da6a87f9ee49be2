//! Finite-size key length.
//!
//! Concentration bounds turn the observed statistics into worst-case values
//! `pwin_tilde <= true average` and `deps_tilde >= true average` over the
//! detection rounds; the min-entropy surface at that point gives the rate
//! `kappa`; reconciliation leaks `ell` bits and privacy amplification costs
//! `2 log2(1 / eps_pa)` more.
//!
//! Every bound is implemented exactly as stated, including constants that a
//! tighter derivation would improve. Estimators use the plain winning
//! fraction; the bounds' exponents are used unchanged.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bounds::surface::HminSurface;
use crate::math::{binary_entropy, exp, floor, log2, powf, sqrt};
use crate::protocol::Estimates;
use crate::{Error, Result};

/// Exponent of the Chernoff term in the detection-probability bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepsExponent {
    /// `delta^2 gamma^2 m (d - eps) / 8`, as stated.
    #[default]
    Standard,
    /// The same with `gamma^2 m` replaced by `gamma^2 m / 4`.
    Quartered,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecurityParams {
    /// Target overall failure probability.
    pub mu: f64,
    /// Slacks of the detection-probability bound.
    pub eps: f64,
    pub delta: f64,
    /// Slacks of the winning-probability bound.
    pub eps_prime: f64,
    pub delta_prime: f64,
    /// Fraction of detection rounds revealed for testing.
    pub gamma: f64,
    /// Abort threshold on the test-set error rate.
    pub eta: f64,
    pub eps_ir: f64,
    pub eps_pa: f64,
    /// Largest winning probability any strategy may reach; bounds the
    /// martingale increments.
    pub max_pwin: f64,
    pub deps_exponent: DepsExponent,
}

impl SecurityParams {
    /// All four slacks set to `m^(-1/3)`; `eps_ir = eps_pa = mu / 4`.
    pub fn with_default_slacks(m: usize, gamma: f64, eta: f64, mu: f64, max_pwin: f64) -> Self {
        let s = default_slack(m);
        Self {
            mu,
            eps: s,
            delta: s,
            eps_prime: s,
            delta_prime: s,
            gamma,
            eta,
            eps_ir: mu / 4.0,
            eps_pa: mu / 4.0,
            max_pwin,
            deps_exponent: DepsExponent::Standard,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let open = |name: &'static str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::param(name, "must lie in (0, 1)"))
            }
        };
        open("mu", self.mu)?;
        open("eps", self.eps)?;
        open("delta", self.delta)?;
        open("eps_prime", self.eps_prime)?;
        open("delta_prime", self.delta_prime)?;
        open("eps_ir", self.eps_ir)?;
        open("eps_pa", self.eps_pa)?;
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::param("gamma", "must lie in (0, 1]"));
        }
        if !(self.eta >= 0.0 && self.eta < 5.0 / 11.0) {
            return Err(Error::param("eta", "must lie in [0, 5/11)"));
        }
        if !(0.0..=1.0).contains(&self.max_pwin) {
            return Err(Error::param("max_pwin", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// `m^(-1/3)`.
pub fn default_slack(m: usize) -> f64 {
    powf(m.max(1) as f64, -1.0 / 3.0)
}

/// Probability that the average winning probability over all rounds falls
/// `eps_prime` below the estimate: `exp(-m eps'^2 / (32 (1 + max)^2))`.
pub fn azuma_pwin_failure(m: usize, eps_prime: f64, max_pwin: f64) -> f64 {
    let s = 1.0 + max_pwin;
    exp(-(m as f64) * eps_prime * eps_prime / (32.0 * s * s))
}

/// Failure probability of `pwin_tilde` as a bound on the detection rounds:
/// `exp(-m delta'^2 (p - eps') / 8) + exp(-m eps'^2 / (32 (1 + max)^2))`.
pub fn pwin_detection_failure(m: usize, eps_prime: f64, delta_prime: f64, pwin_hat: f64, max_pwin: f64) -> Result<f64> {
    if !(pwin_hat > eps_prime) {
        return Err(Error::param("eps_prime", "slack must be below the estimate"));
    }
    let chernoff = exp(-(m as f64) * delta_prime * delta_prime * (pwin_hat - eps_prime) / 8.0);
    Ok(chernoff + azuma_pwin_failure(m, eps_prime, max_pwin))
}

/// The two terms of the detection-probability failure bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepsFailure {
    pub chernoff: f64,
    pub azuma: f64,
}

impl DepsFailure {
    pub fn total(&self) -> f64 {
        self.chernoff + self.azuma
    }
}

/// Failure probability of `deps_tilde`:
/// `exp(-delta^2 gamma^2 m (d - eps) / 8) + 2 exp(-gamma m eps^2 / 32)`.
/// Each term is capped at 1; the Chernoff term is 1 when `d <= eps`.
pub fn deps_failure(m: usize, gamma: f64, eps: f64, delta: f64, deps_hat: f64, exponent: DepsExponent) -> DepsFailure {
    let m = m as f64;
    let scale = match exponent {
        DepsExponent::Standard => 1.0,
        DepsExponent::Quartered => 0.25,
    };
    let chernoff = if deps_hat > eps {
        exp(-delta * delta * gamma * gamma * m * scale * (deps_hat - eps) / 8.0).min(1.0)
    } else {
        1.0
    };
    let azuma = (2.0 * exp(-gamma * m * eps * eps / 32.0)).min(1.0);
    DepsFailure { chernoff, azuma }
}

/// `(pwin_tilde, deps_tilde) = ((1 - delta') (p - eps'), (d + eps) / (1 - delta))`.
pub fn tilde_params(pwin_hat: f64, deps_hat: f64, p: &SecurityParams) -> Result<(f64, f64)> {
    if !(p.delta < 1.0 && p.delta_prime < 1.0) {
        return Err(Error::param("delta", "must be below 1"));
    }
    if !(pwin_hat > p.eps_prime) {
        return Err(Error::param("eps_prime", "slack must be below the estimate"));
    }
    Ok(((1.0 - p.delta_prime) * (pwin_hat - p.eps_prime), (deps_hat + p.eps) / (1.0 - p.delta)))
}

/// Certified min-entropy per detection round. Zero at or below the
/// separable-coherent bound `(1 + sqrt(d)) / 2`, where a deterministic
/// strategy exists; queries above the surface's largest covered `pwin` are
/// lowered to it, which can only decrease the value.
pub fn kappa(pwin_tilde: f64, deps_tilde: f64, surface: &HminSurface) -> Result<f64> {
    let limit = surface.pwin_limit(deps_tilde).ok_or(Error::OutsideDomain { pwin: pwin_tilde, d_eps: deps_tilde })?;
    if pwin_tilde <= 0.5 * (1.0 + sqrt(deps_tilde.max(0.0))) {
        return Ok(0.0);
    }
    surface.interpolate(pwin_tilde.min(limit), deps_tilde)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leakage {
    /// Bits disclosed by reconciliation.
    pub ell: f64,
    /// Probability that the error rate on `D` exceeds `1.1 eta`.
    pub failure: f64,
}

/// `ell = H(1.1 eta) |D| + log2(2 / eps_ir)`; failure `2 exp(-gamma eta |D| / 250)`
/// (capped at 1).
pub fn reconciliation_leakage(d_size: usize, eta: f64, eps_ir: f64, gamma: f64) -> Result<Leakage> {
    if d_size == 0 {
        return Err(Error::param("d_size", "no detection rounds"));
    }
    if !(0.0..5.0 / 11.0).contains(&eta) {
        return Err(Error::param("eta", "1.1 eta must stay below 1/2"));
    }
    if !(eps_ir > 0.0) {
        return Err(Error::param("eps_ir", "must be positive"));
    }
    let n = d_size as f64;
    Ok(Leakage {
        ell: binary_entropy(1.1 * eta) * n + log2(2.0 / eps_ir),
        failure: (2.0 * exp(-gamma * eta * n / 250.0)).min(1.0),
    })
}

/// Bits sacrificed by privacy amplification: `2 log2(1 / eps_pa)`.
pub fn privacy_amplification_cost(eps_pa: f64) -> f64 {
    2.0 * log2(1.0 / eps_pa)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetItem {
    pub name: String,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub params: SecurityParams,
    pub m: usize,
    pub d_size: usize,
    pub pwin_hat: f64,
    pub deps_hat: f64,
    pub pwin_tilde: f64,
    pub deps_tilde: f64,
    pub kappa: f64,
    pub ell: f64,
    pub pa_cost: f64,
    pub key_length: u64,
    /// Detection-probability failure under the exponent not selected in
    /// `params`, for comparison.
    pub deps_failure_alternative: f64,
    pub failure_budget: Vec<BudgetItem>,
    pub total_failure: f64,
    /// `pwin_tilde > 1/2`: below that nothing can be certified.
    pub certifiable: bool,
    pub feasible: bool,
}

/// `max(0, floor(floor(kappa |D|) - ell - pa_cost))`.
pub fn key_bits(kappa: f64, d_size: usize, ell: f64, pa_cost: f64) -> u64 {
    let raw = floor(kappa * d_size as f64) - ell - pa_cost;
    if raw > 0.0 {
        floor(raw) as u64
    } else {
        0
    }
}

/// Full chain from estimates to key length. The detection-probability bound
/// is evaluated with `m = 4 |D|`, i.e. with the realised detection set.
pub fn key_length(est: &Estimates, p: &SecurityParams, surface: &HminSurface) -> Result<KeyRateReport> {
    let tilde = tilde_params(est.pwin_hat, est.deps_hat, p)?;
    key_length_from_tilde(est, p, surface, tilde)
}

/// [`key_length`] with the adjusted point `(pwin_tilde, deps_tilde)` given
/// explicitly, e.g. to ask what a worse winning rate would yield. The
/// failure budget is still computed from the estimates.
pub fn key_length_from_tilde(
    est: &Estimates,
    p: &SecurityParams,
    surface: &HminSurface,
    (pwin_tilde, deps_tilde): (f64, f64),
) -> Result<KeyRateReport> {
    if est.aborted {
        return Err(Error::Aborted { eta_b: est.eta_b, eta: p.eta });
    }
    p.validate()?;
    let k = kappa(pwin_tilde, deps_tilde, surface)?;
    let leak = reconciliation_leakage(est.d_size, p.eta, p.eps_ir, p.gamma)?;
    let pa_cost = privacy_amplification_cost(p.eps_pa);
    let m_eff = 4 * est.d_size;
    let pwin_fail = pwin_detection_failure(est.m, p.eps_prime, p.delta_prime, est.pwin_hat, p.max_pwin)?.min(1.0);
    let deps_fail = deps_failure(m_eff, p.gamma, p.eps, p.delta, est.deps_hat, p.deps_exponent).total();
    let other = match p.deps_exponent {
        DepsExponent::Standard => DepsExponent::Quartered,
        DepsExponent::Quartered => DepsExponent::Standard,
    };
    let deps_alt = deps_failure(m_eff, p.gamma, p.eps, p.delta, est.deps_hat, other).total();
    let item = |name: &str, probability: f64| BudgetItem { name: String::from(name), probability };
    let failure_budget = alloc::vec![
        item("pwin-concentration", pwin_fail),
        item("deps-concentration", deps_fail),
        item("error-rate", leak.failure),
        item("reconciliation", p.eps_ir),
        item("privacy-amplification", p.eps_pa),
    ];
    let total_failure = failure_budget.iter().map(|b| b.probability).sum();
    let key = key_bits(k, est.d_size, leak.ell, pa_cost);
    Ok(KeyRateReport {
        params: *p,
        m: est.m,
        d_size: est.d_size,
        pwin_hat: est.pwin_hat,
        deps_hat: est.deps_hat,
        pwin_tilde,
        deps_tilde,
        kappa: k,
        ell: leak.ell,
        pa_cost,
        key_length: key,
        deps_failure_alternative: deps_alt,
        failure_budget,
        total_failure,
        certifiable: pwin_tilde > 0.5,
        feasible: total_failure <= p.mu && key > 0,
    })
}

/// Slack multipliers tried by [`tune`], applied to `m^(-1/3)`.
pub const TUNE_FACTORS: [f64; 8] = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

/// Grid search over the four slacks (each `factor * m^(-1/3)`) for the
/// longest key whose failure budget stays within `mu`. Returns the
/// default-slack report when no combination is feasible.
pub fn tune(est: &Estimates, base: &SecurityParams, surface: &HminSurface) -> Result<KeyRateReport> {
    let s = default_slack(est.m);
    let mut best: Option<KeyRateReport> = None;
    for &fe in &TUNE_FACTORS {
        for &fd in &TUNE_FACTORS {
            for &fep in &TUNE_FACTORS {
                for &fdp in &TUNE_FACTORS {
                    let p = SecurityParams {
                        eps: fe * s,
                        delta: fd * s,
                        eps_prime: fep * s,
                        delta_prime: fdp * s,
                        ..*base
                    };
                    let Ok(r) = key_length(est, &p, surface) else { continue };
                    if !r.feasible {
                        continue;
                    }
                    let better = best.as_ref().is_none_or(|b| {
                        r.key_length > b.key_length
                            || (r.key_length == b.key_length && r.total_failure < b.total_failure)
                    });
                    if better {
                        best = Some(r);
                    }
                }
            }
        }
    }
    match best {
        Some(r) => Ok(r),
        None => key_length(est, &SecurityParams { eps: s, delta: s, eps_prime: s, delta_prime: s, ..*base }, surface),
    }
}

/// One line of the formula audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditLine {
    pub formula: String,
    pub points: usize,
    pub max_abs_diff: f64,
    pub passed: bool,
}

/// Evaluates every bound above at `points` random parameter points against
/// the independent expressions in [`crate::oracle::formulas`].
pub fn formula_audit(points: usize, seed: u64, tol: f64) -> Vec<AuditLine> {
    use crate::oracle::formulas as o;
    use rand::Rng;

    let mut rng = crate::seed::stream(seed, "formula-audit", 0);
    let mut lines = Vec::new();
    let mut run = |name: &str, f: &mut dyn FnMut(&mut crate::seed::StreamRng) -> (f64, f64)| {
        let mut worst = 0.0f64;
        for _ in 0..points {
            let (a, b) = f(&mut rng);
            let diff = (a - b).abs();
            worst = if diff.is_nan() { f64::INFINITY } else { worst.max(diff) };
        }
        lines.push(AuditLine { formula: String::from(name), points, max_abs_diff: worst, passed: worst <= tol });
    };
    let m_of = |r: &mut crate::seed::StreamRng| r.random_range(100..2_000_000usize);
    run("azuma-pwin", &mut |r| {
        let (m, e, mx) = (m_of(r), r.random_range(1e-3..0.2), r.random_range(0.5..1.0));
        (azuma_pwin_failure(m, e, mx), o::azuma_pwin(m as f64, e, mx))
    });
    run("pwin-detection", &mut |r| {
        let (m, e, d) = (m_of(r), r.random_range(1e-3..0.1), r.random_range(1e-3..0.2));
        let (p, mx) = (r.random_range(0.5..1.0), r.random_range(0.5..1.0));
        (pwin_detection_failure(m, e, d, p, mx).unwrap_or(f64::NAN), o::pwin_detection(m as f64, e, d, p, mx))
    });
    run("deps-concentration", &mut |r| {
        let (m, g) = (m_of(r), r.random_range(0.01..1.0));
        let (e, d, dh) = (r.random_range(1e-3..0.1), r.random_range(1e-3..0.5), r.random_range(0.0..0.3));
        (deps_failure(m, g, e, d, dh, DepsExponent::Standard).total(), o::deps(m as f64, g, e, d, dh))
    });
    run("tilde-params", &mut |r| {
        let (p, dh) = (r.random_range(0.5..1.0), r.random_range(0.0..0.5));
        let mut sp = SecurityParams::with_default_slacks(1000, 0.1, 0.01, 1e-6, 1.0);
        (sp.eps, sp.delta, sp.eps_prime, sp.delta_prime) = (
            r.random_range(1e-4..0.1),
            r.random_range(1e-4..0.5),
            r.random_range(1e-4..0.1),
            r.random_range(1e-4..0.5),
        );
        let (pt, dt) = tilde_params(p, dh, &sp).unwrap_or((f64::NAN, f64::NAN));
        let (po, dto) = o::tilde(p, dh, sp.eps, sp.delta, sp.eps_prime, sp.delta_prime);
        ((pt - po).abs() + (dt - dto).abs(), 0.0)
    });
    run("binary-entropy", &mut |r| {
        let p = r.random_range(0.0..1.0);
        (binary_entropy(p), o::binary_entropy(p))
    });
    run("reconciliation-leakage", &mut |r| {
        let (n, eta, e, g) = (
            r.random_range(1..1_000_000usize),
            r.random_range(0.0..0.45),
            r.random_range(1e-12..1e-2),
            r.random_range(0.01..1.0),
        );
        let l = reconciliation_leakage(n, eta, e, g).map(|l| l.ell).unwrap_or(f64::NAN);
        // Compare relative to the size of the leak.
        ((l - o::leakage(n as f64, eta, e)) / (1.0 + l), 0.0)
    });
    run("error-rate-failure", &mut |r| {
        let (n, eta, g) = (r.random_range(1..1_000_000usize), r.random_range(0.0..0.45), r.random_range(0.01..1.0));
        let f = reconciliation_leakage(n, eta, 1e-6, g).map(|l| l.failure).unwrap_or(f64::NAN);
        (f, o::error_rate_failure(n as f64, eta, g))
    });
    run("privacy-amplification", &mut |r| {
        let e = r.random_range(1e-15..0.5);
        (privacy_amplification_cost(e), o::pa_cost(e))
    });
    run("key-length", &mut |r| {
        let (k, n, l, pa) = (
            r.random_range(0.0..1.0),
            r.random_range(1..1_000_000usize),
            r.random_range(0.0..5e5),
            r.random_range(0.0..200.0),
        );
        (key_bits(k, n, l, pa) as f64, o::key_bits(k, n as f64, l, pa))
    });
    lines
}

/// Result of checking the winning-probability concentration bound against
/// simulated honest runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLine {
    pub eps_prime: f64,
    pub frequency: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Runs `runs` independent honest protocols of `m` rounds and counts how
/// often `|pwin_hat - pwin| >= eps'`. Passes when the frequency does not
/// exceed the bound by more than the one-sided 99% binomial margin.
pub fn azuma_empirical_check(
    model: &crate::protocol::DeviceModel,
    runs: usize,
    m: usize,
    eps_primes: &[f64],
    max_pwin: f64,
    seed: u64,
) -> Result<Vec<EmpiricalLine>> {
    let honest = crate::game::Strategy::new(
        model.effective_state()?,
        model.strategy.povm_a.clone(),
        model.strategy.povm_b.clone(),
    )?;
    let truth = crate::game::pwin(&honest)?;
    let mut deviations = Vec::with_capacity(runs);
    for r in 0..runs {
        let run_seed = crate::seed::stream_seed(seed, "azuma-check", r as u64);
        let t = crate::protocol::run_protocol(model, m, 1.0, run_seed)?;
        let wins = t.rounds.iter().filter(|x| x.wins()).count();
        deviations.push((wins as f64 / m as f64 - truth).abs());
    }
    Ok(eps_primes
        .iter()
        .map(|&e| {
            let hits = deviations.iter().filter(|&&d| d >= e).count();
            let frequency = hits as f64 / runs as f64;
            let bound = azuma_pwin_failure(m, e, max_pwin);
            let margin = 2.326 * sqrt(bound * (1.0 - bound) / runs as f64);
            EmpiricalLine { eps_prime: e, frequency, bound, passed: frequency <= bound + margin }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::guessing::{GuessMethod, GuessingPoint};

    /// Surface shaped like the real one: zero up to the separable bound,
    /// rising linearly to one bit at `sep + 0.12`.
    fn surface() -> HminSurface {
        let mut nodes = Vec::new();
        for j in 0..6 {
            let d = j as f64 * 0.04;
            let sep = 0.5 * (1.0 + sqrt(d));
            for i in 0..8 {
                let p = 0.5 + (sep + 0.12 - 0.5) * i as f64 / 7.0;
                let h = ((p - sep) / 0.12).clamp(0.0, 1.0);
                nodes.push(GuessingPoint {
                    d_eps: d,
                    pwin_target: p,
                    p_guess: libm::exp2(-h),
                    h_min: h,
                    method: GuessMethod::Seesaw,
                });
            }
        }
        HminSurface::from_nodes(nodes).unwrap()
    }

    fn estimates(m: usize, pwin: f64, deps: f64, eta_b: f64) -> Estimates {
        Estimates { pwin_hat: pwin, deps_hat: deps, eta_b, aborted: false, m, d_size: m / 4, b_size: m / 40 }
    }

    #[test]
    fn azuma_inversion_and_scaling() {
        let (e, mx) = (0.01, 0.8);
        let m = 32.0 * (1.0f64 + mx) * (1.0 + mx) / (e * e);
        assert!((azuma_pwin_failure(m as usize, e, mx) - libm::exp(-m.floor() / m)).abs() < 1e-12);
        let a = azuma_pwin_failure(5000, 0.05, 0.6);
        assert!((azuma_pwin_failure(10_000, 0.05, 0.6) - a * a).abs() < 1e-15);
        assert!(azuma_pwin_failure(5000, 1.0, 0.6) < a);
        assert!(azuma_pwin_failure(5000, 1e3, 0.6) < 1e-300);
    }

    #[test]
    fn pwin_detection_spot_values() {
        let v = pwin_detection_failure(1_000_000, 0.01, 0.01, 0.6, 1.0).unwrap();
        let expect = libm::exp(-1e6 * 1e-4 * 0.59 / 8.0) + libm::exp(-1e6 * 1e-4 / 128.0);
        assert!((v - expect).abs() < 1e-15);
        assert!(
            (pwin_detection_failure(1000, 0.01, 0.0, 0.6, 1.0).unwrap() - 1.0 - azuma_pwin_failure(1000, 0.01, 1.0))
                .abs()
                < 1e-15
        );
        assert!(pwin_detection_failure(1000, 0.6, 0.1, 0.6, 1.0).is_err());
        let mut prev = f64::INFINITY;
        for m in [10, 100, 1000, 10_000, 100_000] {
            let v = pwin_detection_failure(m, 0.02, 0.05, 0.62, 0.7).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn deps_spot_values_and_clamps() {
        let f = deps_failure(1_000_000, 0.1, 0.01, 0.1, 0.05, DepsExponent::Standard);
        let chernoff = libm::exp(-0.01 * 0.01 * 1e6 * 0.04 / 8.0);
        let azuma = 2.0 * libm::exp(-0.1 * 1e6 * 1e-4 / 32.0);
        assert!((f.chernoff - chernoff).abs() < 1e-15 && (f.azuma - azuma.min(1.0)).abs() < 1e-15);
        assert_eq!(deps_failure(1000, 1.0, 0.05, 0.1, 0.05, DepsExponent::Standard).chernoff, 1.0);
        let q = deps_failure(1_000_000, 0.1, 0.01, 0.1, 0.05, DepsExponent::Quartered);
        assert!(q.chernoff > f.chernoff);
        let mut prev = f64::INFINITY;
        for g in [0.05, 0.1, 0.2, 0.5, 1.0] {
            let v = deps_failure(200_000, g, 0.02, 0.2, 0.1, DepsExponent::Standard).total();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn tilde_arithmetic() {
        let mut p = SecurityParams::with_default_slacks(1000, 0.1, 0.01, 1e-6, 1.0);
        (p.eps, p.delta, p.eps_prime, p.delta_prime) = (0.01, 0.1, 0.01, 0.02);
        let (pt, dt) = tilde_params(0.62, 0.05, &p).unwrap();
        assert!((pt - 0.5978).abs() < 1e-12);
        assert!((dt - 0.06 / 0.9).abs() < 1e-12);
        (p.eps, p.delta, p.eps_prime, p.delta_prime) = (1e-12, 1e-12, 1e-12, 1e-12);
        let (pt, dt) = tilde_params(0.62, 0.05, &p).unwrap();
        assert!((pt - 0.62).abs() < 1e-10 && (dt - 0.05).abs() < 1e-10);
    }

    #[test]
    fn leakage_values() {
        let l = reconciliation_leakage(100_000, 0.0, 1e-6, 0.1).unwrap();
        assert!((l.ell - libm::log2(2e6)).abs() < 1e-12);
        let l = reconciliation_leakage(100_000, 0.05, 1e-6, 0.1).unwrap();
        // H(0.055) to 16 digits, from an arbitrary-precision evaluation.
        let h = 0.307_268_359_860_759_7;
        assert!((l.ell - (h * 1e5 + libm::log2(2e6))).abs() < 1e-9, "{}", l.ell);
        assert!(reconciliation_leakage(10, 5.0 / 11.0, 1e-6, 0.1).is_err());
        let mut prev = -1.0;
        for k in 1..45 {
            let v = reconciliation_leakage(1000, k as f64 * 0.01, 1e-6, 0.1).unwrap().ell;
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn kappa_behaviour() {
        let s = surface();
        assert_eq!(kappa(0.55, 0.04, &s).unwrap(), 0.0);
        assert!(kappa(0.62, 0.0, &s).unwrap() > 0.9);
        let mut prev = 0.0;
        for k in 0..20 {
            let v = kappa(0.5 + k as f64 * 0.01, 0.02, &s).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        assert!(kappa(0.6, 0.5, &s).is_err());
    }

    #[test]
    fn key_length_chain() {
        let s = surface();
        let e = estimates(1_000_000, 0.62, 0.0, 0.0);
        let p = SecurityParams::with_default_slacks(e.m, 0.05, 0.01, 1e-6, 0.625);
        let r = key_length(&e, &p, &s).unwrap();
        assert!(r.key_length > 0);
        assert_eq!(r.key_length, key_bits(r.kappa, r.d_size, r.ell, r.pa_cost));
        let sum: f64 = r.failure_budget.iter().map(|b| b.probability).sum();
        assert_eq!(sum, r.total_failure);
        // At d = 0 the detection-probability Chernoff term is vacuous.
        assert!(!r.feasible);
        let low = key_length(&estimates(1_000_000, 0.55, 0.0, 0.0), &p, &s).unwrap();
        assert_eq!((low.kappa, low.key_length, low.feasible), (0.0, 0, false));
        let mut aborted = e;
        aborted.aborted = true;
        assert!(matches!(key_length(&aborted, &p, &s), Err(Error::Aborted { .. })));
    }

    #[test]
    fn key_length_grows_with_m() {
        let s = surface();
        let mut prev = 0;
        for m in [10_000, 100_000, 1_000_000] {
            let e = estimates(m, 0.63, 0.01, 0.0);
            let p = SecurityParams::with_default_slacks(m, 0.05, 0.01, 1e-6, 0.7);
            let r = key_length(&e, &p, &s).unwrap();
            assert!(r.key_length >= prev, "{m}: {} < {prev}", r.key_length);
            prev = r.key_length;
        }
        assert!(prev > 0);
    }

    #[test]
    fn tuning_never_loses_to_defaults_when_feasible() {
        let s = surface();
        let e = estimates(4_000_000_000, 0.66, 0.04, 0.0);
        // eta = 0 would make the error-rate bound vacuous (2 exp(0)).
        let base = SecurityParams::with_default_slacks(e.m, 0.5, 0.01, 1e-6, 0.7);
        let tuned = tune(&e, &base, &s).unwrap();
        assert!(tuned.feasible, "{tuned:?}");
        let default = key_length(&e, &base, &s).unwrap();
        if default.feasible {
            assert!(tuned.key_length >= default.key_length);
        }
        assert!(tuned.total_failure <= base.mu);
    }

    #[test]
    fn audit_passes() {
        for line in formula_audit(5, 11, 1e-12) {
            assert!(line.passed, "{line:?}");
        }
    }
}
