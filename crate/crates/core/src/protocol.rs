//! Monte-Carlo simulation of the key distribution rounds.
//!
//! Each round draws uniform inputs `x, y`. A blocking lab records a detection
//! bit, the forwarded state is transformed accordingly and the servers'
//! outcomes `a, b` are sampled from the Born rule. Rounds where both labs
//! block form the detection set `D`; a uniformly random fraction `gamma` of
//! it is revealed as the test set `B`.
//!
//! The simulated devices are honest and i.i.d.; the device model only adds
//! white noise to the source and imperfect detectors in the labs.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{optimize_pwin, SeesawConfig};
use crate::game::{detection_statistics, transform_state, DetectionSetting, ResourceKind, Strategy};
use crate::qmat::{born_probabilities, DensityMatrix};
use crate::seed::{self, StreamRng};
use crate::{Error, Result};

/// Imperfect single-photon detector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub efficiency: f64,
    pub dark_count: f64,
}

impl Detector {
    pub const IDEAL: Self = Self { efficiency: 1.0, dark_count: 0.0 };

    fn click_probability(&self, occupied: bool) -> f64 {
        if occupied {
            self.efficiency + (1.0 - self.efficiency) * self.dark_count
        } else {
            self.dark_count
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviceModel {
    pub strategy: Strategy,
    /// Weight of the strategy's state against white noise.
    pub visibility: f64,
    pub detector_a: Detector,
    pub detector_b: Detector,
}

impl DeviceModel {
    /// Noise-free devices running `strategy`.
    pub fn ideal(strategy: Strategy) -> Self {
        Self { strategy, visibility: 1.0, detector_a: Detector::IDEAL, detector_b: Detector::IDEAL }
    }

    /// Noise-free devices running the best entangled strategy at `d_eps`.
    pub fn honest_optimal(d_eps: f64, cfg: &SeesawConfig) -> Result<Self> {
        Ok(Self::ideal(optimize_pwin(ResourceKind::EntangledCoherent, d_eps, cfg)?.strategy))
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::param(name, "must lie in [0, 1]"))
            }
        };
        unit("visibility", self.visibility)?;
        unit("efficiency", self.detector_a.efficiency)?;
        unit("efficiency", self.detector_b.efficiency)?;
        unit("dark_count", self.detector_a.dark_count)?;
        unit("dark_count", self.detector_b.dark_count)
    }

    /// Source state after white noise.
    pub fn effective_state(&self) -> Result<DensityMatrix> {
        self.validate()?;
        let rho = &self.strategy.rho;
        rho.mix(&DensityMatrix::maximally_mixed(rho.dim()), self.visibility)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub i: u64,
    pub x: u8,
    pub y: u8,
    /// Alice's detection bit, present iff `x = 1`.
    pub alpha: Option<u8>,
    /// Bob's detection bit, present iff `y = 1`.
    pub beta: Option<u8>,
    pub a: u8,
    pub b: u8,
}

impl RoundRecord {
    pub fn is_consistent(&self) -> bool {
        self.x <= 1
            && self.y <= 1
            && self.a <= 1
            && self.b <= 1
            && self.alpha.is_some() == (self.x == 1)
            && self.beta.is_some() == (self.y == 1)
            && self.alpha.is_none_or(|v| v <= 1)
            && self.beta.is_none_or(|v| v <= 1)
    }

    pub fn wins(&self) -> bool {
        (self.a ^ self.b) == (self.x ^ self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub rounds: Vec<RoundRecord>,
    pub seed: u64,
    pub gamma: f64,
    /// Indices (into `rounds`) where both labs blocked, ascending.
    pub detection: Vec<usize>,
    /// Test subset of `detection`, ascending.
    pub test: Vec<usize>,
}

impl Transcript {
    /// Derives the detection set from the rounds and samples the test set
    /// from the stream `(seed, "test-set")`: a partial Fisher-Yates shuffle
    /// of `D` keeps its first `ceil(gamma |D|)` entries.
    pub fn from_rounds(rounds: Vec<RoundRecord>, gamma: f64, seed: u64) -> Result<Self> {
        check_gamma(gamma)?;
        if let Some(r) = rounds.iter().find(|r| !r.is_consistent()) {
            return Err(Error::param("rounds", alloc::format!("inconsistent record {}", r.i)));
        }
        let detection: Vec<usize> =
            rounds.iter().enumerate().filter(|(_, r)| r.x == 1 && r.y == 1).map(|(k, _)| k).collect();
        let k = test_set_size(detection.len(), gamma);
        let mut pool = detection.clone();
        let mut rng = seed::stream(seed, "test-set", 0);
        for j in 0..k {
            let pick = rng.random_range(j..pool.len());
            pool.swap(j, pick);
        }
        pool.truncate(k);
        pool.sort_unstable();
        Ok(Self { rounds, seed, gamma, detection, test: pool })
    }

    pub fn m(&self) -> usize {
        self.rounds.len()
    }
}

/// `|B| = ceil(gamma |D|)`, computed so that exact products are not pushed up
/// by rounding (e.g. `0.1 * 30`).
pub fn test_set_size(d_size: usize, gamma: f64) -> usize {
    let exact = gamma * d_size as f64;
    let rounded = libm::round(exact);
    let k = if (exact - rounded).abs() < 1e-9 { rounded } else { crate::math::ceil(exact) };
    (k as usize).min(d_size)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::param("gamma", "must lie in (0, 1]"));
    }
    Ok(())
}

/// Categorical draw from a distribution over `0..n`.
fn draw(rng: &mut StreamRng, p: &[f64]) -> usize {
    let u: f64 = rng.random::<f64>() * p.iter().sum::<f64>();
    let mut acc = 0.0;
    for (k, &w) in p.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    // Round-off: fall back to the last outcome with positive weight.
    p.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Runs `m` rounds with randomness from the stream `(seed, "rounds")`.
pub fn run_protocol(model: &DeviceModel, m: usize, gamma: f64, seed: u64) -> Result<Transcript> {
    if m == 0 {
        return Err(Error::param("m", "at least one round"));
    }
    check_gamma(gamma)?;
    let rho = model.effective_state()?;
    let d = model.strategy.d();
    // Occupancy distribution when both labs block, row-major in Alice's bit.
    let occupancy = detection_statistics(&rho, d)?;
    let occ_a = [occupancy[0] + occupancy[1], occupancy[2] + occupancy[3]];
    let occ_b = [occupancy[0] + occupancy[2], occupancy[1] + occupancy[3]];
    let mut outcomes = [[0.0; 4]; 4];
    for (k, dist) in outcomes.iter_mut().enumerate() {
        let s = DetectionSetting::new((k >> 1) as u8, (k & 1) as u8)?;
        let fwd = transform_state(&rho, s, d)?;
        let p = born_probabilities(&fwd, &model.strategy.povm_a, &model.strategy.povm_b)?;
        dist.copy_from_slice(&p.p);
    }

    let mut rng = seed::stream(seed, "rounds", 0);
    let click = |det: &Detector, occupied: bool, rng: &mut StreamRng| -> u8 {
        u8::from(rng.random::<f64>() < det.click_probability(occupied))
    };
    let mut rounds = Vec::with_capacity(m);
    for i in 0..m {
        let x = u8::from(rng.random::<bool>());
        let y = u8::from(rng.random::<bool>());
        let (alpha, beta) = match (x, y) {
            (0, 0) => (None, None),
            (1, 0) => (Some(click(&model.detector_a, draw(&mut rng, &occ_a) == 1, &mut rng)), None),
            (0, _) => (None, Some(click(&model.detector_b, draw(&mut rng, &occ_b) == 1, &mut rng))),
            _ => {
                let k = draw(&mut rng, &occupancy);
                let al = click(&model.detector_a, k >> 1 == 1, &mut rng);
                let be = click(&model.detector_b, k & 1 == 1, &mut rng);
                (Some(al), Some(be))
            }
        };
        let ab = draw(&mut rng, &outcomes[usize::from(x) * 2 + usize::from(y)]);
        rounds.push(RoundRecord { i: i as u64, x, y, alpha, beta, a: (ab >> 1) as u8, b: (ab & 1) as u8 });
    }
    Transcript::from_rounds(rounds, gamma, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    /// Fraction of all rounds that win the game.
    pub pwin_hat: f64,
    /// Fraction of test rounds where both labs detect.
    pub deps_hat: f64,
    /// Fraction of test rounds whose detection bits disagree after Bob's
    /// inversion, i.e. with `alpha = beta`.
    pub eta_b: f64,
    pub aborted: bool,
    pub m: usize,
    pub d_size: usize,
    pub b_size: usize,
}

pub fn estimate(t: &Transcript) -> Result<Estimates> {
    if t.test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let wins = t.rounds.iter().filter(|r| r.wins()).count();
    let mut both = 0usize;
    let mut disagree = 0usize;
    for &k in &t.test {
        let r = &t.rounds[k];
        let (al, be) = (r.alpha.unwrap_or(0), r.beta.unwrap_or(0));
        both += usize::from(al == 1 && be == 1);
        disagree += usize::from(al != 1 - be);
    }
    let nb = t.test.len() as f64;
    Ok(Estimates {
        pwin_hat: wins as f64 / t.m() as f64,
        deps_hat: both as f64 / nb,
        eta_b: disagree as f64 / nb,
        aborted: false,
        m: t.m(),
        d_size: t.detection.len(),
        b_size: t.test.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Abort,
}

/// Aborts iff the test-set error rate strictly exceeds `eta`; the decision
/// is recorded in `e.aborted`.
pub fn abort_check(e: &mut Estimates, eta: f64) -> Verdict {
    e.aborted = e.eta_b > eta;
    if e.aborted {
        Verdict::Abort
    } else {
        Verdict::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{equatorial_measurement, presence_measurement};
    use alloc::vec;

    fn perfect_model() -> DeviceModel {
        let rho = DensityMatrix::basis(4, 3);
        let m = presence_measurement(1).unwrap();
        DeviceModel::ideal(Strategy::new(rho, m.clone(), m).unwrap())
    }

    fn rec(i: u64, x: u8, y: u8, alpha: Option<u8>, beta: Option<u8>, a: u8, b: u8) -> RoundRecord {
        RoundRecord { i, x, y, alpha, beta, a, b }
    }

    #[test]
    fn perfect_resource_always_wins() {
        let t = run_protocol(&perfect_model(), 10_000, 0.5, 1).unwrap();
        assert!(t.rounds.iter().all(|r| r.wins() && r.is_consistent()));
        let e = estimate(&t).unwrap();
        assert_eq!(e.pwin_hat, 1.0);
        assert_eq!(e.deps_hat, 1.0);
    }

    #[test]
    fn white_noise_wins_half_the_time() {
        // With photon-number servers the vacuum of x = y = 1 always wins, so
        // use X measurements, which are unbiased on every forwarded state.
        let x = equatorial_measurement(1.0).unwrap();
        let mut model = DeviceModel::ideal(Strategy::new(DensityMatrix::basis(4, 3), x.clone(), x).unwrap());
        model.visibility = 0.0;
        let m = 40_000;
        let e = estimate(&run_protocol(&model, m, 0.5, 3).unwrap()).unwrap();
        let sigma = (0.25 / m as f64).sqrt();
        assert!((e.pwin_hat - 0.5).abs() < 3.0 * sigma, "{}", e.pwin_hat);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = run_protocol(&perfect_model(), 2_000, 0.3, 9).unwrap();
        let b = run_protocol(&perfect_model(), 2_000, 0.3, 9).unwrap();
        assert_eq!(a, b);
        let c = run_protocol(&perfect_model(), 2_000, 0.3, 10).unwrap();
        assert_ne!(a.test, c.test);
    }

    #[test]
    fn hand_built_transcript() {
        let rounds = vec![
            rec(0, 0, 0, None, None, 0, 0),       // win
            rec(1, 1, 1, Some(1), Some(0), 1, 1), // win
            rec(2, 1, 1, Some(1), Some(1), 0, 1), // lose
            rec(3, 1, 0, Some(0), None, 1, 0),    // win
            rec(4, 0, 1, None, Some(1), 0, 0),    // lose
            rec(5, 1, 1, Some(0), Some(0), 0, 0), // win
            rec(6, 1, 1, Some(0), Some(1), 1, 0), // lose
            rec(7, 0, 0, None, None, 1, 1),       // win
        ];
        let t = Transcript::from_rounds(rounds, 1.0, 0).unwrap();
        assert_eq!(t.detection, vec![1, 2, 5, 6]);
        assert_eq!(t.test, t.detection);
        let e = estimate(&t).unwrap();
        assert_eq!(e.pwin_hat, 5.0 / 8.0);
        assert_eq!(e.deps_hat, 1.0 / 4.0);
        // (1,1) and (0,0) disagree after inversion.
        assert_eq!(e.eta_b, 2.0 / 4.0);
        assert_eq!((e.m, e.d_size, e.b_size), (8, 4, 4));
    }

    #[test]
    fn anticorrelated_and_doubly_occupied_tests() {
        let anti: Vec<_> = (0..10).map(|i| rec(i, 1, 1, Some(1), Some(0), 0, 0)).collect();
        let e = estimate(&Transcript::from_rounds(anti, 0.5, 2).unwrap()).unwrap();
        assert_eq!((e.deps_hat, e.eta_b), (0.0, 0.0));
        let both: Vec<_> = (0..10).map(|i| rec(i, 1, 1, Some(1), Some(1), 0, 0)).collect();
        assert_eq!(estimate(&Transcript::from_rounds(both, 0.5, 2).unwrap()).unwrap().deps_hat, 1.0);
    }

    #[test]
    fn abort_rule_is_strict() {
        let t = Transcript::from_rounds(vec![rec(0, 1, 1, Some(1), Some(0), 0, 0)], 1.0, 0).unwrap();
        let mut e = estimate(&t).unwrap();
        assert_eq!(abort_check(&mut e, 0.05), Verdict::Pass);
        e.eta_b = 0.2;
        assert_eq!(abort_check(&mut e, 0.05), Verdict::Abort);
        assert!(e.aborted);
        e.eta_b = 0.05;
        assert_eq!(abort_check(&mut e, 0.05), Verdict::Pass);
        assert!(!e.aborted);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(run_protocol(&perfect_model(), 0, 0.5, 0).is_err());
        assert!(run_protocol(&perfect_model(), 10, 0.0, 0).is_err());
        let mut m = perfect_model();
        m.visibility = 1.5;
        assert!(run_protocol(&m, 10, 0.5, 0).is_err());
        let bad = vec![rec(0, 1, 0, None, None, 0, 0)];
        assert!(Transcript::from_rounds(bad, 0.5, 0).is_err());
        let none = vec![rec(0, 0, 0, None, None, 0, 0)];
        assert_eq!(estimate(&Transcript::from_rounds(none, 0.5, 0).unwrap()), Err(Error::EmptyTestSet));
    }

    #[test]
    fn test_set_sizes() {
        assert_eq!(test_set_size(30, 0.1), 3);
        assert_eq!(test_set_size(31, 0.1), 4);
        assert_eq!(test_set_size(0, 0.5), 0);
        assert_eq!(test_set_size(7, 1.0), 7);
    }

    #[test]
    fn dark_counts_touch_only_detection_bits() {
        let mut model = perfect_model();
        model.detector_a = Detector { efficiency: 0.5, dark_count: 0.1 };
        let t = run_protocol(&model, 20_000, 1.0, 5).unwrap();
        assert!(t.rounds.iter().all(|r| r.wins()));
        let e = estimate(&t).unwrap();
        // Alice clicks with probability 0.5 + 0.5 * 0.1.
        let sigma = (0.55 * 0.45 / e.b_size as f64).sqrt();
        assert!((e.deps_hat - 0.55).abs() < 4.0 * sigma);
    }
}
