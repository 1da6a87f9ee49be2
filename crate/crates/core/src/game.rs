//! The Coherence Equality game.
//!
//! Each lab holds a `(d+1)`-level system in the occupation basis
//! `|0>, ..., |d>`; the joint basis is ordered `|ij> -> i (d+1) + j`, so for
//! `d = 1` it reads `|00>, |01>, |10>, |11>`. A lab that blocks (`x = 1`)
//! destroys its share and forwards vacuum; the servers then output bits
//! `a, b` and the game is won when `a ^ b == x ^ y`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::math::sqrt;
use crate::qmat::{
    eig_hermitian, kron, partial_trace_matrix, pauli, re, tol, ComplexMatrix, DensityMatrix, Keep, Povm,
};
use crate::{Error, Result};

/// Blocking choices of Alice (`x`) and Bob (`y`); 1 means detect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetectionSetting {
    pub x: u8,
    pub y: u8,
}

impl DetectionSetting {
    pub const ALL: [DetectionSetting; 4] = [
        DetectionSetting { x: 0, y: 0 },
        DetectionSetting { x: 0, y: 1 },
        DetectionSetting { x: 1, y: 0 },
        DetectionSetting { x: 1, y: 1 },
    ];

    pub fn new(x: u8, y: u8) -> Result<Self> {
        if x > 1 || y > 1 {
            return Err(Error::param("setting", "inputs must be bits"));
        }
        Ok(Self { x, y })
    }

    /// Whether outputs `(a, b)` win in this setting.
    pub fn wins(&self, a: u8, b: u8) -> bool {
        (a ^ b) == (self.x ^ self.y)
    }
}

/// First-stage detector operators of one lab holding up to `d` photons.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorBank {
    d: usize,
    blocking: Povm,
}

impl DetectorBank {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", "at least one photon per lab"));
        }
        let blocking = Povm::binary(ComplexMatrix::basis_projector(d + 1, 0))?;
        Ok(Self { d, blocking })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `{D_{0|1}, D_{1|1}}`: vacuum versus any photon.
    pub fn blocking(&self) -> &Povm {
        &self.blocking
    }

    /// `D_{0|0} = I / (d + 1)`.
    pub fn passing(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.d + 1).scale(1.0 / (self.d + 1) as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResourceKind {
    EntangledCoherent,
    SeparableCoherent,
    MixedNonCoherent,
}

impl ResourceKind {
    pub const ALL: [ResourceKind; 3] =
        [ResourceKind::EntangledCoherent, ResourceKind::SeparableCoherent, ResourceKind::MixedNonCoherent];

    pub fn name(&self) -> &'static str {
        match self {
            ResourceKind::EntangledCoherent => "entangled",
            ResourceKind::SeparableCoherent => "separable",
            ResourceKind::MixedNonCoherent => "mixed",
        }
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entangled" => Ok(ResourceKind::EntangledCoherent),
            "separable" => Ok(ResourceKind::SeparableCoherent),
            "mixed" => Ok(ResourceKind::MixedNonCoherent),
            _ => Err(Error::param("family", "expected entangled, separable or mixed")),
        }
    }
}

/// A resource class at a given single-detection level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResourceFamily {
    /// `c00 |00> + c01 (|01> + |10>) + sqrt(d_eps) |11>`.
    EntangledCoherent { d_eps: f64, c00: f64, c01: f64 },
    /// `(sqrt(1 - d_eps) |0> + sqrt(d_eps) |1>) (x) |1>`.
    SeparableCoherent { d_eps: f64 },
    /// `(1 - d_eps) |10><10| + d_eps |11><11|`.
    MixedNonCoherent { d_eps: f64 },
}

impl ResourceFamily {
    pub fn kind(&self) -> ResourceKind {
        match self {
            ResourceFamily::EntangledCoherent { .. } => ResourceKind::EntangledCoherent,
            ResourceFamily::SeparableCoherent { .. } => ResourceKind::SeparableCoherent,
            ResourceFamily::MixedNonCoherent { .. } => ResourceKind::MixedNonCoherent,
        }
    }

    pub fn d_eps(&self) -> f64 {
        match *self {
            ResourceFamily::EntangledCoherent { d_eps, .. }
            | ResourceFamily::SeparableCoherent { d_eps }
            | ResourceFamily::MixedNonCoherent { d_eps } => d_eps,
        }
    }
}

pub(crate) fn check_d_eps(d_eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&d_eps) {
        return Err(Error::param("d_eps", "must lie in [0, 1]"));
    }
    Ok(())
}

pub fn resource_state(f: &ResourceFamily) -> Result<DensityMatrix> {
    let d_eps = f.d_eps();
    check_d_eps(d_eps)?;
    match *f {
        ResourceFamily::EntangledCoherent { c00, c01, .. } => {
            check_normalisation(c00, c01, d_eps)?;
            DensityMatrix::pure_real(&[c00, c01, c01, sqrt(d_eps)])
        }
        ResourceFamily::SeparableCoherent { .. } => {
            DensityMatrix::pure_real(&[0.0, sqrt(1.0 - d_eps), 0.0, sqrt(d_eps)])
        }
        ResourceFamily::MixedNonCoherent { .. } => {
            DensityMatrix::new(ComplexMatrix::diag(&[0.0, 0.0, 1.0 - d_eps, d_eps]))
        }
    }
}

fn check_normalisation(c00: f64, c01: f64, d_eps: f64) -> Result<()> {
    let resid = c00 * c00 + 2.0 * c01 * c01 - (1.0 - d_eps);
    if resid.abs() > tol::TRACE || !resid.is_finite() {
        return Err(Error::param("amplitudes", "c00^2 + 2 c01^2 must equal 1 - d_eps"));
    }
    Ok(())
}

/// `M_a = (I + (-1)^a (n_x X + sqrt(1 - n_x^2) Z)) / 2`.
pub fn equatorial_measurement(n_x: f64) -> Result<Povm> {
    if !(-1.0..=1.0).contains(&n_x) {
        return Err(Error::param("n_x", "must lie in [-1, 1]"));
    }
    let n_z = sqrt(1.0 - n_x * n_x);
    let bloch = &pauli::x().scale(n_x) + &pauli::z().scale(n_z);
    Povm::binary((&ComplexMatrix::identity(2) + &bloch).scale(0.5))
}

/// Photon-presence measurement: outcome 1 iff the lab is not in vacuum.
pub fn presence_measurement(d: usize) -> Result<Povm> {
    Ok(DetectorBank::new(d)?.blocking().clone())
}

/// State, two server POVMs, and the photon cutoff they share.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    pub rho: DensityMatrix,
    pub povm_a: Povm,
    pub povm_b: Povm,
}

impl Strategy {
    pub fn new(rho: DensityMatrix, povm_a: Povm, povm_b: Povm) -> Result<Self> {
        if povm_a.outcomes() != 2 || povm_b.outcomes() != 2 {
            return Err(Error::param("povm", "servers output a single bit"));
        }
        if povm_a.dim() != povm_b.dim() || povm_a.dim() < 2 {
            return Err(Error::DimensionMismatch { expected: povm_a.dim(), found: povm_b.dim() });
        }
        let n = povm_a.dim() * povm_b.dim();
        if rho.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: rho.dim() });
        }
        Ok(Self { rho, povm_a, povm_b })
    }

    /// Photons per lab.
    pub fn d(&self) -> usize {
        self.povm_a.dim() - 1
    }
}

fn lab_dim(rho_dim: usize, d: usize) -> Result<usize> {
    let k = d + 1;
    if d == 0 || rho_dim != k * k {
        return Err(Error::DimensionMismatch { expected: k * k, found: rho_dim });
    }
    Ok(k)
}

fn transform_matrix(m: &ComplexMatrix, s: DetectionSetting, k: usize) -> Result<ComplexMatrix> {
    let vac = ComplexMatrix::basis_projector(k, 0);
    Ok(match (s.x, s.y) {
        (0, 0) => m.clone(),
        (0, _) => kron(&partial_trace_matrix(m, (k, k), Keep::A)?, &vac),
        (_, 0) => kron(&vac, &partial_trace_matrix(m, (k, k), Keep::B)?),
        _ => kron(&vac, &vac).scale(m.trace().re),
    })
}

/// The state `rho_xy` forwarded to the servers.
pub fn transform_state(rho: &DensityMatrix, setting: DetectionSetting, d: usize) -> Result<DensityMatrix> {
    let k = lab_dim(rho.dim(), d)?;
    DensityMatrix::new(transform_matrix(rho.matrix(), setting, k)?)
}

/// Winning probability `1/4 sum_xy sum_{a^b = x^y} Tr[rho_xy A_a (x) B_b]`.
pub fn pwin(s: &Strategy) -> Result<f64> {
    let c = objective_operator(&s.povm_a, &s.povm_b)?;
    Ok(s.rho.matrix().inner(&c).clamp(0.0, 1.0))
}

/// Operator `C` with `pwin = Tr(C rho)` for fixed server measurements.
///
/// Uses the adjoint of each state transform: blocking one side replaces the
/// blocked factor by the identity weighted with the vacuum element of that
/// side's POVM.
pub fn objective_operator(povm_a: &Povm, povm_b: &Povm) -> Result<ComplexMatrix> {
    let k = povm_a.dim();
    if povm_b.dim() != k || povm_a.outcomes() != 2 || povm_b.outcomes() != 2 {
        return Err(Error::DimensionMismatch { expected: k, found: povm_b.dim() });
    }
    let id = ComplexMatrix::identity(k);
    let mut c = ComplexMatrix::zeros(k * k, k * k);
    for s in DetectionSetting::ALL {
        for a in 0..2u8 {
            for b in 0..2u8 {
                if !s.wins(a, b) {
                    continue;
                }
                let ea = povm_a.element(a as usize);
                let eb = povm_b.element(b as usize);
                let term = match (s.x, s.y) {
                    (0, 0) => kron(ea, eb),
                    (0, _) => kron(ea, &id).scale(eb[(0, 0)].re),
                    (_, 0) => kron(&id, eb).scale(ea[(0, 0)].re),
                    _ => ComplexMatrix::identity(k * k).scale(ea[(0, 0)].re * eb[(0, 0)].re),
                };
                c = &c + &term;
            }
        }
    }
    Ok(c.scale(0.25).hermitian_part())
}

/// Which server a best response is computed for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Server {
    A,
    B,
}

/// Effective operators `F_0, F_1` with `pwin = Tr(F_0 M_0) + Tr(F_1 M_1)` as
/// a function of one server's POVM `M`, the other one held fixed.
pub fn server_operators(rho: &DensityMatrix, other: &Povm, server: Server) -> Result<[ComplexMatrix; 2]> {
    let k = other.dim();
    lab_dim(rho.dim(), k - 1)?;
    let mut f = [ComplexMatrix::zeros(k, k), ComplexMatrix::zeros(k, k)];
    let id = ComplexMatrix::identity(k);
    for s in DetectionSetting::ALL {
        let rho_xy = transform_matrix(rho.matrix(), s, k)?;
        for mine in 0..2u8 {
            for theirs in 0..2u8 {
                let (a, b) = match server {
                    Server::A => (mine, theirs),
                    Server::B => (theirs, mine),
                };
                if !s.wins(a, b) {
                    continue;
                }
                let e = other.element(theirs as usize);
                let reduced = match server {
                    Server::A => partial_trace_matrix(&(&rho_xy * &kron(&id, e)), (k, k), Keep::A)?,
                    Server::B => partial_trace_matrix(&(&rho_xy * &kron(e, &id)), (k, k), Keep::B)?,
                };
                f[mine as usize] = &f[mine as usize] + &reduced.scale(0.25);
            }
        }
    }
    Ok([f[0].hermitian_part(), f[1].hermitian_part()])
}

/// Optimal two-outcome POVM for one server: the projector onto the positive
/// eigenspace of `F_0 - F_1` answers 0.
pub fn best_response(rho: &DensityMatrix, other: &Povm, server: Server) -> Result<Povm> {
    let [f0, f1] = server_operators(rho, other, server)?;
    let eig = eig_hermitian(&(&f0 - &f1))?;
    let k = f0.rows();
    let mut p0 = ComplexMatrix::zeros(k, k);
    for (i, &v) in eig.values.iter().enumerate() {
        if v > 0.0 {
            p0 = &p0 + &ComplexMatrix::projector(&eig.vector(i));
        }
    }
    Povm::binary(p0.hermitian_part())
}

/// Closed-form winning probability of the symmetric two-qubit strategy:
/// state `c00 |00> + c01 (|01> + |10>) + sqrt(d_eps) |11>` and both servers
/// measuring the equatorial projectors with parameter `n_x`.
pub fn pwin_param(c00: f64, c01: f64, d_eps: f64, n_x: f64) -> Result<f64> {
    check_d_eps(d_eps)?;
    check_normalisation(c00, c01, d_eps)?;
    if !(-1.0..=1.0).contains(&n_x) {
        return Err(Error::param("n_x", "must lie in [-1, 1]"));
    }
    Ok(pwin_formula(c00, c01, d_eps, n_x))
}

/// [`pwin_param`] without the feasibility checks.
pub(crate) fn pwin_formula(c00: f64, c01: f64, d_eps: f64, n_x: f64) -> f64 {
    let s = sqrt(d_eps);
    let n2 = n_x * n_x;
    (2.0 * c00 * s * n2 - 8.0 * c01 * s * n_x * sqrt((1.0 - n2).max(0.0)) - (1.0 + 3.0 * d_eps) * (n2 - 2.0)
        + 4.0 * c01 * c01 * (1.0 + n2)
        + c00 * c00 * (2.0 + n2))
        / 8.0
}

/// The strategy that [`pwin_param`] evaluates.
pub fn param_strategy(c00: f64, c01: f64, d_eps: f64, n_x: f64) -> Result<Strategy> {
    let rho = resource_state(&ResourceFamily::EntangledCoherent { d_eps, c00, c01 })?;
    let m = equatorial_measurement(n_x)?;
    Strategy::new(rho, m.clone(), m)
}

/// 0-indexed diagonal positions with a photon in both labs: the 1-indexed
/// ranges `[a (d+1) + 2, (a+1)(d+1)]` for `a = 1..=d`.
pub fn both_occupied_indices(d: usize) -> Vec<usize> {
    let k = d + 1;
    let mut out = Vec::new();
    for a in 1..=d {
        for one_based in (a * k + 2)..=((a + 1) * k) {
            out.push(one_based - 1);
        }
    }
    out
}

/// Projector onto the both-occupied subspace; `Tr(P rho) <= d_eps` is the
/// single-detection constraint in state form.
pub fn single_detection_operator(d: usize) -> ComplexMatrix {
    let k = d + 1;
    let mut p = ComplexMatrix::zeros(k * k, k * k);
    for i in both_occupied_indices(d) {
        p[(i, i)] = re(1.0);
    }
    p
}

/// The two readings of the single-detection probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleDetection {
    /// `Tr[rho D_{1|1} (x) D_{1|1}]`.
    pub operational: f64,
    /// Sum of the both-occupied diagonal elements.
    pub state_form: f64,
}

pub fn single_detection_forms(rho: &DensityMatrix, d: usize) -> Result<SingleDetection> {
    lab_dim(rho.dim(), d)?;
    let bank = DetectorBank::new(d)?;
    let click = bank.blocking().element(1);
    let operational = rho.matrix().inner(&kron(click, click));
    let state_form = both_occupied_indices(d).into_iter().map(|i| rho.population(i)).sum();
    Ok(SingleDetection { operational, state_form })
}

/// Probability that both labs detect a photon when both block.
pub fn single_detection_prob(rho: &DensityMatrix, d: usize) -> Result<f64> {
    let f = single_detection_forms(rho, d)?;
    debug_assert!((f.operational - f.state_form).abs() <= 1e-12, "single-detection forms disagree: {f:?}");
    Ok(f.state_form)
}

/// First-stage statistics `p(alpha, beta | 1, 1)`, row-major in `alpha`.
pub fn detection_statistics(rho: &DensityMatrix, d: usize) -> Result<[f64; 4]> {
    lab_dim(rho.dim(), d)?;
    let bank = DetectorBank::new(d)?;
    let mut out = [0.0; 4];
    for alpha in 0..2 {
        for beta in 0..2 {
            let op = kron(bank.blocking().element(alpha), bank.blocking().element(beta));
            out[alpha * 2 + beta] = rho.matrix().inner(&op).max(0.0);
        }
    }
    Ok(out)
}

/// Winning indicator table `w[x][y][a][b]`, handy for oracles.
pub fn win_table() -> [[[[bool; 2]; 2]; 2]; 2] {
    let mut w = [[[[false; 2]; 2]; 2]; 2];
    for (x, wx) in w.iter_mut().enumerate() {
        for (y, wy) in wx.iter_mut().enumerate() {
            for (a, wa) in wy.iter_mut().enumerate() {
                for (b, v) in wa.iter_mut().enumerate() {
                    *v = (a ^ b) == (x ^ y);
                }
            }
        }
    }
    w
}
