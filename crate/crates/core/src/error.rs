use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("POVM elements do not sum to identity (residual {0:e})")]
    NotComplete(f64),
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("target {target} exceeds the attainable optimum {optimum}")]
    InfeasibleTarget { target: f64, optimum: f64 },
    #[error("test set B is empty; increase m or gamma")]
    EmptyTestSet,
    #[error("protocol aborted: error rate {eta_b} above threshold {eta}")]
    Aborted { eta_b: f64, eta: f64 },
    #[error("query ({pwin}, {d_eps}) lies outside the surface domain")]
    OutsideDomain { pwin: f64, d_eps: f64 },
    #[error("grid too sparse: {0}")]
    GridTooSparse(String),
    #[error("semidefinite program did not converge: {0}")]
    Solver(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
