//! Numerical core of the Coherence Equality (CE) toolkit.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It covers:
//!
//! * [`qmat`]: small dense complex matrices, density matrices, POVMs and
//!   entropies.
//! * [`sdp`]: a primal-dual interior-point solver for the tiny semidefinite
//!   programs that appear in the see-saw half steps.
//! * [`game`]: detection operators, the state transforms `rho -> rho_xy`,
//!   the winning probability and the resource-state families.
//! * [`bounds`]: optimal winning probabilities per resource class, the
//!   stationarity-system audit, entanglement entropy of the optimisers,
//!   guessing probabilities and the convex min-entropy surface.
//! * [`protocol`]: Monte-Carlo simulation of the key distribution rounds
//!   together with the estimators and the abort rule.
//! * [`finitekey`]: concentration bounds, leakage and the final key length.
//! * [`oracle`]: brute-force reference computations used by the audit.
//!
//! All randomness is drawn from ChaCha streams derived with [`seed`].

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod finitekey;
pub mod game;
mod linalg;
mod math;
pub mod oracle;
pub mod protocol;
pub mod qmat;
pub mod sdp;
pub mod seed;

mod error;

pub use error::{Error, Result};
