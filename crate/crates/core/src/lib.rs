//! Numerical laboratory for the interpolating spin Hamiltonian
//! `H(s, alpha) = (1 - s) (I/2 - S_x/n) + s (e^alpha - e^(2 alpha S_z / n)) / (2 sinh alpha)`.
//!
//! Everything runs in the `n + 1` dimensional maximal-spin sector, where `H`
//! is a real symmetric tridiagonal matrix. The [`oracle`] module rebuilds the
//! same operator in the full `2^n` space from Pauli matrices for cross-checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod eigensolver;
pub mod error;
pub mod meanfield;
pub mod model;
pub mod observables;
pub mod optimize;
pub mod oracle;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{ModelParams, SymmetricState, TridiagonalOperator};

/// `3 sqrt(3) / 2`, the end of the first-order line.
pub const ALPHA_CRITICAL: f64 = 2.598_076_211_353_316;
