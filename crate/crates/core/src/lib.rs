//! Spectral analysis of the weighted Bergman space on the bidisk under the
//! diagonal SL(2,R) action.
//!
//! Holomorphic functions f(z, ū) are stored as coefficient matrices
//! ([`CoefMatrix`]). The integral transform against the kernel
//! K(z̄, u; φ, s) maps them to [`SpectralFunction`]s, trigonometric
//! polynomials in φ with coefficients analytic in s. Under that transform the
//! diagonal generators become first-order operators in φ and the
//! complementary generators become difference operators shifting s by ±i.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod error;
pub mod hahn;
pub mod kernel;
pub mod model;
pub mod spectral;

pub use arith::{gamma, log_gamma, pochhammer, ComplexValue};
pub use error::{Error, Result};
pub use kernel::{
    kernel_coeff, kernel_eval, parseval_check, plancherel_weight, quadrature_transform, spectral_pairing,
    transform, SMax, SpectralFunction,
};
pub use model::{apply_algebra, apply_group, AlgebraOp, Alpha, CoefMatrix, GroupElement};
pub use spectral::{apply_spectral, verify_intertwine, SamplePoint, SpectralOp};
