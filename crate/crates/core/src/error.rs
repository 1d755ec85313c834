use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weight parameter must satisfy alpha > 1, got {0}")]
    InvalidAlpha(f64),

    #[error("alpha mismatch: {left} vs {right}")]
    AlphaMismatch { left: f64, right: f64 },

    #[error("pole of the gamma function at z = {0}")]
    GammaPole(Complex64),

    #[error("evaluation at a pole of a spectral prefactor (s = {0})")]
    Pole(Complex64),

    #[error("point outside the unit bidisk: {0}")]
    Domain(String),

    #[error("principal branch violated: base {0} has non-positive real part")]
    Branch(Complex64),

    #[error("not a group element: |a|^2 - |b|^2 = {0}")]
    NotUnimodular(f64),

    #[error("quadrature did not converge after {refinements} refinements (last difference {difference:e})")]
    NonConvergence { refinements: usize, difference: f64 },

    #[error("tail bound failure: {0}")]
    TailBound(String),

    #[error("unmatched operator pair: {0}")]
    UnmatchedPair(String),

    #[error("degenerate hypergeometric denominator: {0}")]
    DegenerateDenominator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
