//! Spectral-side images of the sl₂ ⊕ sl₂ operators.
//!
//! The diagonal generators L0, L1, Lm1 become first-order operators in φ
//! (D0, D1, Dm1). The complementary generators M0, M1, Mm1 become
//! second-order difference operators Q0, Q1, Qm1 that sample F at s ± i.
//! Writing D = ∂/(i∂φ):
//!
//! ```text
//! D1  F = e^{iφ}  [ D F + (½+is) F ]
//! Dm1 F = e^{−iφ} [ −D F + (½+is) F ]
//! Q0  F = −(−½+is)(−α+½+is)/(2is) F(s+i) + (½+is)(α−½+is)/(2is) F(s−i)
//!         + (−α+½+is)/(2is(−½+is)) D²F(s+i)
//! Q±1 F = e^{±iφ} [ (½+is)(−α+½+is)/(2is) F(s+i) + (½+is)(α−½+is)/(2is) F(s−i)
//!         + (−α+½+is)/(2is(−½+is)) D²F(s+i) ± (−α+½+is)/(−½+is) D F(s+i) ]
//! ```

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{c, principal_pow, I};
use crate::error::{Error, Result};
use crate::kernel::{boundary_exponent, cross_exponent, transform, KernelBases, SpectralFunction};
use crate::model::{apply_algebra, AlgebraOp, Alpha, CoefMatrix};

/// Spectral operators paired with the algebra generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpectralOp {
    D0,
    D1,
    Dm1,
    Q0,
    Q1,
    Qm1,
}

impl SpectralOp {
    pub const ALL: [SpectralOp; 6] = [
        SpectralOp::D0,
        SpectralOp::D1,
        SpectralOp::Dm1,
        SpectralOp::Q0,
        SpectralOp::Q1,
        SpectralOp::Qm1,
    ];

    /// The algebra generator this operator intertwines with.
    pub fn partner(self) -> AlgebraOp {
        match self {
            SpectralOp::D0 => AlgebraOp::L0,
            SpectralOp::D1 => AlgebraOp::L1,
            SpectralOp::Dm1 => AlgebraOp::Lm1,
            SpectralOp::Q0 => AlgebraOp::M0,
            SpectralOp::Q1 => AlgebraOp::M1,
            SpectralOp::Qm1 => AlgebraOp::Mm1,
        }
    }

    pub fn mode_shift(self) -> i32 {
        match self {
            SpectralOp::D0 | SpectralOp::Q0 => 0,
            SpectralOp::D1 | SpectralOp::Q1 => 1,
            SpectralOp::Dm1 | SpectralOp::Qm1 => -1,
        }
    }
}

impl fmt::Display for SpectralOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// An affine function c0 + c1·s of the spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl Affine {
    pub const fn new(c0: Complex64, c1: Complex64) -> Self {
        Affine { c0, c1 }
    }

    pub fn at(&self, s: Complex64) -> Complex64 {
        self.c0 + self.c1 * s
    }
}

/// ±½ + is
fn half_plus_is(sign: f64) -> Affine {
    Affine::new(c(0.5 * sign, 0.0), I)
}

/// ±α ∓ ½ + is, as `lead·α + offset + is`.
fn alpha_plus_is(alpha: Alpha, lead: f64, offset: f64) -> Affine {
    Affine::new(c(lead * alpha.value() + offset, 0.0), I)
}

/// 2is
fn two_is() -> Affine {
    Affine::new(c(0.0, 0.0), c(0.0, 2.0))
}

/// A rational prefactor `scale · Π num(s) / Π den(s)` in s.
#[derive(Debug, Clone, PartialEq)]
pub struct Prefactor {
    pub scale: f64,
    pub num: Vec<Affine>,
    pub den: Vec<Affine>,
}

/// Denominators smaller than this are treated as poles.
const POLE_THRESHOLD: f64 = 1e-12;

impl Prefactor {
    pub fn constant(scale: f64) -> Self {
        Prefactor {
            scale,
            num: Vec::new(),
            den: Vec::new(),
        }
    }

    pub fn at(&self, s: Complex64) -> Result<Complex64> {
        let mut v = c(self.scale, 0.0);
        for f in &self.num {
            v *= f.at(s);
        }
        for f in &self.den {
            let d = f.at(s);
            if d.norm() < POLE_THRESHOLD {
                return Err(Error::Pole(s));
            }
            v /= d;
        }
        Ok(v)
    }
}

/// One summand `prefactor(s) · e^{i·phase·φ} · D^order F(φ, s + shift·i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTerm {
    pub prefactor: Prefactor,
    pub phase: i32,
    pub shift: i32,
    pub d_order: u32,
}

/// A spectral operator applied to a spectral function, kept symbolic and
/// evaluated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralImage {
    pub op: SpectralOp,
    pub source: SpectralFunction,
    pub terms: Vec<ShiftTerm>,
}

impl SpectralImage {
    pub fn eval(&self, phi: f64, s: Complex64) -> Result<Complex64> {
        let mut acc = c(0.0, 0.0);
        for t in &self.terms {
            let pre = t.prefactor.at(s)?;
            let value = self.source.eval_derivative(phi, s + I * t.shift as f64, t.d_order);
            acc += pre * Complex64::from_polar(1.0, t.phase as f64 * phi) * value;
        }
        Ok(acc)
    }

    /// Distinct imaginary shifts at which the source is sampled.
    pub fn shifts(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self.terms.iter().map(|t| t.shift).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Fourier modes of the result.
    pub fn modes(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self
            .terms
            .iter()
            .flat_map(|t| self.source.modes().into_iter().map(move |m| m + t.phase))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn term(prefactor: Prefactor, phase: i32, shift: i32, d_order: u32) -> ShiftTerm {
    ShiftTerm {
        prefactor,
        phase,
        shift,
        d_order,
    }
}

/// Shift-operator terms of Q0, Q1 or Qm1; `phase` selects the operator.
fn difference_terms(alpha: Alpha, phase: i32) -> Vec<ShiftTerm> {
    let up = half_plus_is(1.0); // ½ + is
    let down = half_plus_is(-1.0); // −½ + is
    let a_minus = alpha_plus_is(alpha, -1.0, 0.5); // −α + ½ + is
    let a_plus = alpha_plus_is(alpha, 1.0, -0.5); // α − ½ + is
    let backward = term(
        Prefactor {
            scale: 1.0,
            num: vec![up, a_plus],
            den: vec![two_is()],
        },
        phase,
        -1,
        0,
    );
    let second = term(
        Prefactor {
            scale: 1.0,
            num: vec![a_minus],
            den: vec![two_is(), down],
        },
        phase,
        1,
        2,
    );
    match phase {
        0 => vec![
            term(
                Prefactor {
                    scale: -1.0,
                    num: vec![down, a_minus],
                    den: vec![two_is()],
                },
                0,
                1,
                0,
            ),
            backward,
            second,
        ],
        _ => vec![
            term(
                Prefactor {
                    scale: 1.0,
                    num: vec![up, a_minus],
                    den: vec![two_is()],
                },
                phase,
                1,
                0,
            ),
            backward,
            second,
            term(
                Prefactor {
                    scale: phase as f64,
                    num: vec![a_minus],
                    den: vec![down],
                },
                phase,
                1,
                1,
            ),
        ],
    }
}

/// The evaluation rule of `op` applied to `f`.
pub fn apply_spectral(op: SpectralOp, f: &SpectralFunction) -> SpectralImage {
    let alpha = f.alpha();
    let up = || Prefactor {
        scale: 1.0,
        num: vec![half_plus_is(1.0)],
        den: Vec::new(),
    };
    let terms = match op {
        SpectralOp::D0 => vec![term(Prefactor::constant(1.0), 0, 0, 1)],
        SpectralOp::D1 => vec![term(Prefactor::constant(1.0), 1, 0, 1), term(up(), 1, 0, 0)],
        SpectralOp::Dm1 => vec![term(Prefactor::constant(-1.0), -1, 0, 1), term(up(), -1, 0, 0)],
        SpectralOp::Q0 => difference_terms(alpha, 0),
        SpectralOp::Q1 => difference_terms(alpha, 1),
        SpectralOp::Qm1 => difference_terms(alpha, -1),
    };
    SpectralImage {
        op,
        source: f.clone(),
        terms,
    }
}

/// A spectral sample point kept away from the prefactor poles {0, i/2, −i/2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub phi: f64,
    pub s: Complex64,
}

pub const DEFAULT_POLE_MARGIN: f64 = 0.05;

impl SamplePoint {
    pub fn new(phi: f64, s: Complex64, margin: f64) -> Result<Self> {
        let poles = [c(0.0, 0.0), c(0.0, 0.5), c(0.0, -0.5)];
        if let Some(p) = poles.iter().find(|p| (s - **p).norm() < margin) {
            return Err(Error::Pole(*p));
        }
        Ok(SamplePoint {
            phi: phi.rem_euclid(2.0 * std::f64::consts::PI),
            s,
        })
    }
}

/// |a − b| / max(|a|, |b|, 1).
pub fn relative_residual(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// max over points of the residual between `spectral_op ∘ J` and `J ∘ algebra_op` on f.
pub fn verify_intertwine(
    f: &CoefMatrix,
    algebra_op: AlgebraOp,
    spectral_op: SpectralOp,
    points: &[SamplePoint],
) -> Result<f64> {
    if spectral_op.partner() != algebra_op {
        return Err(Error::UnmatchedPair(format!("({algebra_op}, {spectral_op})")));
    }
    let lhs = apply_spectral(spectral_op, &transform(f));
    let rhs = transform(&apply_algebra(algebra_op, f));
    let residuals: Vec<Result<f64>> = points
        .par_iter()
        .map(|p| Ok(relative_residual(lhs.eval(p.phi, p.s)?, rhs.eval(p.phi, p.s))))
        .collect();
    residuals
        .into_iter()
        .try_fold(0.0f64, |acc, r| Ok(acc.max(r?)))
}

/// Q0 prefactors (forward, backward, second-derivative) at s:
/// Q0 F = p₊ F(s+i) + p₋ F(s−i) + p₂ D²F(s+i).
pub fn q0_coefficients(s: Complex64, alpha: Alpha) -> Result<(Complex64, Complex64, Complex64)> {
    let t = difference_terms(alpha, 0);
    Ok((t[0].prefactor.at(s)?, t[1].prefactor.at(s)?, t[2].prefactor.at(s)?))
}

/// Kernel with its logarithmic derivatives, at one (φ, s).
struct KernelJet {
    value: Complex64,
    /// (z̄∂z̄ + u∂u) log K
    euler: Complex64,
    /// ∂φ log K and ∂²φ log K
    dphi: Complex64,
    d2phi: Complex64,
}

fn kernel_jet(bases: &KernelBases, x: Complex64, y: Complex64, wu: Complex64, s: Complex64, alpha: Alpha) -> KernelJet {
    let beta = boundary_exponent(s);
    let gamma = cross_exponent(s, alpha);
    let value = principal_pow(bases.left, -beta) * principal_pow(bases.right, -beta) * principal_pow(bases.cross, -gamma);
    let fx = x / bases.left;
    let fy = y / bases.right;
    let euler = beta * (fx + fy) + 2.0 * gamma * wu / bases.cross;
    let dphi = I * beta * (fx - fy);
    let d2phi = -beta * (x / (bases.left * bases.left) + y / (bases.right * bases.right));
    KernelJet {
        value,
        euler,
        dphi,
        d2phi,
    }
}

/// Residual of the kernel identity (u∂u + z̄∂z̄ + α)K − Q0 K = 0, all
/// derivatives analytic, normalized as |LHS| / (|K| + 1e−300).
pub fn kernel_identity_residual(z: Complex64, u: Complex64, phi: f64, s: Complex64, alpha: Alpha) -> Result<f64> {
    let bases = KernelBases::new(phi, z, u)?;
    let w = z.conj();
    let e = Complex64::from_polar(1.0, phi);
    let (x, y, wu) = (w * e, u * e.conj(), w * u);
    let here = kernel_jet(&bases, x, y, wu, s, alpha);
    let plus = kernel_jet(&bases, x, y, wu, s + I, alpha);
    let minus = kernel_jet(&bases, x, y, wu, s - I, alpha);
    let (p_fwd, p_back, p_d2) = q0_coefficients(s, alpha)?;
    let euler_side = here.value * (here.euler + alpha.value());
    // D² = −∂²φ, and ∂²φ K = K((log K)'' + (log K)'²)
    let d2_plus = -plus.value * (plus.d2phi + plus.dphi * plus.dphi);
    let q0k = p_fwd * plus.value + p_back * minus.value + p_d2 * d2_plus;
    Ok((euler_side - q0k).norm() / (here.value.norm() + 1e-300))
}
