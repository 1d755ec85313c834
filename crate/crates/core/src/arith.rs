//! Complex special-function primitives and quadrature rules.
//!
//! Every power and logarithm in the crate goes through [`principal_ln`] and
//! [`principal_pow`]: the argument of a logarithm always lies in (−π, π].

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar field of the crate.
pub type ComplexValue = Complex64;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Rising factorial (a)_n = a(a+1)…(a+n−1); (a)_0 = 1.
pub fn pochhammer(a: Complex64, n: usize) -> Complex64 {
    (0..n).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (a + j as f64))
}

/// Real rising factorial.
pub fn pochhammer_real(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, j| acc * (a + j as f64))
}

/// Principal logarithm, argument in (−π, π].
pub fn principal_ln(z: Complex64) -> Complex64 {
    Complex64::new(z.norm().ln(), z.im.atan2(z.re))
}

/// Principal power `base^exponent = exp(exponent · Ln base)`.
pub fn principal_pow(base: Complex64, exponent: Complex64) -> Complex64 {
    (exponent * principal_ln(base)).exp()
}

/// Reduces an angle to (−π, π].
fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

// Lanczos coefficients, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor()
}

/// ln sin(πz) without overflow for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im.abs() < 20.0 {
        return principal_ln((z * PI).sin());
    }
    // sin w = e^{-iw} (1 − e^{2iw}) · i/2 for Im w > 0; conjugate symmetry otherwise.
    let flip = z.im < 0.0;
    let w = if flip { z.conj() * PI } else { z * PI };
    let v = -I * w + principal_ln(Complex64::new(1.0, 0.0) - (2.0 * I * w).exp())
        + principal_ln(Complex64::new(0.0, 0.5));
    if flip {
        v.conj()
    } else {
        v
    }
}

fn log_gamma_lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut sum = Complex64::new(LANCZOS_P[0], 0.0);
    for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
        sum += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * principal_ln(t) - t + principal_ln(sum)
}

/// Principal-branch ln Γ(z): the imaginary part is reduced to (−π, π].
///
/// Lanczos approximation for Re z ≥ 1/2, reflection formula below that.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite("log_gamma"));
    }
    if is_nonpositive_integer(z) {
        return Err(Error::GammaPole(z));
    }
    let raw = if z.re < 0.5 {
        let s = (z * PI).sin();
        if s.norm() == 0.0 {
            return Err(Error::GammaPole(z));
        }
        PI.ln() - ln_sin_pi(z) - log_gamma_lanczos(Complex64::new(1.0, 0.0) - z)
    } else {
        log_gamma_lanczos(z)
    };
    Ok(Complex64::new(raw.re, wrap_angle(raw.im)))
}

/// Γ(z) for complex z.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(log_gamma(z)?.exp())
}

/// ln Γ(x) for real x > 0.
pub fn log_gamma_real(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    log_gamma(Complex64::new(x, 0.0))
        .map(|v| v.re)
        .unwrap_or(f64::INFINITY)
}

/// Nodes and weights of an interpolatory rule on a fixed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

/// Values a quadrature can sum.
pub trait Integrand: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl QuadratureRule {
    /// Sums `f` over the rule in node order.
    pub fn integrate<T: Integrand, F: Fn(f64) -> T>(&self, f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::default(), |acc, (&x, &w)| acc + f(x) * w)
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Legendre polynomial P_n(x) and its derivative.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule of the given order on [a, b].
///
/// Exact for polynomials of degree ≤ 2·order − 1.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> QuadratureRule {
    assert!(order >= 1, "quadrature order must be positive");
    assert!(a < b, "empty interval [{a}, {b}]");
    let n = order;
    let mut ref_nodes = vec![0.0; n];
    let mut ref_weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ref_nodes[i] = -x;
        ref_nodes[n - 1 - i] = x;
        ref_weights[i] = w;
        ref_weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        ref_nodes[n / 2] = 0.0;
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    QuadratureRule {
        nodes: ref_nodes.iter().map(|x| mid + half * x).collect(),
        weights: ref_weights.iter().map(|w| w * half).collect(),
        order,
    }
}

/// Gauss–Jacobi rule for ∫₀¹ h(t) (1 − t)^a t^b dt (Golub–Welsch).
///
/// Requires a, b > −1.
pub fn gauss_jacobi_unit(order: usize, a: f64, b: f64) -> QuadratureRule {
    assert!(order >= 1, "quadrature order must be positive");
    assert!(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");
    let n = order;
    let ab = a + b;
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jm[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let off = if k == 0 {
                (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt()
            } else {
                let d = 2.0 * m + ab;
                (4.0 * m * (m + a) * (m + b) * (m + ab) / (d * d * (d + 1.0) * (d - 1.0))).sqrt()
            };
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jm);
    // ∫_{-1}^{1} (1−x)^a (1+x)^b dx
    let mu0 = ((ab + 1.0) * 2f64.ln() + log_gamma_real(a + 1.0) + log_gamma_real(b + 1.0)
        - log_gamma_real(ab + 2.0))
    .exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // x = 2t − 1, (1−x)^a (1+x)^b dx = 2^{a+b+1} (1−t)^a t^b dt
    let scale = 2f64.powf(-(ab + 1.0));
    QuadratureRule {
        nodes: pairs.iter().map(|p| 0.5 * (p.0 + 1.0)).collect(),
        weights: pairs.iter().map(|p| p.1 * scale).collect(),
        order,
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    /// |difference| between the last two refinement levels.
    pub estimate: f64,
    pub panels: usize,
}

/// Composite Gauss–Legendre on `panels` equal panels.
pub fn composite_gauss_legendre<T: Integrand, F: Fn(f64) -> T>(
    f: &F,
    a: f64,
    b: f64,
    order: usize,
    panels: usize,
) -> T {
    let reference = gauss_legendre(order, -1.0, 1.0);
    let h = (b - a) / panels as f64;
    (0..panels).fold(T::default(), |acc, p| {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        let part = reference.integrate(|x| f(mid + 0.5 * h * x));
        acc + part * (0.5 * h)
    })
}

/// Doubles the panel count until successive composite rules differ by at most
/// `max(rel_tol·|I|, abs_tol)`.
pub fn integrate_until_stable<T: Integrand, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    order: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_doublings: usize,
) -> Result<Integral<T>> {
    if !(rel_tol > 0.0 || abs_tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let mut panels = 1usize;
    let mut prev = composite_gauss_legendre(&f, a, b, order, panels);
    let mut diff = f64::INFINITY;
    for _ in 0..max_doublings {
        panels *= 2;
        let next = composite_gauss_legendre(&f, a, b, order, panels);
        diff = (next + prev * -1.0).magnitude();
        prev = next;
        if diff <= (rel_tol * next.magnitude()).max(abs_tol) {
            return Ok(Integral {
                value: next,
                estimate: diff,
                panels,
            });
        }
    }
    Err(Error::NonConvergence {
        refinements: max_doublings,
        difference: diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(c(2.5, 0.0), 0), c(1.0, 0.0));
        assert_eq!(pochhammer(c(2.0, 0.0), 3), c(24.0, 0.0));
        let v = pochhammer(c(0.5, 1.0), 2);
        assert!((v - c(-0.25, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn log_gamma_special_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-14);
        let half = log_gamma(c(0.5, 0.0)).unwrap();
        assert!((half.re - 0.572_364_942_924_700_1).abs() < 1e-14);
        // ln Γ(10) = ln 362880
        assert!((log_gamma(c(10.0, 0.0)).unwrap().re - 362_880f64.ln()).abs() < 1e-12);
        // Γ(−1/2) = −2√π
        let g = gamma(c(-0.5, 0.0)).unwrap();
        assert!(rel(g, c(-2.0 * PI.sqrt(), 0.0)) < 1e-13);
    }

    #[test]
    fn log_gamma_poles() {
        for n in 0..5 {
            assert!(matches!(
                log_gamma(c(-(n as f64), 0.0)),
                Err(Error::GammaPole(_))
            ));
        }
    }

    #[test]
    fn gamma_half_line_identity() {
        // |Γ(1/2 + i s)|² = π / cosh(π s)
        let g = gamma(c(0.5, 1.0)).unwrap();
        let lhs = g.norm_sqr();
        let rhs = PI / PI.cosh();
        assert!((lhs - rhs).abs() / rhs < 1e-13);
        assert!((rhs - 0.271_014_951_4).abs() < 1e-10);
    }

    #[test]
    fn gamma_imaginary_axis_identity() {
        // |Γ(i s)|² · s · sinh(π s) = π
        for j in 0..=99 {
            let s = 0.1 + 9.9 * j as f64 / 99.0;
            let g = log_gamma(c(0.0, s)).unwrap();
            let v = (2.0 * g.re).exp() * s * (PI * s).sinh();
            assert!((v - PI).abs() / PI < 1e-11, "s = {s}: {v}");
        }
    }

    #[test]
    fn log_gamma_large_imaginary_reflection() {
        // reflection route with |Im z| beyond the direct-sine threshold
        let z = c(0.25, 30.0);
        let lhs = gamma(z).unwrap() * gamma(c(1.0, 0.0) - z).unwrap();
        let rhs = PI / (z * PI).sin();
        assert!(rel(lhs, rhs) < 1e-11);
    }

    #[test]
    fn log_gamma_principal_range() {
        let v = log_gamma(c(20.0, 20.0)).unwrap();
        assert!(v.im > -PI && v.im <= PI);
    }

    #[test]
    fn gauss_legendre_midpoint() {
        let r = gauss_legendre(1, -1.0, 1.0);
        assert_eq!(r.nodes, vec![0.0]);
        assert_eq!(r.weights, vec![2.0]);
    }

    #[test]
    fn gauss_legendre_exactness() {
        let r = gauss_legendre(2, -1.0, 1.0);
        let v = r.integrate(|x| x * x);
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        for order in [3usize, 8, 17, 40] {
            let r = gauss_legendre(order, 0.5, 3.0);
            assert!((r.weight_sum() - 2.5).abs() < 1e-13);
            assert!(r.nodes.iter().all(|&x| x > 0.5 && x < 3.0));
            assert!(r.weights.iter().all(|&w| w > 0.0));
            let deg = 2 * order - 1;
            let exact = (3f64.powi(deg as i32 + 1) - 0.5f64.powi(deg as i32 + 1)) / (deg as f64 + 1.0);
            let got = r.integrate(|x| x.powi(deg as i32));
            assert!((got - exact).abs() / exact < 1e-12, "order {order}");
        }
    }

    #[test]
    fn gauss_legendre_oscillatory_mode() {
        let r = gauss_legendre(32, 0.0, 2.0 * PI);
        let v = r.integrate(|p| (I * 3.0 * p).exp());
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn gauss_jacobi_moments() {
        // ∫₀¹ t^k (1−t)^a dt = B(k+1, a+1)
        for &a in &[-0.75, -0.5, 0.0, 0.75, 1.5] {
            let r = gauss_jacobi_unit(6, a, 0.0);
            for k in 0..12 {
                let exact = (log_gamma_real(k as f64 + 1.0) + log_gamma_real(a + 1.0)
                    - log_gamma_real(k as f64 + a + 2.0))
                .exp();
                let got = r.integrate(|t| t.powi(k));
                assert!((got - exact).abs() / exact < 1e-12, "a={a} k={k}");
            }
        }
    }

    #[test]
    fn adaptive_integration_converges() {
        let v = integrate_until_stable(|x: f64| (-x).exp(), 0.0, 40.0, 8, 1e-13, 0.0, 20).unwrap();
        assert!((v.value - (1.0 - (-40f64).exp())).abs() < 1e-12);
    }
}
