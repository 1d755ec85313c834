//! The intertwining kernel, its Taylor coefficients, the transform J_α and the
//! Plancherel density.
//!
//! For f = Σ c_kl z^k ū^l the transform is the finite Fourier sum
//!
//! ```text
//! J_α f(φ, s) = Σ d_kl e^{i(k−l)φ} A_kl(s),   d_kl = c_kl [π/(α−1)]² k!/(α)_k · l!/(α)_l
//! ```
//!
//! with the entire amplitudes
//!
//! ```text
//! A_kl(s) = Σ_{m ≤ min(k,l)} (α−½−is)_m/m! · (½+is)_{k−m}/(k−m)! · (½+is)_{l−m}/(l−m)!
//! ```
//!
//! obtained by expanding the three binomial factors of the kernel.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::Add;
use std::ops::Mul;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::arith::{
    c, gauss_jacobi_unit, integrate_until_stable, log_gamma, log_gamma_real, principal_pow,
    Integrand, I,
};
use crate::error::{Error, Result};
use crate::model::{check_alpha, monomial_norms, Alpha, CoefMatrix};

/// The three bases 1 − z̄e^{iφ}, 1 − ue^{−iφ}, 1 − z̄u of the kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBases {
    pub left: Complex64,
    pub right: Complex64,
    pub cross: Complex64,
}

impl KernelBases {
    pub fn new(phi: f64, z: Complex64, u: Complex64) -> Result<Self> {
        if !(z.norm() < 1.0) || !(u.norm() < 1.0) {
            return Err(Error::Domain(format!("|z| = {}, |u| = {}", z.norm(), u.norm())));
        }
        let e = Complex64::from_polar(1.0, phi);
        let bases = KernelBases {
            left: 1.0 - z.conj() * e,
            right: 1.0 - u * e.conj(),
            cross: 1.0 - z.conj() * u,
        };
        for b in [bases.left, bases.right, bases.cross] {
            if !(b.re > 0.0) {
                return Err(Error::Branch(b));
            }
        }
        Ok(bases)
    }
}

/// ½ + is, the exponent of the two boundary factors.
pub fn boundary_exponent(s: Complex64) -> Complex64 {
    0.5 + I * s
}

/// α − ½ − is, the exponent of the cross factor.
pub fn cross_exponent(s: Complex64, alpha: Alpha) -> Complex64 {
    alpha.value() - 0.5 - I * s
}

/// K_α(φ, s; z, u) = (1 − z̄e^{iφ})^{−½−is} (1 − ue^{−iφ})^{−½−is} / (1 − z̄u)^{α−½−is}.
pub fn kernel_eval(phi: f64, s: Complex64, z: Complex64, u: Complex64, alpha: Alpha) -> Result<Complex64> {
    let b = KernelBases::new(phi, z, u)?;
    let beta = boundary_exponent(s);
    let gamma = cross_exponent(s, alpha);
    Ok(principal_pow(b.left, -beta) * principal_pow(b.right, -beta) * principal_pow(b.cross, -gamma))
}

/// Table of A_kl(s) for k ≤ k_max, l ≤ l_max, row-major in k.
pub fn amplitude_table(k_max: usize, l_max: usize, s: Complex64, alpha: Alpha) -> Vec<Complex64> {
    let beta = boundary_exponent(s);
    let gamma = cross_exponent(s, alpha);
    let n = k_max.max(l_max);
    let mut bin_beta = Vec::with_capacity(n + 1);
    let mut bin_gamma = Vec::with_capacity(n + 1);
    let (mut tb, mut tg) = (c(1.0, 0.0), c(1.0, 0.0));
    for j in 0..=n {
        bin_beta.push(tb);
        bin_gamma.push(tg);
        let jf = j as f64;
        tb = tb * (beta + jf) / (jf + 1.0);
        tg = tg * (gamma + jf) / (jf + 1.0);
    }
    let cols = l_max + 1;
    let mut out = vec![c(0.0, 0.0); (k_max + 1) * cols];
    for k in 0..=k_max {
        for l in 0..=l_max {
            let mut acc = c(0.0, 0.0);
            for m in 0..=k.min(l) {
                acc += bin_gamma[m] * bin_beta[k - m] * bin_beta[l - m];
            }
            out[k * cols + l] = acc;
        }
    }
    out
}

/// A_kl(s).
pub fn kernel_amplitude(k: usize, l: usize, s: Complex64, alpha: Alpha) -> Complex64 {
    *amplitude_table(k, l, s, alpha).last().expect("non-empty table")
}

/// Taylor coefficient a_kl(φ, s) = e^{i(k−l)φ} A_kl(s) of K in z̄^k u^l.
pub fn kernel_coeff(k: usize, l: usize, phi: f64, s: Complex64, alpha: Alpha) -> Complex64 {
    Complex64::from_polar(1.0, (k as f64 - l as f64) * phi) * kernel_amplitude(k, l, s, alpha)
}

/// Taylor coefficients of the kernel in (z̄, u) by trapezoidal sampling on the
/// torus |z̄| = |u| = `radius` with an n × n grid. Entry `[k][l]` is a_kl for
/// k, l ≤ `max_index`.
///
/// Independent of the closed form for A_kl; used as its oracle.
pub fn extract_kernel_coefficients(
    phi: f64,
    s: Complex64,
    alpha: Alpha,
    radius: f64,
    n: usize,
    max_index: usize,
) -> Result<Vec<Vec<Complex64>>> {
    if !(radius > 0.0 && radius < 1.0) || max_index >= n {
        return Err(Error::InvalidArgument(format!(
            "radius {radius} must lie in (0, 1) and grid {n} must exceed index {max_index}"
        )));
    }
    let mut grid = vec![c(0.0, 0.0); n * n];
    for j1 in 0..n {
        let w = Complex64::from_polar(radius, 2.0 * PI * j1 as f64 / n as f64);
        for j2 in 0..n {
            let u = Complex64::from_polar(radius, 2.0 * PI * j2 as f64 / n as f64);
            grid[j1 * n + j2] = kernel_eval(phi, s, w.conj(), u, alpha)?;
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    for row in grid.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![c(0.0, 0.0); n];
    for j2 in 0..n {
        for j1 in 0..n {
            col[j1] = grid[j1 * n + j2];
        }
        fft.process(&mut col);
        for j1 in 0..n {
            grid[j1 * n + j2] = col[j1];
        }
    }
    let norm = 1.0 / (n * n) as f64;
    Ok((0..=max_index)
        .map(|k| {
            (0..=max_index)
                .map(|l| grid[k * n + l] * norm / radius.powi((k + l) as i32))
                .collect()
        })
        .collect())
}

/// The transform J_α f as finite mode data d_kl, evaluable at any complex s.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    data: CoefMatrix,
}

impl SpectralFunction {
    /// Wraps raw coefficients d_kl.
    pub fn from_coefficients(data: CoefMatrix) -> Self {
        SpectralFunction { data }
    }

    pub fn alpha(&self) -> Alpha {
        self.data.alpha()
    }

    pub fn coefficients(&self) -> &CoefMatrix {
        &self.data
    }

    /// Largest k + l in the support (0 for the zero function).
    pub fn total_degree(&self) -> usize {
        self.data.iter().map(|(k, l, _)| k + l).max().unwrap_or(0)
    }

    /// Fourier modes k − l present in the support.
    pub fn modes(&self) -> Vec<i32> {
        let mut m: Vec<i32> = self.data.iter().map(|(k, l, _)| k as i32 - l as i32).collect();
        m.sort_unstable();
        m.dedup();
        m
    }

    /// Mode components G_m(s) with F(φ, s) = Σ_m e^{imφ} G_m(s).
    pub fn mode_values(&self, s: Complex64) -> BTreeMap<i32, Complex64> {
        let (k_max, l_max) = self.data.bounds();
        let table = amplitude_table(k_max, l_max, s, self.alpha());
        let mut out = BTreeMap::new();
        for (k, l, d) in self.data.iter() {
            *out.entry(k as i32 - l as i32).or_insert(c(0.0, 0.0)) += d * table[k * (l_max + 1) + l];
        }
        out
    }

    pub fn eval(&self, phi: f64, s: Complex64) -> Complex64 {
        self.eval_derivative(phi, s, 0)
    }

    /// (∂/(i∂φ))^order F(φ, s).
    pub fn eval_derivative(&self, phi: f64, s: Complex64, order: u32) -> Complex64 {
        self.mode_values(s)
            .into_iter()
            .map(|(m, g)| g * (m as f64).powi(order as i32) * Complex64::from_polar(1.0, m as f64 * phi))
            .sum()
    }

    /// a·self + b·other.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        Ok(SpectralFunction {
            data: self.data.combine(a, &other.data, b)?,
        })
    }
}

/// [π/(α−1)]², the image of the constant function.
pub fn transform_scale(alpha: Alpha) -> f64 {
    (PI / (alpha.value() - 1.0)).powi(2)
}

/// J_α f in closed form.
pub fn transform(f: &CoefMatrix) -> SpectralFunction {
    let alpha = f.alpha();
    let (k_max, l_max) = f.bounds();
    let norms = monomial_norms(alpha, k_max.max(l_max));
    let scale = transform_scale(alpha);
    SpectralFunction {
        data: CoefMatrix::from_fn(alpha, k_max, l_max, |k, l| f.get(k, l) * (scale * norms[k] * norms[l])),
    }
}

/// Angular double integral ∬ K f dθ₁ dθ₂ at radii (r1, r2) by the N × N
/// trapezoidal rule. The u-sum is a circular correlation done by FFT.
fn angular_integral(
    f: &CoefMatrix,
    phi: f64,
    s: Complex64,
    r1: f64,
    r2: f64,
    n: usize,
    planner: &mut FftPlanner<f64>,
) -> Result<Complex64> {
    let alpha = f.alpha();
    let beta = boundary_exponent(s);
    let gamma = cross_exponent(s, alpha);
    let e = Complex64::from_polar(1.0, phi);
    let theta = |j: usize| 2.0 * PI * j as f64 / n as f64;
    let (k_max, l_max) = f.bounds();

    // z = r1 e^{iθ1}, u = r2 e^{iθ2}; z̄u depends on θ2 − θ1 only.
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    let mut cross = Vec::with_capacity(n);
    for j in 0..n {
        let z = Complex64::from_polar(r1, theta(j));
        let u = Complex64::from_polar(r2, theta(j));
        let b1 = 1.0 - z.conj() * e;
        let b2 = 1.0 - u * e.conj();
        let b3 = 1.0 - Complex64::from_polar(r1 * r2, theta(j));
        for b in [b1, b2, b3] {
            if !(b.re > 0.0) {
                return Err(Error::Branch(b));
            }
        }
        left.push(principal_pow(b1, -beta));
        right.push(principal_pow(b2, -beta));
        cross.push(principal_pow(b3, -gamma));
    }
    // reversed cross table: T'[m] = T[−m mod n]
    let mut cross_rev: Vec<Complex64> = (0..n).map(|m| cross[(n - m) % n]).collect();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    fwd.process(&mut cross_rev);

    let mut total = c(0.0, 0.0);
    for l in 0..=l_max {
        if (0..=k_max).all(|k| f.get(k, l) == c(0.0, 0.0)) {
            continue;
        }
        // U_l[j2] = T2[j2] ū^l
        let mut buf: Vec<Complex64> = (0..n)
            .map(|j| right[j] * Complex64::from_polar(r2.powi(l as i32), -(l as f64) * theta(j)))
            .collect();
        fwd.process(&mut buf);
        for (x, y) in buf.iter_mut().zip(&cross_rev) {
            *x *= y;
        }
        inv.process(&mut buf);
        // buf[j1]·n = Σ_{j2} U_l[j2] T3[j2 − j1]
        for k in 0..=k_max {
            let ckl = f.get(k, l);
            if ckl == c(0.0, 0.0) {
                continue;
            }
            let mut acc = c(0.0, 0.0);
            for j in 0..n {
                acc += left[j] * Complex64::from_polar(r1.powi(k as i32), k as f64 * theta(j)) * buf[j];
            }
            total += ckl * acc;
        }
    }
    let h = 2.0 * PI / n as f64;
    Ok(total * (h * h / n as f64))
}

/// Direct numerical evaluation of J_α f(φ, s) from the defining double integral
/// over the bidisk, in polar coordinates.
///
/// Radial variables t = r² are integrated with Gauss–Jacobi rules for the
/// weight (1 − t)^{α−2}; each angular torus integral is a trapezoidal sum whose
/// size doubles until stable. The radial order increases by two until the total
/// changes by less than `tol`.
pub fn quadrature_transform(f: &CoefMatrix, phi: f64, s: Complex64, tol: f64) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if f.is_zero() {
        return Ok(c(0.0, 0.0));
    }
    let alpha = f.alpha().value();
    let (k_max, l_max) = f.bounds();
    let degree = k_max.max(l_max);
    let mut planner = FftPlanner::<f64>::new();
    const MAX_GRID: usize = 1 << 16;
    const MAX_ORDER: usize = 48;

    let mut radial = |order: usize| -> Result<Complex64> {
        let rule = gauss_jacobi_unit(order, alpha - 2.0, 0.0);
        let mut sum = c(0.0, 0.0);
        let mut grid = 32usize;
        // each node pair gets an equal share of 5% of the tolerance
        let share = 0.05 * tol / (order * order) as f64;
        for (i, &t1) in rule.nodes.iter().enumerate() {
            for (j, &t2) in rule.nodes.iter().enumerate() {
                let (r1, r2) = (t1.sqrt(), t2.sqrt());
                let w = 0.25 * rule.weights[i] * rule.weights[j];
                let mut n = grid.max(32);
                let mut prev = angular_integral(f, phi, s, r1, r2, n, &mut planner)?;
                loop {
                    n *= 2;
                    let next = angular_integral(f, phi, s, r1, r2, n, &mut planner)?;
                    let diff = (next - prev).norm();
                    prev = next;
                    if diff * w <= share || diff <= 1e-13 * next.norm() {
                        break;
                    }
                    if n >= MAX_GRID {
                        return Err(Error::NonConvergence {
                            refinements: n,
                            difference: diff,
                        });
                    }
                }
                // reuse the converged grid as a starting guess for the next node pair
                grid = n / 4;
                sum += prev * w;
            }
        }
        Ok(sum)
    };

    let mut order = ((degree + 2) / 2).max(2);
    let mut prev = radial(order)?;
    let mut diff = f64::INFINITY;
    while order < MAX_ORDER {
        order += 2;
        let next = radial(order)?;
        diff = (next - prev).norm();
        prev = next;
        if diff < tol {
            return Ok(prev);
        }
    }
    Err(Error::NonConvergence {
        refinements: order,
        difference: diff,
    })
}

/// Plancherel density |Γ(α−½+is)|²/Γ(α)² · s·sh(πs)/ch(πs) with respect to ds dφ.
///
/// Even in s; zero at s = 0.
pub fn plancherel_weight(s: f64, alpha: Alpha) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let a = alpha.value();
    let lg = log_gamma(c(a - 0.5, s)).expect("Re > 0").re;
    (2.0 * (lg - log_gamma_real(a))).exp() * s * (PI * s).tanh()
}

/// The same density written as |Γ(α−½+is) Γ(½+is) / (Γ(α) Γ(is))|².
pub fn plancherel_weight_product_form(s: f64, alpha: Alpha) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let a = alpha.value();
    let num = log_gamma(c(a - 0.5, s)).expect("Re > 0").re + log_gamma(c(0.5, s)).expect("Re > 0").re;
    let den = log_gamma_real(a) + log_gamma(c(0.0, s)).expect("s ≠ 0").re;
    (2.0 * (num - den)).exp()
}

/// The Plancherel density of a fixed α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlancherelWeight {
    pub alpha: Alpha,
}

impl PlancherelWeight {
    pub fn density(&self, s: f64) -> f64 {
        plancherel_weight(s, self.alpha)
    }

    pub fn density_product_form(&self, s: f64) -> f64 {
        plancherel_weight_product_form(s, self.alpha)
    }
}

/// Upper end of the spectral integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SMax {
    /// Chosen from the gamma-decay tail bound.
    Auto,
    Fixed(f64),
}

/// ∫₀^{s_max} ∫₀^{2π} F Ḡ · weight dφ ds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pairing {
    pub value: Complex64,
    /// Difference of the last two quadrature refinements.
    pub residual: f64,
    pub s_max: f64,
    /// Estimated integral of (|F|² + |G|²)/2 · weight beyond s_max.
    pub tail: f64,
    /// ∫ (|F|² + |G|²)/2 · weight over [0, s_max]; the scale the tolerances refer to.
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Both(Complex64, f64);

impl Add for Both {
    type Output = Both;
    fn add(self, o: Both) -> Both {
        Both(self.0 + o.0, self.1 + o.1)
    }
}

impl Mul<f64> for Both {
    type Output = Both;
    fn mul(self, w: f64) -> Both {
        Both(self.0 * w, self.1 * w)
    }
}

impl Integrand for Both {
    fn magnitude(&self) -> f64 {
        self.0.norm().max(self.1.abs())
    }
}

fn pairing_integrand(f: &SpectralFunction, g: &SpectralFunction, s: f64) -> Both {
    let w = plancherel_weight(s, f.alpha());
    if w == 0.0 {
        return Both::default();
    }
    let gf = f.mode_values(c(s, 0.0));
    let gg = g.mode_values(c(s, 0.0));
    let mut value = c(0.0, 0.0);
    // (|F|² + |G|²)/2 bounds |F Ḡ| and, unlike |F||G|, stays smooth through zeros.
    let mut bound = 0.5 * gg.values().map(|b| b.norm_sqr()).sum::<f64>();
    for (m, a) in &gf {
        bound += 0.5 * a.norm_sqr();
        if let Some(b) = gg.get(m) {
            value += a * b.conj();
        }
    }
    Both(value * (2.0 * PI * w), bound * 2.0 * PI * w)
}

/// The φ-integral is done exactly by mode orthogonality; the s-integral by
/// panel doubling on [0, s_max] until stable to `tol` relative to the
/// magnitude scale.
pub fn spectral_pairing(f: &SpectralFunction, g: &SpectralFunction, s_max: SMax, tol: f64) -> Result<Pairing> {
    check_alpha(f.alpha(), g.alpha())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    // |F Ḡ| weight ≲ s^p e^{−πs}
    let p = 2.0 * f.alpha().value() - 1.0 + (f.total_degree() + g.total_degree()) as f64;
    let tail_at = |sm: f64| -> Option<f64> {
        let rate = PI - p / sm;
        (rate > 0.0).then(|| pairing_integrand(f, g, sm).1 / rate)
    };
    const ORDER: usize = 16;
    let coarse_scale = |sm: f64| crate::arith::composite_gauss_legendre(&|s| pairing_integrand(f, g, s).1, 0.0, sm, ORDER, 16);
    let upper = match s_max {
        SMax::Fixed(v) => {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!("s_max = {v}")));
            }
            v
        }
        SMax::Auto => {
            let mut sm = (1.5 * p / PI).max(10.0).ceil();
            loop {
                let scale = coarse_scale(sm);
                match tail_at(sm) {
                    Some(t) if t <= 0.01 * tol * scale || scale == 0.0 => break sm,
                    _ if sm >= 400.0 => {
                        return Err(Error::TailBound(format!("no admissible s_max below {sm}")))
                    }
                    _ => sm += 5.0,
                }
            }
        }
    };
    let integral = integrate_until_stable(|s| pairing_integrand(f, g, s), 0.0, upper, ORDER, tol, 0.0, 14)?;
    let scale = integral.value.1;
    let tail = tail_at(upper).ok_or_else(|| {
        Error::TailBound(format!("s_max = {upper} below the decay onset {:.2}", p / PI))
    })?;
    if tail > tol * scale && scale > 0.0 {
        return Err(Error::TailBound(format!(
            "tail {tail:e} exceeds {tol:e} × {scale:e} at s_max = {upper}"
        )));
    }
    Ok(Pairing {
        value: integral.value.0,
        residual: integral.estimate,
        s_max: upper,
        tail,
        scale,
    })
}

/// Outcome of a Parseval check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalCheck {
    /// ‖J f‖² / ‖f‖², `None` for f = 0.
    pub ratio: Option<f64>,
    pub residual: f64,
    pub spectral_norm_sq: f64,
    pub norm_sq: f64,
    pub s_max: f64,
}

/// ‖J_α f‖² in the Plancherel measure against ‖f‖².
pub fn parseval_check(f: &CoefMatrix, s_max: SMax, tol: f64) -> Result<ParsevalCheck> {
    let norm_sq = crate::model::inner_product(f, f)?.re;
    if f.is_zero() {
        return Ok(ParsevalCheck {
            ratio: None,
            residual: 0.0,
            spectral_norm_sq: 0.0,
            norm_sq: 0.0,
            s_max: match s_max {
                SMax::Fixed(v) => v,
                SMax::Auto => 0.0,
            },
        });
    }
    let jf = transform(f);
    let p = spectral_pairing(&jf, &jf, s_max, tol)?;
    Ok(ParsevalCheck {
        ratio: Some(p.value.re / norm_sq),
        residual: p.residual / norm_sq,
        spectral_norm_sq: p.value.re,
        norm_sq,
        s_max: p.s_max,
    })
}

/// ⟨J f, J g⟩ / ⟨f, g⟩ in the Plancherel measure.
pub fn cross_parseval(f: &CoefMatrix, g: &CoefMatrix, s_max: SMax, tol: f64) -> Result<Complex64> {
    let ip = crate::model::inner_product(f, g)?;
    if ip.norm() == 0.0 {
        return Err(Error::InvalidArgument("orthogonal pair has no ratio".into()));
    }
    let p = spectral_pairing(&transform(f), &transform(g), s_max, tol)?;
    Ok(p.value / ip)
}

/// π⁵/(α−1)⁴, the closed form of the Parseval constant for the Taylor-normalized
/// inner product.
pub fn parseval_constant(alpha: Alpha) -> f64 {
    PI.powi(5) / (alpha.value() - 1.0).powi(4)
}
