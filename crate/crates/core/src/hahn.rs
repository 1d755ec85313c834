//! Continuous dual Hahn polynomials and the diagonal eigenfunctions of Q0.
//!
//! The monomials zᵏūᵏ are eigenvectors of M0 with eigenvalue 2k + α. Their
//! transforms depend on s only, and Q0 acts on them as the pure difference
//! operator g ↦ p₊(s) g(s+i) + p₋(s) g(s−i). This module checks that those
//! eigenfunctions are continuous dual Hahn polynomials in s².

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{c, I};
use crate::error::{Error, Result};
use crate::kernel::{kernel_amplitude, transform, SMax};
use crate::model::{Alpha, CoefMatrix};
use crate::spectral::q0_coefficients;

/// Parameters (a, b, c) of a continuous dual Hahn family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HahnParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HahnParams {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        HahnParams { a, b, c }
    }

    /// The family matching the diagonal eigenfunctions at weight α.
    pub fn for_alpha(alpha: Alpha) -> Self {
        HahnParams::new(alpha.value() - 0.5, 0.5, 0.5)
    }

    fn check(&self, n: usize) -> Result<()> {
        for (name, d) in [("a+b", self.a + self.b), ("a+c", self.a + self.c)] {
            if n > 0 && d <= 0.0 && d.fract() == 0.0 && (-d) < n as f64 {
                return Err(Error::DegenerateDenominator(format!("{name} = {d}")));
            }
        }
        Ok(())
    }
}

/// Normalized polynomial ₃F₂(−n, a+is, a−is; a+b, a+c; 1), equal to 1 at n = 0.
pub fn cdh_eval(n: usize, s: Complex64, p: HahnParams) -> Result<Complex64> {
    p.check(n)?;
    let (ab, ac) = (p.a + p.b, p.a + p.c);
    let up = p.a + I * s;
    let dn = p.a - I * s;
    let mut term = c(1.0, 0.0);
    let mut sum = term;
    for j in 0..n {
        let jf = j as f64;
        let den = (ab + jf) * (ac + jf) * (jf + 1.0);
        if den == 0.0 {
            return Err(Error::DegenerateDenominator(format!("term {j}")));
        }
        term *= (jf - n as f64) * (up + jf) * (dn + jf) / den;
        sum += term;
    }
    Ok(sum)
}

/// The same polynomials by the three-term recurrence
/// −(a² + s²) p_n = A_n p_{n+1} − (A_n + C_n) p_n + C_n p_{n−1}.
pub fn cdh_eval_recurrence(n: usize, s: Complex64, p: HahnParams) -> Result<Complex64> {
    p.check(n)?;
    let x = p.a * p.a + s * s;
    let (mut prev, mut cur) = (c(0.0, 0.0), c(1.0, 0.0));
    for k in 0..n {
        let kf = k as f64;
        let a_n = (kf + p.a + p.b) * (kf + p.a + p.c);
        if a_n == 0.0 {
            return Err(Error::DegenerateDenominator(format!("recurrence step {k}")));
        }
        let c_n = kf * (kf + p.b + p.c - 1.0);
        let next = ((a_n + c_n) * cur - x * cur - c_n * prev) / a_n;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Eigenvalue of M0 (and of Q0) on zᵏūᵏ.
pub fn diagonal_eigenvalue(k: usize, alpha: Alpha) -> f64 {
    2.0 * k as f64 + alpha.value()
}

/// g_k(s), the mode-0 spectral function J((zū)ᵏ).
pub fn diagonal_profile(k: usize, alpha: Alpha) -> impl Fn(Complex64) -> Complex64 {
    let d = CoefMatrix::monomial(alpha, k, k);
    let scale = transform(&d).coefficients().get(k, k);
    move |s| scale * kernel_amplitude(k, k, s, alpha)
}

/// |Q0 g − λ g| at s relative to the term sizes |p₊ g(s+i)| + |p₋ g(s−i)| + |λ g(s)|.
/// Normalizing by the terms rather than by |Q0 g| keeps the residual
/// meaningful near the real zeros of g.
pub fn q0_eigen_residual_at(g: impl Fn(Complex64) -> Complex64, lambda: Complex64, s: Complex64, alpha: Alpha) -> Result<f64> {
    let (fwd, back, _) = q0_coefficients(s, alpha)?;
    let a = fwd * g(s + I);
    let b = back * g(s - I);
    let l = lambda * g(s);
    let scale = a.norm() + b.norm() + l.norm();
    if !scale.is_finite() {
        return Err(Error::NonFinite("q0_eigen_residual"));
    }
    Ok((a + b - l).norm() / scale.max(f64::MIN_POSITIVE))
}

/// Max residual of Q0 g_k = (2k+α) g_k over real points.
pub fn q0_eigen_residual(k: usize, alpha: Alpha, points: &[f64]) -> Result<f64> {
    let g = diagonal_profile(k, alpha);
    let lambda = c(diagonal_eigenvalue(k, alpha), 0.0);
    points
        .iter()
        .try_fold(0.0f64, |acc, &s| Ok(acc.max(q0_eigen_residual_at(&g, lambda, c(s, 0.0), alpha)?)))
}

/// Least-squares eigenvalue λ minimizing Σ |Q0 g − λ g|² over the points.
pub fn fit_q0_eigenvalue(g: impl Fn(Complex64) -> Complex64, points: &[Complex64], alpha: Alpha) -> Result<Complex64> {
    let mut num = c(0.0, 0.0);
    let mut den = 0.0;
    for &s in points {
        let (fwd, back, _) = q0_coefficients(s, alpha)?;
        let gs = g(s);
        num += gs.conj() * (fwd * g(s + I) + back * g(s - I));
        den += gs.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::InvalidArgument("eigenfunction vanishes on all points".into()));
    }
    Ok(num / den)
}

/// Smallest d for which the (d+1)-th forward difference of x ↦ f(√x) on
/// x = x0, x0+h, … vanishes relative to the sampled values.
pub fn degree_in_s_squared(f: impl Fn(Complex64) -> Complex64, max_degree: usize, tol: f64) -> Option<usize> {
    let (x0, h) = (0.25, 0.5);
    let vals: Vec<Complex64> = (0..max_degree + 2)
        .map(|j| f(c((x0 + h * j as f64).sqrt(), 0.0)))
        .collect();
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut diff = vals;
    for d in 0..=max_degree {
        diff = diff.windows(2).map(|w| w[1] - w[0]).collect();
        let bound = tol * scale * 2f64.powi(d as i32 + 1);
        if diff.iter().all(|v| v.norm() <= bound) {
            return Some(d);
        }
    }
    None
}

/// Affine law λ_n = slope·n + intercept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueLaw {
    pub slope: f64,
    pub intercept: f64,
}

/// One candidate (a, b, c) in a parameter search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFit {
    pub params: HahnParams,
    /// Worst residual of Q0 p_n = (slope·n + intercept) p_n over n and the grid.
    pub max_residual: f64,
    pub fitted_eigenvalues: Vec<f64>,
    pub fitted_eigenvalue_law: EigenvalueLaw,
}

/// Search result over candidate parameter triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HahnMatchReport {
    pub alpha: Alpha,
    pub n_max: usize,
    pub grid_points: usize,
    pub best: CandidateFit,
    pub candidates: Vec<CandidateFit>,
}

/// Triples with a ∈ {±½, ±(α−½)} and b ≤ c drawn from the same set.
pub fn candidate_params(alpha: Alpha) -> Vec<HahnParams> {
    let h = alpha.value() - 0.5;
    let set = [0.5, -0.5, h, -h];
    let mut out = Vec::new();
    for &a in &set {
        for (i, &b) in set.iter().enumerate() {
            for &cc in &set[i..] {
                let p = HahnParams::new(a, b, cc);
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn affine_fit(ys: &[f64]) -> EigenvalueLaw {
    if ys.len() < 2 {
        return EigenvalueLaw {
            slope: 0.0,
            intercept: ys.first().copied().unwrap_or(0.0),
        };
    }
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    EigenvalueLaw {
        slope,
        intercept: my - slope * mx,
    }
}

fn fit_candidate(params: HahnParams, alpha: Alpha, n_max: usize, points: &[Complex64]) -> Result<CandidateFit> {
    let mut fitted = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        cdh_eval(n, points[0], params)?;
        let poly = |s: Complex64| cdh_eval(n, s, params).unwrap_or(c(f64::NAN, 0.0));
        fitted.push(fit_q0_eigenvalue(poly, points, alpha)?.re);
    }
    let law = affine_fit(&fitted);
    let mut worst = 0.0f64;
    for n in 0..=n_max {
        let poly = |s: Complex64| cdh_eval(n, s, params).unwrap_or(c(f64::NAN, 0.0));
        let lambda = c(law.slope * n as f64 + law.intercept, 0.0);
        for &s in points {
            let r = q0_eigen_residual_at(poly, lambda, s, alpha).unwrap_or(f64::INFINITY);
            worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
        }
    }
    Ok(CandidateFit {
        params,
        max_residual: worst,
        fitted_eigenvalues: fitted,
        fitted_eigenvalue_law: law,
    })
}

/// Default grid for the parameter search: 200 points on [0.1, 6].
pub fn default_match_grid() -> Vec<f64> {
    (0..200).map(|j| 0.1 + 5.9 * j as f64 / 199.0).collect()
}

/// Tests each candidate family against the Q0 eigen-equation with an
/// eigenvalue linear in n, on the default grid.
pub fn cdh_match_report(alpha: Alpha, n_max: usize) -> Result<HahnMatchReport> {
    cdh_match_report_on(alpha, n_max, &default_match_grid())
}

/// As [`cdh_match_report`] on caller-supplied real points. Candidates with
/// degenerate denominators are skipped.
pub fn cdh_match_report_on(alpha: Alpha, n_max: usize, points: &[f64]) -> Result<HahnMatchReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    if n_max > 12 {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} exceeds 12")));
    }
    let pts: Vec<Complex64> = points.iter().map(|&s| c(s, 0.0)).collect();
    let mut candidates = Vec::new();
    for p in candidate_params(alpha) {
        match fit_candidate(p, alpha, n_max, &pts) {
            Ok(fit) => candidates.push(fit),
            Err(Error::DegenerateDenominator(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let best = candidates
        .iter()
        .min_by(|x, y| x.max_residual.total_cmp(&y.max_residual))
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("no admissible candidates".into()))?;
    Ok(HahnMatchReport {
        alpha,
        n_max,
        grid_points: points.len(),
        best,
        candidates,
    })
}

/// Normalized Gram matrix of the transforms of zᵏūᵏ, k ≤ n, under the
/// spectral pairing. Off-diagonal entries should vanish.
pub fn orthogonality_gram(alpha: Alpha, n: usize, s_max: SMax, tol: f64) -> Result<Vec<Vec<f64>>> {
    use crate::kernel::spectral_pairing;
    let fs: Vec<_> = (0..=n).map(|k| transform(&CoefMatrix::monomial(alpha, k, k))).collect();
    let mut raw = vec![vec![c(0.0, 0.0); n + 1]; n + 1];
    for i in 0..=n {
        for j in i..=n {
            let v = spectral_pairing(&fs[i], &fs[j], s_max, tol)?.value;
            raw[i][j] = v;
            raw[j][i] = v.conj();
        }
    }
    Ok((0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| raw[i][j].norm() / (raw[i][i].norm() * raw[j][j].norm()).sqrt())
                .collect()
        })
        .collect())
}
