//! The tensor product H_α ⊗ H̄_α realized on finite Taylor data.
//!
//! A function f(z, ū) = Σ c_kl z^k ū^l is stored as a dense coefficient
//! array. The Hilbert structure is the Taylor form of the weighted Bergman
//! inner product, normalized so that ⟨1, 1⟩ = 1.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::c;
use crate::error::{Error, Result};

/// Weight parameter, α > 1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 1.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::InvalidAlpha(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Alpha::new(v).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Norms of the monomials in H_α: ‖z^k‖² = k! / (α)_k.
pub fn monomial_norms(alpha: Alpha, max_degree: usize) -> Vec<f64> {
    let a = alpha.value();
    let mut out = Vec::with_capacity(max_degree + 1);
    let mut g = 1.0;
    for k in 0..=max_degree {
        out.push(g);
        g *= (k as f64 + 1.0) / (a + k as f64);
    }
    out
}

/// Finitely supported Taylor data c_kl, 0 ≤ k ≤ K, 0 ≤ l ≤ L.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefMatrix {
    alpha: Alpha,
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CoefMatrix {
    /// The zero function with degree bounds (k_max, l_max).
    pub fn zeros(alpha: Alpha, k_max: usize, l_max: usize) -> Self {
        CoefMatrix {
            alpha,
            rows: k_max + 1,
            cols: l_max + 1,
            data: vec![Complex64::new(0.0, 0.0); (k_max + 1) * (l_max + 1)],
        }
    }

    /// The monomial z^k ū^l.
    pub fn monomial(alpha: Alpha, k: usize, l: usize) -> Self {
        let mut m = Self::zeros(alpha, k, l);
        m.set(k, l, c(1.0, 0.0));
        m
    }

    pub fn from_fn(
        alpha: Alpha,
        k_max: usize,
        l_max: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut m = Self::zeros(alpha, k_max, l_max);
        for k in 0..=k_max {
            for l in 0..=l_max {
                m.set(k, l, f(k, l));
            }
        }
        m
    }

    /// Row-major nested coefficients, `coeffs[k][l]`.
    pub fn from_rows(alpha: Alpha, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if rows.is_empty() {
            return Ok(Self::zeros(alpha, 0, 0));
        }
        let cols = rows[0].len();
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument(
                "coefficient rows must be non-empty and of equal length".into(),
            ));
        }
        if rows.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("CoefMatrix::from_rows"));
        }
        Ok(CoefMatrix {
            alpha,
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Random coefficients with total degree k + l ≤ `degree`, components uniform in [−1, 1].
    pub fn random<R: Rng + ?Sized>(alpha: Alpha, degree: usize, rng: &mut R) -> Self {
        Self::from_fn(alpha, degree, degree, |k, l| {
            if k + l <= degree {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                c(0.0, 0.0)
            }
        })
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    /// Degree bounds (K, L).
    pub fn bounds(&self) -> (usize, usize) {
        (self.rows - 1, self.cols - 1)
    }

    /// c_kl, zero outside the stored rectangle.
    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        if k < self.rows && l < self.cols {
            self.data[k * self.cols + l]
        } else {
            c(0.0, 0.0)
        }
    }

    /// Sets c_kl, growing the rectangle when needed.
    pub fn set(&mut self, k: usize, l: usize, v: Complex64) {
        if k >= self.rows || l >= self.cols {
            self.resize(k.max(self.rows - 1), l.max(self.cols - 1));
        }
        self.data[k * self.cols + l] = v;
    }

    fn add_at(&mut self, k: usize, l: usize, v: Complex64) {
        let cur = self.get(k, l);
        self.set(k, l, cur + v);
    }

    fn resize(&mut self, k_max: usize, l_max: usize) {
        let mut out = Self::zeros(self.alpha, k_max, l_max);
        for (k, l, v) in self.iter() {
            if k <= k_max && l <= l_max {
                out.data[k * out.cols + l] = v;
            }
        }
        *self = out;
    }

    /// Non-zero entries (k, l, c_kl).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != c(0.0, 0.0))
            .map(move |(i, &v)| (i / self.cols, i % self.cols, v))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == c(0.0, 0.0))
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.cols).map(|r| r.to_vec()).collect()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// a·self + b·other.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        check_alpha(self.alpha, other.alpha)?;
        let (k1, l1) = self.bounds();
        let (k2, l2) = other.bounds();
        Ok(Self::from_fn(self.alpha, k1.max(k2), l1.max(l2), |k, l| {
            a * self.get(k, l) + b * other.get(k, l)
        }))
    }

    pub fn norm(&self) -> f64 {
        inner_product(self, self).map(|v| v.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CoefMatrixJson::from(self)).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: CoefMatrixJson =
            serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        raw.try_into()
    }
}

pub(crate) fn check_alpha(a: Alpha, b: Alpha) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::AlphaMismatch {
            left: a.value(),
            right: b.value(),
        })
    }
}

/// Wire form: `{ "alpha": real, "coeffs": [[[re, im], ...], ...] }`, row-major in k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefMatrixJson {
    pub alpha: f64,
    pub coeffs: Vec<Vec<[f64; 2]>>,
}

impl From<&CoefMatrix> for CoefMatrixJson {
    fn from(m: &CoefMatrix) -> Self {
        CoefMatrixJson {
            alpha: m.alpha.value(),
            coeffs: m
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<CoefMatrixJson> for CoefMatrix {
    type Error = Error;

    fn try_from(raw: CoefMatrixJson) -> Result<Self> {
        let alpha = Alpha::new(raw.alpha)?;
        let rows = raw
            .coeffs
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| c(re, im)).collect())
            .collect();
        CoefMatrix::from_rows(alpha, rows)
    }
}

impl Serialize for CoefMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CoefMatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoefMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CoefMatrixJson::deserialize(d)?;
        raw.try_into().map_err(serde::de::Error::custom)
    }
}

/// ⟨f, g⟩ = Σ c_kl c̄′_kl · k!/(α)_k · l!/(α)_l.
pub fn inner_product(f: &CoefMatrix, g: &CoefMatrix) -> Result<Complex64> {
    check_alpha(f.alpha, g.alpha)?;
    let (k1, l1) = f.bounds();
    let (k2, l2) = g.bounds();
    let norms = monomial_norms(f.alpha, k1.max(l1).max(k2).max(l2));
    let mut acc = c(0.0, 0.0);
    for k in 0..=k1.min(k2) {
        for l in 0..=l1.min(l2) {
            acc += f.get(k, l) * g.get(k, l).conj() * (norms[k] * norms[l]);
        }
    }
    Ok(acc)
}

/// The twelve first-order operators of sl₂ ⊕ sl₂ on H_α ⊗ H̄_α.
///
/// z-family: `L0z = z∂z + α/2`, `L1z = z²∂z + αz`, `Lm1z = ∂z`.
/// u-family: `L0u = ū∂ū + α/2`, `L1u = ∂ū`, `Lm1u = ū²∂ū + αū`.
/// Diagonal sl₂: `L0 = L0z − L0u`, `L1 = L1z − L1u`, `Lm1 = Lm1u − Lm1z`.
/// Complement: `M0 = L0z + L0u`, `M1 = L1z + L1u`, `Mm1 = Lm1z + Lm1u`.
///
/// With this labelling every operator carrying index ±1 shifts the Fourier
/// mode k − l by ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgebraOp {
    L0z,
    L1z,
    Lm1z,
    L0u,
    L1u,
    Lm1u,
    L0,
    L1,
    Lm1,
    M0,
    M1,
    Mm1,
}

impl AlgebraOp {
    pub const ALL: [AlgebraOp; 12] = [
        AlgebraOp::L0z,
        AlgebraOp::L1z,
        AlgebraOp::Lm1z,
        AlgebraOp::L0u,
        AlgebraOp::L1u,
        AlgebraOp::Lm1u,
        AlgebraOp::L0,
        AlgebraOp::L1,
        AlgebraOp::Lm1,
        AlgebraOp::M0,
        AlgebraOp::M1,
        AlgebraOp::Mm1,
    ];

    /// Expansion into the six one-variable generators with signs.
    fn components(self) -> &'static [(f64, AlgebraOp)] {
        use AlgebraOp::*;
        match self {
            L0z => &[(1.0, L0z)],
            L1z => &[(1.0, L1z)],
            Lm1z => &[(1.0, Lm1z)],
            L0u => &[(1.0, L0u)],
            L1u => &[(1.0, L1u)],
            Lm1u => &[(1.0, Lm1u)],
            L0 => &[(1.0, L0z), (-1.0, L0u)],
            L1 => &[(1.0, L1z), (-1.0, L1u)],
            Lm1 => &[(1.0, Lm1u), (-1.0, Lm1z)],
            M0 => &[(1.0, L0z), (1.0, L0u)],
            M1 => &[(1.0, L1z), (1.0, L1u)],
            Mm1 => &[(1.0, Lm1z), (1.0, Lm1u)],
        }
    }

    /// Change in the Fourier mode k − l.
    pub fn mode_shift(self) -> i32 {
        use AlgebraOp::*;
        match self {
            L0z | L0u | L0 | M0 => 0,
            L1z | L1u | L1 | M1 => 1,
            Lm1z | Lm1u | Lm1 | Mm1 => -1,
        }
    }
}

impl fmt::Display for AlgebraOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Image of z^k ū^l under a one-variable generator: (target (k, l), factor).
fn generator_on_monomial(op: AlgebraOp, alpha: f64, k: usize, l: usize) -> Option<((usize, usize), f64)> {
    use AlgebraOp::*;
    let (kf, lf) = (k as f64, l as f64);
    match op {
        L0z => Some(((k, l), kf + alpha / 2.0)),
        L1z => Some(((k + 1, l), kf + alpha)),
        Lm1z => (k > 0).then(|| ((k - 1, l), kf)),
        L0u => Some(((k, l), lf + alpha / 2.0)),
        L1u => (l > 0).then(|| ((k, l - 1), lf)),
        Lm1u => Some(((k, l + 1), lf + alpha)),
        _ => unreachable!("composite operators are expanded first"),
    }
}

/// Coefficient-level action of an algebra operator; degree bounds grow by at most one.
pub fn apply_algebra(op: AlgebraOp, f: &CoefMatrix) -> CoefMatrix {
    let alpha = f.alpha.value();
    let (k_max, l_max) = f.bounds();
    let mut out = CoefMatrix::zeros(f.alpha, k_max + 1, l_max + 1);
    for (k, l, v) in f.iter() {
        for &(sign, g) in op.components() {
            if let Some(((tk, tl), factor)) = generator_on_monomial(g, alpha, k, l) {
                if factor != 0.0 {
                    out.add_at(tk, tl, v * (sign * factor));
                }
            }
        }
    }
    out
}

/// [A, B] f = A(B f) − B(A f).
pub fn commutator(a: AlgebraOp, b: AlgebraOp, f: &CoefMatrix) -> CoefMatrix {
    let ab = apply_algebra(a, &apply_algebra(b, f));
    let ba = apply_algebra(b, &apply_algebra(a, f));
    ab.combine(c(1.0, 0.0), &ba, c(-1.0, 0.0))
        .expect("same alpha")
}

/// Least-squares expansion of [A, B] in the span of `basis`, from the action on
/// every monomial z^k ū^l with k, l ≤ `degree`.
///
/// Returns the coefficients and the relative residual of the fit.
pub fn structure_constants(
    a: AlgebraOp,
    b: AlgebraOp,
    basis: &[AlgebraOp],
    alpha: Alpha,
    degree: usize,
) -> (Vec<f64>, f64) {
    let dim = degree + 2;
    let mut rows_lhs: Vec<f64> = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); basis.len()];
    for k in 0..=degree {
        for l in 0..=degree {
            let m = CoefMatrix::monomial(alpha, k, l);
            let target = commutator(a, b, &m);
            let images: Vec<CoefMatrix> = basis.iter().map(|&op| apply_algebra(op, &m)).collect();
            for p in 0..=dim {
                for q in 0..=dim {
                    let t = target.get(p, q);
                    rows_lhs.push(t.re);
                    rows_lhs.push(t.im);
                    for (j, img) in images.iter().enumerate() {
                        let v = img.get(p, q);
                        cols[j].push(v.re);
                        cols[j].push(v.im);
                    }
                }
            }
        }
    }
    let n = rows_lhs.len();
    let mat = DMatrix::from_fn(n, basis.len(), |i, j| cols[j][i]);
    let rhs = DVector::from_vec(rows_lhs);
    let svd = mat.clone().svd(true, true);
    let x = svd.solve(&rhs, 1e-12).expect("svd solve");
    let resid = (&mat * &x - &rhs).norm() / rhs.norm().max(1.0);
    (x.iter().copied().collect(), resid)
}

/// SL(2,ℝ) in the disk realization: the matrix (a, b; b̄, ā) with |a|² − |b|² = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    a: Complex64,
    b: Complex64,
}

impl GroupElement {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let det = a.norm_sqr() - b.norm_sqr();
        if (det - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnimodular(det));
        }
        Ok(GroupElement { a, b })
    }

    pub fn identity() -> Self {
        GroupElement {
            a: c(1.0, 0.0),
            b: c(0.0, 0.0),
        }
    }

    /// a = e^{iτ}, b = 0.
    pub fn rotation(tau: f64) -> Self {
        GroupElement {
            a: Complex64::from_polar(1.0, tau),
            b: c(0.0, 0.0),
        }
    }

    /// a = cosh t, b = sinh t · e^{iθ}.
    pub fn boost(t: f64, theta: f64) -> Self {
        GroupElement {
            a: c(t.cosh(), 0.0),
            b: Complex64::from_polar(t.sinh(), theta),
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// Matrix product self · other.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            a: self.a * other.a + self.b * other.b.conj(),
            b: self.a * other.b + self.b * other.a.conj(),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// Möbius action z ↦ (az + b)/(b̄z + ā).
    pub fn mobius(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }
}

/// Truncated group action together with its tail estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAction {
    pub result: CoefMatrix,
    /// Norm of the last retained shell max(p, q) = trunc.
    pub tail_estimate: f64,
}

/// Taylor coefficients (to degree `trunc`) of (p z + q)^k (r z + t)^{−α−k}, with
/// the scalar t^{−α} left out. Requires |r/t| < 1.
fn one_variable_series(p: Complex64, q: Complex64, r: Complex64, t: Complex64, k: usize, alpha: f64, trunc: usize) -> Vec<Complex64> {
    // (r z + t)^{−α−k} = t^{−α} · t^{−k} · (1 + (r/t) z)^{−α−k}
    let ratio = r / t;
    let mut binom = vec![c(0.0, 0.0); trunc + 1];
    let mut term = c(1.0, 0.0);
    let e = alpha + k as f64;
    for (n, slot) in binom.iter_mut().enumerate() {
        *slot = term;
        // coefficient of z^{n+1}: (−1)^{n+1} (e)_{n+1}/(n+1)! ratio^{n+1}
        term = term * (-(e + n as f64) / (n as f64 + 1.0)) * ratio;
    }
    let tk = t.powi(-(k as i32));
    // (p z + q)^k
    let mut poly = vec![c(1.0, 0.0)];
    for _ in 0..k {
        let mut next = vec![c(0.0, 0.0); poly.len() + 1];
        for (i, &v) in poly.iter().enumerate() {
            next[i] += v * q;
            next[i + 1] += v * p;
        }
        poly = next;
    }
    let mut out = vec![c(0.0, 0.0); trunc + 1];
    for (i, &pv) in poly.iter().enumerate() {
        for n in 0..=trunc.saturating_sub(i) {
            if i + n <= trunc {
                out[i + n] += pv * binom[n] * tk;
            }
        }
    }
    out
}

/// Diagonal action (T_α ⊗ T̄_α)(g) on f, Taylor-truncated to degree `trunc` in
/// each variable:
///
/// f((az+b)/(b̄z+ā), (āū+b̄)/(bū+a)) · (1 + ā⁻¹b̄z)^{−α} (1 + a⁻¹bū)^{−α} (aā)^{−α}.
///
/// The scalar (aā)^{−α} is real and positive, so the action carries no phase.
pub fn apply_group(g: &GroupElement, f: &CoefMatrix, trunc: usize) -> Result<GroupAction> {
    let (k_max, l_max) = f.bounds();
    if trunc < k_max.max(l_max) {
        return Err(Error::InvalidArgument(format!(
            "truncation {trunc} below the degree bounds ({k_max}, {l_max})"
        )));
    }
    let alpha = f.alpha.value();
    let (a, b) = (g.a, g.b);
    let scalar = a.norm_sqr().powf(-alpha);
    let zs: Vec<Vec<Complex64>> = (0..=k_max)
        .map(|k| one_variable_series(a, b, b.conj(), a.conj(), k, alpha, trunc))
        .collect();
    let us: Vec<Vec<Complex64>> = (0..=l_max)
        .map(|l| one_variable_series(a.conj(), b.conj(), b, a, l, alpha, trunc))
        .collect();
    let mut out = CoefMatrix::zeros(f.alpha, trunc, trunc);
    for (k, l, v) in f.iter() {
        let v = v * scalar;
        for (row, &zp) in out.data.chunks_mut(trunc + 1).zip(&zs[k]) {
            if zp == c(0.0, 0.0) {
                continue;
            }
            for (slot, &uq) in row.iter_mut().zip(&us[l]) {
                *slot += v * zp * uq;
            }
        }
    }
    let norms = monomial_norms(f.alpha, trunc);
    let mut shell = 0.0;
    for p in 0..=trunc {
        for q in 0..=trunc {
            if p.max(q) == trunc {
                shell += out.get(p, q).norm_sqr() * norms[p] * norms[q];
            }
        }
    }
    Ok(GroupAction {
        result: out,
        tail_estimate: shell.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn alpha(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    #[test]
    fn alpha_validation() {
        assert!(Alpha::new(1.0).is_err());
        assert!(Alpha::new(0.5).is_err());
        assert!(Alpha::new(f64::NAN).is_err());
        assert_eq!(Alpha::new(1.5).unwrap().value(), 1.5);
    }

    #[test]
    fn inner_product_examples() {
        let one = CoefMatrix::monomial(alpha(2.0), 0, 0);
        assert_eq!(inner_product(&one, &one).unwrap(), c(1.0, 0.0));
        let zu = CoefMatrix::monomial(alpha(2.0), 1, 1);
        assert!((inner_product(&zu, &zu).unwrap() - c(0.25, 0.0)).norm() < 1e-15);
        let z2 = CoefMatrix::monomial(alpha(3.0), 2, 0);
        assert!((inner_product(&z2, &z2).unwrap() - c(1.0 / 6.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn inner_product_alpha_mismatch() {
        let f = CoefMatrix::monomial(alpha(2.0), 0, 0);
        let g = CoefMatrix::monomial(alpha(3.0), 0, 0);
        assert!(matches!(inner_product(&f, &g), Err(Error::AlphaMismatch { .. })));
    }

    #[test]
    fn algebra_examples() {
        let a = alpha(2.5);
        let one = CoefMatrix::monomial(a, 0, 0);
        let m0 = apply_algebra(AlgebraOp::M0, &one);
        assert_eq!(m0.get(0, 0), c(2.5, 0.0));
        let z2u = CoefMatrix::monomial(a, 2, 1);
        let l0 = apply_algebra(AlgebraOp::L0, &z2u);
        assert_eq!(l0.get(2, 1), c(1.0, 0.0));
        assert_eq!(l0.iter().count(), 1);
        let m1 = apply_algebra(AlgebraOp::M1, &one);
        assert_eq!(m1.get(1, 0), c(2.5, 0.0));
        assert_eq!(m1.iter().count(), 1);
    }

    #[test]
    fn algebra_mode_shifts() {
        let a = alpha(1.7);
        let f = CoefMatrix::monomial(a, 3, 2);
        for op in AlgebraOp::ALL {
            for (k, l, _) in apply_algebra(op, &f).iter() {
                assert_eq!(k as i32 - l as i32, 1 + op.mode_shift(), "{op}");
            }
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let a = alpha(2.0);
        let zero = CoefMatrix::zeros(a, 3, 3);
        for op in AlgebraOp::ALL {
            assert!(apply_algebra(op, &zero).is_zero());
        }
        let g = GroupElement::boost(0.3, 1.0);
        assert!(apply_group(&g, &zero, 8).unwrap().result.is_zero());
    }

    #[test]
    fn group_identity_and_rotation() {
        let a = alpha(2.3);
        let f = CoefMatrix::from_fn(a, 3, 2, |k, l| c(k as f64 + 1.0, l as f64 - 0.5));
        let id = apply_group(&GroupElement::identity(), &f, 5).unwrap().result;
        for k in 0..=5 {
            for l in 0..=5 {
                assert!((id.get(k, l) - f.get(k, l)).norm() < 1e-15);
            }
        }
        let tau = 0.37;
        let rot = apply_group(&GroupElement::rotation(tau), &f, 5).unwrap().result;
        for (k, l, v) in f.iter() {
            let expect = v * Complex64::from_polar(1.0, 2.0 * tau * (k as f64 - l as f64));
            assert!((rot.get(k, l) - expect).norm() < 1e-14);
            assert!((rot.get(k, l).norm() - v.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn group_element_validation() {
        assert!(GroupElement::new(c(1.0, 0.0), c(0.5, 0.0)).is_err());
        let g = GroupElement::boost(0.4, 0.2);
        assert!(GroupElement::new(g.a(), g.b()).is_ok());
        let h = g.compose(&g.inverse());
        assert!((h.a() - c(1.0, 0.0)).norm() < 1e-15 && h.b().norm() < 1e-15);
        let z = c(0.3, -0.2);
        assert!((g.mobius(g.inverse().mobius(z)) - z).norm() < 1e-15);
        assert!((g.compose(&g).mobius(z) - g.mobius(g.mobius(z))).norm() < 1e-14);
    }

    #[test]
    fn truncation_below_degree_rejected() {
        let f = CoefMatrix::monomial(alpha(2.0), 4, 0);
        assert!(apply_group(&GroupElement::identity(), &f, 3).is_err());
    }

    #[test]
    fn json_shape() {
        let f = CoefMatrix::from_fn(alpha(2.0), 1, 0, |k, _| c(k as f64, 0.5));
        let s = f.to_json();
        assert_eq!(s, r#"{"alpha":2.0,"coeffs":[[[0.0,0.5]],[[1.0,0.5]]]}"#);
        assert_eq!(CoefMatrix::from_json(&s).unwrap(), f);
        assert!(CoefMatrix::from_json(r#"{"alpha":0.5,"coeffs":[[[1,0]]]}"#).is_err());
        assert!(CoefMatrix::from_json(r#"{"alpha":2,"coeffs":[[[1,0]],[]]}"#).is_err());
    }

    #[test]
    fn rotation_by_pi_is_identity_on_diagonal() {
        let a = alpha(2.0);
        let f = CoefMatrix::monomial(a, 2, 2);
        let r = apply_group(&GroupElement::rotation(PI), &f, 2).unwrap().result;
        assert!((r.get(2, 2) - c(1.0, 0.0)).norm() < 1e-14);
    }
}
