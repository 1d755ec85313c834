use std::f64::consts::PI;

use num_complex::Complex64;
use overalg::arith::{c, gauss_legendre, I};
use overalg::hahn::{degree_in_s_squared, diagonal_profile};
use overalg::kernel::{
    extract_kernel_coefficients, kernel_amplitude, kernel_coeff, kernel_eval, quadrature_transform, transform,
    transform_scale,
};
use overalg::model::{apply_algebra, AlgebraOp, Alpha, CoefMatrix};
use overalg::spectral::{apply_spectral, kernel_identity_residual, relative_residual, SpectralOp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn alpha(v: f64) -> Alpha {
    Alpha::new(v).unwrap()
}

#[test]
fn quadrature_transform_examples() {
    let a = alpha(2.0);
    let tol = 1e-11;
    let one = quadrature_transform(&CoefMatrix::monomial(a, 0, 0), 0.3, c(1.7, 0.0), tol).unwrap();
    assert!((one - c(PI * PI, 0.0)).norm() <= 10.0 * tol * PI * PI);
    let z = quadrature_transform(&CoefMatrix::monomial(a, 1, 0), 0.0, c(0.0, 0.0), tol).unwrap();
    assert!((z - c(PI * PI / 4.0, 0.0)).norm() <= 10.0 * tol * PI * PI);

    let zu = CoefMatrix::monomial(a, 1, 1);
    let vals: Vec<Complex64> = (0..8)
        .map(|j| quadrature_transform(&zu, j as f64 * PI / 4.0, c(0.9, 0.0), tol).unwrap())
        .collect();
    let spread = vals.iter().map(|v| (v - vals[0]).norm()).fold(0.0, f64::max);
    assert!(spread < tol * vals[0].norm().max(1.0), "{spread}");
}

#[test]
fn closed_form_transform_matches_quadrature() {
    let mut r = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let a = alpha(r.random_range(1.3..3.5));
        let (k, l) = (r.random_range(0..4usize), r.random_range(0..4usize));
        let f = CoefMatrix::monomial(a, k, l);
        let phi = r.random_range(0.0..2.0 * PI);
        let s = c(r.random_range(0.0..3.0), 0.0);
        let quad = quadrature_transform(&f, phi, s, 1e-11).unwrap();
        let closed = transform(&f).eval(phi, s);
        assert!(relative_residual(quad, closed) <= 1e-8, "k={k} l={l} a={} {quad} {closed}", a.value());
    }
}

#[test]
fn transform_of_z() {
    let a = alpha(2.5);
    let f = transform(&CoefMatrix::monomial(a, 1, 0));
    let (phi, s) = (0.7, c(1.1, 0.0));
    let expect = transform_scale(a) / 2.5 * (0.5 + I * s) * Complex64::from_polar(1.0, phi);
    assert!((f.eval(phi, s) - expect).norm() < 1e-12);
    assert!(transform(&CoefMatrix::zeros(a, 2, 2)).eval(phi, s).norm() == 0.0);
}

#[test]
fn coefficient_extraction_at_complex_s() {
    let a = alpha(1.8);
    let s = c(0.6, -0.4);
    let table = extract_kernel_coefficients(1.1, s, a, 0.5, 64, 6).unwrap();
    for (k, row) in table.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            let closed = kernel_coeff(k, l, 1.1, s, a);
            assert!((v - closed).norm() <= 1e-9 * closed.norm().max(1.0), "({k},{l})");
        }
    }
}

#[test]
fn real_kernel_value() {
    let (r, a) = (0.4, alpha(2.0));
    let k = kernel_eval(0.0, c(0.0, 0.0), c(r, 0.0), c(r, 0.0), a).unwrap();
    let expect = 1.0 / (1.0 - r) / (1.0 - r * r).powf(1.5);
    assert!((k.re - expect).abs() < 1e-13 && k.im.abs() < 1e-13);
}

#[test]
fn amplitude_symmetries() {
    let a = alpha(2.2);
    for k in 0..=8 {
        for l in 0..=8 {
            for s in [0.3, 1.9, 4.4] {
                let (p, m) = (kernel_amplitude(k, l, c(s, 0.0), a), kernel_amplitude(k, l, c(-s, 0.0), a));
                assert!((p - kernel_amplitude(l, k, c(s, 0.0), a)).norm() <= 1e-11 * p.norm().max(1.0));
                assert!((p.conj() - m).norm() <= 1e-12 * p.norm().max(1.0), "({k},{l}) s={s}");
            }
        }
    }
}

#[test]
fn amplitudes_are_holomorphic() {
    // ∮ A_kl(s) ds around a square vanishes
    let a = alpha(1.7);
    let rule = gauss_legendre(24, 0.0, 1.0);
    let corners = [c(0.5, -0.5), c(1.5, -0.5), c(1.5, 0.5), c(0.5, 0.5)];
    for (k, l) in [(0, 0), (1, 2), (3, 3), (5, 2), (8, 8)] {
        let mut total = c(0.0, 0.0);
        let mut scale = 0.0;
        for i in 0..4 {
            let (p, q) = (corners[i], corners[(i + 1) % 4]);
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let v = kernel_amplitude(k, l, p + (q - p) * *t, a) * (q - p) * *w;
                total += v;
                scale += v.norm();
            }
        }
        assert!(total.norm() <= 1e-12 * scale, "({k},{l}): {}", total.norm() / scale);
    }
}

#[test]
fn kernel_identity_complex_s() {
    let mut r = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let z = Complex64::from_polar(0.8 * r.random::<f64>().sqrt(), r.random_range(0.0..2.0 * PI));
        let u = Complex64::from_polar(0.8 * r.random::<f64>().sqrt(), r.random_range(0.0..2.0 * PI));
        let s = c(r.random_range(0.1..5.0), r.random_range(-1.0..1.0));
        if (s - c(0.0, 0.5)).norm() < 0.05 || (s + c(0.0, 0.5)).norm() < 0.05 {
            continue;
        }
        let res = kernel_identity_residual(z, u, r.random_range(0.0..2.0 * PI), s, alpha(2.4)).unwrap();
        worst = worst.max(res);
    }
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn q0_on_j_of_zu() {
    let a = alpha(2.0);
    let f = CoefMatrix::monomial(a, 1, 1);
    let lhs = apply_spectral(SpectralOp::Q0, &transform(&f));
    let rhs = transform(&apply_algebra(AlgebraOp::M0, &f));
    for j in 0..20 {
        let (phi, s) = (0.3 * j as f64, c(0.2 + 0.29 * j as f64, 0.0));
        let v = lhs.eval(phi, s).unwrap();
        assert!(relative_residual(v, 4.0 * transform(&f).eval(phi, s)) <= 1e-12);
        assert!(relative_residual(v, rhs.eval(phi, s)) <= 1e-12);
    }
}

#[test]
fn poles_cancel_near_zero() {
    let mut r = ChaCha8Rng::seed_from_u64(41);
    let a = alpha(1.9);
    for _ in 0..10 {
        let f = CoefMatrix::random(a, 5, &mut r);
        let rhs = transform(&apply_algebra(AlgebraOp::M0, &f));
        let lhs = apply_spectral(SpectralOp::Q0, &transform(&f));
        for s in [1e-3, -1e-3] {
            let phi = r.random_range(0.0..2.0 * PI);
            let (x, y) = (lhs.eval(phi, c(s, 0.0)).unwrap(), rhs.eval(phi, c(s, 0.0)));
            assert!(relative_residual(x, y) <= 1e-6, "{x} {y}");
        }
    }
}

#[test]
fn diagonal_profiles_are_polynomials_in_s_squared() {
    let a = alpha(2.0);
    let g0 = diagonal_profile(0, a);
    for k in 0..=6 {
        let g = diagonal_profile(k, a);
        let ratio = |s: Complex64| g(s) / g0(s);
        assert_eq!(degree_in_s_squared(ratio, 10, 1e-10), Some(k));
    }
}

#[test]
fn diagonal_profiles_are_even() {
    let a = alpha(2.6);
    for k in 0..=10 {
        let g = diagonal_profile(k, a);
        for s in [0.2, 1.4, 3.3, 5.9] {
            let (x, y) = (g(c(s, 0.0)), g(c(-s, 0.0)));
            assert!((x - y).norm() <= 1e-10 * x.norm().max(1.0), "k={k}");
        }
    }
}
