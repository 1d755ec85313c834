use num_complex::Complex64;
use overalg::arith::{c, log_gamma, pochhammer};
use overalg::hahn::{cdh_eval, cdh_eval_recurrence, HahnParams};
use overalg::kernel::transform;
use overalg::model::{
    apply_algebra, apply_group, commutator, inner_product, AlgebraOp, Alpha, CoefMatrix, GroupElement,
};
use overalg::spectral::{apply_spectral, relative_residual, SpectralOp};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn alpha_strategy() -> impl Strategy<Value = Alpha> {
    (1.05f64..5.0).prop_map(|a| Alpha::new(a).unwrap())
}

fn coef_strategy(degree: usize) -> impl Strategy<Value = CoefMatrix> {
    (alpha_strategy(), any::<u64>()).prop_map(move |(a, seed)| CoefMatrix::random(a, degree, &mut ChaCha8Rng::seed_from_u64(seed)))
}

fn pair_strategy(degree: usize) -> impl Strategy<Value = (CoefMatrix, CoefMatrix)> {
    (alpha_strategy(), any::<u64>(), any::<u64>()).prop_map(move |(a, s1, s2)| {
        (
            CoefMatrix::random(a, degree, &mut ChaCha8Rng::seed_from_u64(s1)),
            CoefMatrix::random(a, degree, &mut ChaCha8Rng::seed_from_u64(s2)),
        )
    })
}

fn group_strategy() -> impl Strategy<Value = GroupElement> {
    (0.0f64..0.35, 0.0f64..std::f64::consts::TAU, 0.0f64..std::f64::consts::TAU).prop_map(|(t, theta, tau)| {
        GroupElement::boost(t, theta).compose(&GroupElement::rotation(tau))
    })
}

fn max_diff(f: &CoefMatrix, g: &CoefMatrix, degree: usize) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..=degree {
        for l in 0..=degree {
            worst = worst.max((f.get(k, l) - g.get(k, l)).norm());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn log_gamma_recurrence(re in -30.0f64..30.0, im in -30.0f64..30.0) {
        let z = c(re, im);
        prop_assume!(z.norm() > 1e-3 && (re.fract() != 0.0 || im != 0.0));
        let d = log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap() - z.ln();
        // equal modulo 2πi
        let k = (d.im / std::f64::consts::TAU).round();
        let scale = 1.0 + z.norm().ln().abs() * z.norm();
        prop_assert!(d.re.abs() <= 1e-12 * scale, "{z}: {d}");
        prop_assert!((d.im - k * std::f64::consts::TAU).abs() <= 1e-12 * scale, "{z}: {d}");
    }
}

proptest! {
    #[test]
    fn pochhammer_splits(re in -5.0f64..5.0, im in -5.0f64..5.0, m in 0usize..8, n in 0usize..8) {
        let z = c(re, im);
        let whole = pochhammer(z, m + n);
        let split = pochhammer(z, m) * pochhammer(z + m as f64, n);
        prop_assert!((whole - split).norm() <= 1e-12 * whole.norm().max(1.0));
    }

    #[test]
    fn inner_product_is_hermitian_and_positive((f, g) in pair_strategy(6)) {
        let fg = inner_product(&f, &g).unwrap();
        let gf = inner_product(&g, &f).unwrap();
        prop_assert!((fg - gf.conj()).norm() <= 1e-14 * fg.norm().max(1.0));
        if !f.is_zero() {
            let ff = inner_product(&f, &f).unwrap();
            prop_assert!(ff.re > 0.0 && ff.im == 0.0);
        }
    }

    #[test]
    fn m0_is_self_adjoint((f, g) in pair_strategy(8)) {
        let lhs = inner_product(&apply_algebra(AlgebraOp::M0, &f), &g).unwrap();
        let rhs = inner_product(&f, &apply_algebra(AlgebraOp::M0, &g)).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn diagonal_sl2_closes(f in coef_strategy(6)) {
        use AlgebraOp::*;
        let one = c(1.0, 0.0);
        for (a, b, target, k) in [(L0, L1, L1, 1.0), (L0, Lm1, Lm1, -1.0), (L1, Lm1, L0, 2.0)] {
            let lhs = commutator(a, b, &f);
            let rhs = apply_algebra(target, &f).scale(one * k);
            prop_assert!(max_diff(&lhs, &rhs, 8) <= 1e-10 * (1.0 + f.norm()));
        }
        // the complementary triple does not close on itself: [M1, Mm1] = −2 L0
        let lhs = commutator(M1, Mm1, &f);
        let rhs = apply_algebra(L0, &f).scale(c(-2.0, 0.0));
        prop_assert!(max_diff(&lhs, &rhs, 8) <= 1e-10 * (1.0 + f.norm()));
    }

    #[test]
    fn z_and_u_families_commute(f in coef_strategy(5)) {
        use AlgebraOp::*;
        for x in [L0z, L1z, Lm1z] {
            for y in [L0u, L1u, Lm1u] {
                prop_assert!(commutator(x, y, &f).norm() <= 1e-12 * (1.0 + f.norm()));
            }
        }
    }

    #[test]
    fn group_action_reverses_products(f in coef_strategy(3), g1 in group_strategy(), g2 in group_strategy()) {
        let trunc = 60;
        let step = apply_group(&g2, &f, trunc).unwrap().result;
        let twice = apply_group(&g1, &step, trunc).unwrap().result;
        let once = apply_group(&g2.compose(&g1), &f, trunc).unwrap().result;
        prop_assert!(max_diff(&twice, &once, 6) <= 1e-9 * (1.0 + f.norm()), "{}", max_diff(&twice, &once, 6));
    }

    #[test]
    fn group_action_is_isometric(f in coef_strategy(3), g in group_strategy()) {
        let out = apply_group(&g, &f, 80).unwrap();
        let (n0, n1) = (inner_product(&f, &f).unwrap().re, inner_product(&out.result, &out.result).unwrap().re);
        prop_assert!((n0 - n1).abs() <= 1e-9 * n0.max(1e-300));
    }

    #[test]
    fn spectral_operators_are_linear((f, g) in pair_strategy(4), a in -2.0f64..2.0, b in -2.0f64..2.0, phi in 0.0f64..std::f64::consts::TAU, s in 0.2f64..5.0) {
        let (ca, cb) = (c(a, 0.5 * b), c(b, -a));
        let (jf, jg) = (transform(&f), transform(&g));
        let sum = jf.combine(ca, &jg, cb).unwrap();
        let s = c(s, 0.0);
        for op in SpectralOp::ALL {
            let lhs = apply_spectral(op, &sum).eval(phi, s).unwrap();
            let rhs = ca * apply_spectral(op, &jf).eval(phi, s).unwrap() + cb * apply_spectral(op, &jg).eval(phi, s).unwrap();
            prop_assert!(relative_residual(lhs, rhs) <= 1e-12);
        }
    }

    #[test]
    fn modes_shift_by_the_operator_index(f in coef_strategy(5)) {
        let jf = transform(&f);
        for op in SpectralOp::ALL {
            let expect: Vec<i32> = jf.modes().iter().map(|m| m + op.mode_shift()).collect();
            prop_assert_eq!(apply_spectral(op, &jf).modes(), expect);
        }
        for op in AlgebraOp::ALL {
            let img = transform(&apply_algebra(op, &f));
            prop_assert!(img.modes().iter().all(|m| jf.modes().contains(&(m - op.mode_shift()))));
        }
    }

    #[test]
    fn transform_is_linear((f, g) in pair_strategy(5), phi in 0.0f64..std::f64::consts::TAU, s in -3.0f64..3.0) {
        let (a, b) = (c(0.3, -1.2), c(2.0, 0.4));
        let s = c(s, 0.1);
        let lhs = transform(&f.combine(a, &g, b).unwrap()).eval(phi, s);
        let rhs = a * transform(&f).eval(phi, s) + b * transform(&g).eval(phi, s);
        prop_assert!(relative_residual(lhs, rhs) <= 1e-12);
    }

    #[test]
    fn dual_hahn_sum_matches_recurrence(a in 0.1f64..3.0, b in 0.1f64..3.0, cc in 0.1f64..3.0, n in 0usize..=12, s in 0.0f64..6.0) {
        let p = HahnParams::new(a, b, cc);
        let x = cdh_eval(n, c(s, 0.0), p).unwrap();
        let y = cdh_eval_recurrence(n, c(s, 0.0), p).unwrap();
        // rounding scale: the largest term of the ₃F₂ sum
        let sc = c(s, 0.0);
        let largest = (0..=n)
            .map(|j| {
                let num = pochhammer(c(-(n as f64), 0.0), j) * pochhammer(a + sc * c(0.0, 1.0), j) * pochhammer(a - sc * c(0.0, 1.0), j);
                let den = pochhammer(c(a + b, 0.0), j) * pochhammer(c(a + cc, 0.0), j) * pochhammer(c(1.0, 0.0), j);
                (num / den).norm()
            })
            .fold(1.0, f64::max);
        let bound = 1e-11 * largest;
        prop_assert!((x - y).norm() <= bound);
        prop_assert!((x - cdh_eval(n, c(-s, 0.0), p).unwrap()).norm() <= bound);
    }

    #[test]
    fn json_round_trip(f in coef_strategy(4)) {
        let back = CoefMatrix::from_json(&f.to_json()).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn rotation_only_changes_phase() {
    let a = Alpha::new(2.5).unwrap();
    let tau = 0.37;
    let f = CoefMatrix::monomial(a, 3, 1);
    let out = apply_group(&GroupElement::rotation(tau), &f, 5).unwrap().result;
    let v: Complex64 = out.get(3, 1);
    assert!((v.norm() - 1.0).abs() < 1e-14);
    assert!((v - Complex64::from_polar(1.0, 2.0 * tau * 2.0)).norm() < 1e-13);
}
