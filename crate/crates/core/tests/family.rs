mod common;

use std::f64::consts::PI;

use common::{c, params, two};
use matorth::family::{
    abel_identity_check, build_structure, verify_lemma_identities, weight_eval, weight_inverse_2x2, weight_moment,
    WeightMoments,
};
use matorth::quadrature::quadrature_oracle;
use matorth::{ComplexMatrix, Error, ExtendedComplex, Matrix, Scalar, WeightParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn diag(x: Complex64, y: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[x, y])
}

#[test]
fn two_by_two_structure() {
    let a = c(0.3, -1.7);
    let b = 2.5;
    let s = build_structure::<Complex64>(&two(a, b));
    let mut a_mat = ComplexMatrix::zeros(2);
    a_mat[(0, 1)] = a;
    assert_eq!(s.a, a_mat);
    assert_eq!(s.acal, a_mat);
    assert_eq!(s.psi, diag(c(1.0, 0.0), c(b, 0.0)));
    assert!(s.d.max_abs_diff(&diag(c(-b / 2.0, 0.0), c(-0.5, 0.0))) < 1e-16);
}

#[test]
fn alpha_coefficients() {
    for n in 2..=8 {
        let s = build_structure::<Complex64>(&WeightParams::new(n, vec![c(1.0, 0.0); n - 1], 3.0).unwrap());
        assert_eq!(s.alphas[0], c(1.0, 0.0));
    }
    let b = 0.4;
    let s = build_structure::<Complex64>(&WeightParams::new(4, vec![c(1.0, 0.0); 3], b).unwrap());
    assert!((s.alphas[1] - c((1.0 - b) / (12.0 * b), 0.0)).norm() < 1e-15);
}

#[test]
fn weight_display_for_two_by_two() {
    let a = c(1.1, 0.6);
    let b = 1.8;
    let p = two(a, b);
    for t in [-2.0f64, 0.0, 0.4, 1.7] {
        let e1 = (-t * t).exp();
        let w = ComplexMatrix::from_rows(&[
            vec![c(a.norm_sqr() * t * t * e1 + (-b * t * t).exp(), 0.0), a * t * e1],
            vec![a.conj() * t * e1, c(e1, 0.0)],
        ])
        .unwrap();
        assert!(weight_eval(&p, t).1.max_abs_diff(&w) < 1e-15);
    }
    let (t0, w0) = weight_eval(&p, 0.0);
    assert_eq!(t0, ComplexMatrix::identity(2));
    assert_eq!(w0, ComplexMatrix::identity(2));
}

#[test]
fn zero_parameter_weight_is_diagonal() {
    let b = 3.0;
    let p = WeightParams::new_allowing_zero_a(2, vec![c(0.0, 0.0)], b).unwrap();
    let t = 0.9;
    let expected = diag(c((-b * t * t).exp(), 0.0), c((-t * t).exp(), 0.0));
    assert!(weight_eval(&p, t).1.max_abs_diff(&expected) < 1e-15);
    let inv = weight_inverse_2x2(&p, t).unwrap();
    assert!(inv.max_abs_diff(&diag(c((b * t * t).exp(), 0.0), c((t * t).exp(), 0.0))) < 1e-13);
    for m in [1, 3, 7] {
        assert_eq!(weight_moment(&p, m).max_abs(), 0.0);
    }
}

#[test]
fn moment_examples() {
    let a = c(0.8, 0.9);
    let b = 1.7;
    let p = two(a, b);
    let m0 = weight_moment(&p, 0);
    let expected = diag(c(a.norm_sqr() * PI.sqrt() / 2.0 + (PI / b).sqrt(), 0.0), c(PI.sqrt(), 0.0));
    assert!(m0.max_abs_diff(&expected) < 1e-15);
    assert!((weight_moment(&p, 2)[(1, 1)] - c(PI.sqrt() / 2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn closed_form_inverse() {
    let p = two(c(-0.4, 1.3), 2.2);
    assert!(weight_inverse_2x2(&p, 0.0).unwrap().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-16);
    let flagship = two(c(1.0, 0.0), 2.0);
    for t in common::grid() {
        let w = weight_eval(&flagship, t).1;
        let prod = &w * &weight_inverse_2x2(&flagship, t).unwrap();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-10, "t={t}");

        // elsewhere the product cancels terms of size |W||W⁻¹|
        let w = weight_eval(&p, t).1;
        let inv = weight_inverse_2x2(&p, t).unwrap();
        let prod = &w * &inv;
        let scale = w.max_abs() * inv.max_abs();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15 * scale, "t={t}");
    }
    let three = WeightParams::new(3, vec![c(1.0, 0.0); 2], 2.0).unwrap();
    assert_eq!(weight_inverse_2x2(&three, 0.5), Err(Error::RequiresSizeTwo(3)));
}

#[test]
fn lemma_examples() {
    let r = verify_lemma_identities(&two(c(1.4, -0.2), 3.0), 0.8);
    assert_eq!(r.commutator_expansion, 0.0);
    assert_eq!(r.principal_relation, Some(0.0));
    let mut rng_like = [0.3, -1.1, 0.9, 1.6, -0.4, 0.2, 1.2, -0.8];
    rng_like.rotate_left(3);
    let a: Vec<Complex64> = (0..4).map(|i| c(rng_like[2 * i], rng_like[2 * i + 1])).collect();
    let r = verify_lemma_identities(&WeightParams::new(5, a, 2.0).unwrap(), 0.7);
    for (name, value) in r.entries() {
        assert!(value.expect("b != 1") < 1e-10, "{name}");
    }
}

#[test]
fn degenerate_b_skips_singular_identities() {
    let p = WeightParams::new(4, vec![c(1.0, 0.5); 3], 1.0).unwrap();
    assert!(p.is_degenerate());
    let s = build_structure::<Complex64>(&p);
    assert_eq!(s.psi, ComplexMatrix::identity(4));
    assert_eq!(s.acal, s.a);
    let r = verify_lemma_identities(&p, 1.3);
    assert_eq!(r.even_power_expansion, None);
    assert_eq!(r.principal_relation, None);
    assert!(r.max_residual() < 1e-12);
}

#[test]
fn invalid_parameters_are_rejected() {
    let err = WeightParams::new(3, vec![c(1.0, 0.0), c(0.0, 0.0)], 2.0).unwrap_err();
    assert!(err.to_string().contains("a_2"), "{err}");
    assert!(WeightParams::new(1, vec![], 2.0).is_err());
    assert!(WeightParams::new(2, vec![c(1.0, 0.0)], 0.0).is_err());
    assert!(WeightParams::new(2, vec![c(1.0, 0.0)], -1.0).is_err());
    assert!(WeightParams::new(3, vec![c(1.0, 0.0)], 2.0).is_err());
}

#[test]
fn abel_examples() {
    let w = c(0.7, -0.3);
    let k0 = abel_identity_check(0, c(2.0, 1.0), w).unwrap();
    assert!((k0.lhs - w.inv()).norm() < 1e-15 && (k0.rhs - w.inv()).norm() < 1e-15);
    let k1 = abel_identity_check(1, c(0.0, 0.0), c(1.0, 0.0)).unwrap();
    assert!((k1.lhs - c(2.0, 0.0)).norm() < 1e-15 && (k1.rhs - c(2.0, 0.0)).norm() < 1e-15);
    let k6 = abel_identity_check(6, c(0.5, 0.0), c(0.5, 0.0)).unwrap();
    assert!(k6.residual < 1e-12);
    // Σ C(k,m)(2m+1)^m(2(k-m)+1)^{k-m-1} = 2^k(1+k)^k after rescaling by 2^{k-1}
    assert!((k6.rhs.re * 2f64.powi(5) - 2f64.powi(6) * 7f64.powi(6)).abs() < 1e-6);
    assert!(abel_identity_check(41, c(0.0, 0.0), c(1.0, 0.0)).is_err());
    assert!(abel_identity_check(3, c(0.0, 0.0), c(0.0, 0.0)).is_err());
}

#[test]
fn memoized_moments_match_direct() {
    let p = WeightParams::new(3, vec![c(0.5, 0.5), c(-1.0, 0.2)], 0.6).unwrap();
    let table = WeightMoments::<Complex64>::new(&p);
    for m in [0, 5, 2, 5, 9] {
        assert!(table.moment(m).max_abs_diff(&weight_moment(&p, m)) <= 1e-14 * weight_moment(&p, m).max_abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weight_is_hermitian_positive_definite(p in params(2..=8, 1.0, 0.5, 2.0)) {
        for i in 0..=20 {
            let t = -5.0 + 0.5 * i as f64;
            let (_, w) = weight_eval(&p, t);
            prop_assert!(w.hermitian_residual() <= 1e-14 * w.max_abs());
            prop_assert!(w.is_positive_definite(), "t={t}");
        }
    }

    #[test]
    fn weight_is_positive_definite_in_extended_precision(p in params(2..=8, 2.0, 0.2, 5.0)) {
        let s = build_structure::<ExtendedComplex>(&p);
        let e = s.exp_acal();
        for i in 0..=12 {
            let t = -3.0 + 0.5 * i as f64;
            let g: Vec<ExtendedComplex> = s.d.diagonal().iter().map(|d| {
                ExtendedComplex::from_f64((d.re.to_f64() * t * t).exp())
            }).collect();
            let tm = &e.eval(t) * &Matrix::from_diagonal(&g);
            let w = &tm * &tm.adjoint();
            prop_assert!(w.is_positive_definite(), "t={t}");
        }
    }

    #[test]
    fn determinant_is_product_of_gaussians(p in params(2..=6, 2.0, 0.2, 5.0), t in -2.0f64..2.0) {
        let (_, w) = weight_eval(&p, t);
        let u = w.upper_cholesky().unwrap();
        let det: f64 = u.diagonal().iter().map(|x| x.norm_sqr()).product();
        let d = build_structure::<Complex64>(&p).d;
        let expected: f64 = d.diagonal().iter().map(|dk| (2.0 * dk.re * t * t).exp()).product();
        prop_assert!((det - expected).abs() <= 1e-8 * expected);
    }

    #[test]
    fn moments_are_hermitian_with_vanishing_odd_diagonal(p in params(2..=5, 2.0, 0.2, 5.0), m in 0usize..20) {
        let mm = weight_moment(&p, m);
        prop_assert!(mm.hermitian_residual() <= 1e-15 * mm.max_abs());
        if m % 2 == 1 {
            prop_assert!(mm.diagonal().iter().all(|x| *x == c(0.0, 0.0)));
        }
    }

    #[test]
    fn lemma_identities_hold(p in params(2..=8, 2.0, 0.2, 5.0)) {
        for t in [-2.0, 0.3, 1.9] {
            prop_assert!(verify_lemma_identities(&p, t).max_residual() < 1e-10);
        }
    }

    #[test]
    fn moments_agree_with_quadrature(p in params(2..=5, 2.0, 0.2, 5.0), m in 0usize..=30) {
        let exact = weight_moment(&p, m);
        let n = p.size();
        let oracle = quadrature_oracle(
            &p,
            |t| ComplexMatrix::identity(n).scale(c(t.powi(m as i32), 0.0)),
            |_| ComplexMatrix::identity(n),
            m + 2 * (n - 1),
        );
        prop_assert!(exact.max_abs_diff(&oracle.value) <= 1e-9 * exact.max_abs());
    }

    #[test]
    fn abel_identity_holds(zr in 0.0f64..2.0, zi in -1.0f64..1.0, wr in 0.1f64..2.0, wi in -1.0f64..1.0, k in 0usize..=30) {
        prop_assert!(abel_identity_check(k, c(zr, zi), c(wr, wi)).unwrap().residual < 1e-12);
    }
}
