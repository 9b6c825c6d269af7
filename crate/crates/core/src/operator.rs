//! The second-order operator `D = ∂²F₂ + ∂F₁ + F₀`, acting on the right:
//! `D(P) = P″F₂ + P′F₁ + PF₀`, with
//!
//! ```text
//! F₂(t) = Ψ + ((b-1)/(N-1)) [𝒜,𝒥] t
//! F₁(t) = 2𝒜Ψ + 2(-bI + ((b-1)/(N-1)) 𝒜[𝒜,𝒥]) t
//! F₀    = 2b𝒥 + 𝒜²Ψ
//! ```
//!
//! Symmetry with respect to `W` is checked three ways: the pointwise
//! Pearson-type equations (exact derivatives in the Gaussian–polynomial
//! algebra), the conjugated matrices `χ` and `ξ`, and the bilinear identity
//! `∫D(P)WQ* = ∫PW D(Q)*` through exact moments.
//!
//! `χ = T⁻¹XT` with `X = -FF₂F - F′F₂ - FF₂′ + F₀` and `F = 𝒜 + 2t e^{𝒜t}𝒟e^{-𝒜t}`.
//! Because `T = e^{𝒜t}·diag(e^{d_k t²})`, `χ = G⁻¹ξG` where
//! `ξ = e^{-𝒜t}Xe^{𝒜t}` and `G` is the diagonal Gaussian factor. Rounding in
//! the off-diagonal part of `ξ` is amplified by `e^{|d_i-d_j|t²}`, so this
//! check runs in extended precision.

use num_complex::Complex64;

use crate::error::Result;
use crate::family::{build_structure, weight_function_matrix, WeightMoments, WeightParams};
use crate::linalg::{ComplexMatrix, GaussErfFunctionMatrix, Matrix, MatrixPolynomial};
use crate::scalar::{ExtendedComplex, Scalar};

/// Coefficient polynomials of `D`; degrees at most 2, 1 and 0.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialOperator<S = Complex64> {
    pub f2: MatrixPolynomial<S>,
    pub f1: MatrixPolynomial<S>,
    pub f0: MatrixPolynomial<S>,
}

impl<S: Scalar> DifferentialOperator<S> {
    pub fn dim(&self) -> usize {
        self.f0.dim()
    }
}

pub fn build_operator<S: Scalar>(p: &WeightParams) -> DifferentialOperator<S> {
    let s = build_structure::<S>(p);
    let n = s.dim();
    let two = S::from_f64(2.0);
    let b = s.b();
    let comm = s.commutator();
    let slope = s.slope();
    let f2 = MatrixPolynomial::new(n, vec![s.psi.clone(), comm.scale(slope)]).expect("square");
    let linear = &Matrix::identity(n).scale(-b) + &(&s.acal * &comm).scale(slope);
    let f1 = MatrixPolynomial::new(n, vec![(&s.acal * &s.psi).scale(two), linear.scale(two)]).expect("square");
    let f0 = MatrixPolynomial::constant(constant_term(&s));
    DifferentialOperator { f2, f1, f0 }
}

fn constant_term<S: Scalar>(s: &crate::family::StructureMatrices<S>) -> Matrix<S> {
    let b = s.b();
    &s.j.scale(b + b) + &(&(&s.acal * &s.acal) * &s.psi)
}

/// `P″F₂ + P′F₁ + PF₀`.
pub fn apply_operator<S: Scalar>(d: &DifferentialOperator<S>, p: &MatrixPolynomial<S>) -> Result<MatrixPolynomial<S>> {
    if p.dim() != d.dim() {
        return Err(crate::Error::DimensionMismatch {
            expected: d.dim(),
            found: p.dim(),
        });
    }
    Ok(p.derivative(2)
        .mul(&d.f2)
        .add(&p.derivative(1).mul(&d.f1))
        .add(&p.mul(&d.f0)))
}

/// `Λ_n = -2bn I + (2n(b-1)/(N-1)) 𝒜[𝒜,𝒥] + 2b𝒥 + 𝒜²Ψ`.
///
/// Obtained by matching the `t^n` coefficient of `D(P̂_n) = Λ_n P̂_n` for a
/// monic `P̂_n`; for `N = 2` it reduces to `diag(-2bn, -2b(n-1))`.
pub fn eigenvalue_matrix<S: Scalar>(p: &WeightParams, n: usize) -> Matrix<S> {
    let s = build_structure::<S>(p);
    let dim = s.dim();
    let nn = S::from_usize(n);
    let two = S::from_f64(2.0);
    let b = s.b();
    let diag = Matrix::identity(dim).scale(-(two * b * nn));
    let mixed = (&s.acal * &s.commutator()).scale(two * nn * s.slope());
    &(&diag + &mixed) + &constant_term(&s)
}

/// Maximum residuals of the symmetry equations over a set of points.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    /// `F₂W - WF₂*`
    pub residual_ccp: f64,
    /// `2(F₂W)′ - F₁W - WF₁*`
    pub residual_first_order: f64,
    /// `(F₂W)″ - (F₁W)′ + F₀W - WF₀*`
    pub residual_second_order: f64,
    pub chi_hermitian_residual: f64,
    pub xi_offdiagonal_residual: f64,
    /// Deviation of `diag(ξ)` from `bI + 2bt²𝒟 + 2b𝒥`.
    pub xi_diagonal_residual: f64,
    /// `max|t^10 F₂W|` and `max|t^10((F₂W)′ - F₁W)|` at `|t| = 8` both below `1e-6`.
    pub boundary_decay_ok: bool,
    /// Larger of the two boundary samples.
    pub boundary_decay: f64,
}

impl SymmetryReport {
    pub fn max_pointwise(&self) -> f64 {
        self.residual_ccp
            .max(self.residual_first_order)
            .max(self.residual_second_order)
    }
}

pub const BOUNDARY_POINT: f64 = 8.0;
pub const BOUNDARY_POWER: i32 = 10;
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

/// The three symmetry equations as exact function matrices, plus the two
/// boundary expressions `F₂W` and `(F₂W)′ - F₁W`.
struct PearsonSystem {
    first: GaussErfFunctionMatrix,
    second: GaussErfFunctionMatrix,
    third: GaussErfFunctionMatrix,
    boundary_zero: GaussErfFunctionMatrix,
    boundary_one: GaussErfFunctionMatrix,
}

fn pearson_system(p: &WeightParams) -> PearsonSystem {
    let d = build_operator::<Complex64>(p);
    let w = weight_function_matrix(p);
    let f2w = w.mul_poly_left(&d.f2);
    let f1w = w.mul_poly_left(&d.f1);
    let f0w = w.mul_poly_left(&d.f0);
    let w_f2 = w.mul_poly_right(&d.f2.adjoint());
    let w_f1 = w.mul_poly_right(&d.f1.adjoint());
    let w_f0 = w.mul_poly_right(&d.f0.adjoint());
    let f2w_prime = f2w.derivative();
    let two = Complex64::new(2.0, 0.0);
    PearsonSystem {
        first: f2w.sub(&w_f2),
        second: f2w_prime.scale(two).sub(&f1w).sub(&w_f1),
        third: f2w_prime.derivative().sub(&f1w.derivative()).add(&f0w).sub(&w_f0),
        boundary_one: f2w_prime.sub(&f1w),
        boundary_zero: f2w,
    }
}

pub fn check_symmetry_equations(p: &WeightParams, ts: &[f64]) -> SymmetryReport {
    let sys = pearson_system(p);
    let max_at = |f: &GaussErfFunctionMatrix| ts.iter().map(|&t| f.eval(t).max_abs()).fold(0.0, f64::max);
    let boundary = [-BOUNDARY_POINT, BOUNDARY_POINT]
        .iter()
        .flat_map(|&t| {
            let scale = t.powi(BOUNDARY_POWER);
            [
                sys.boundary_zero.eval(t).max_abs() * scale,
                sys.boundary_one.eval(t).max_abs() * scale,
            ]
        })
        .fold(0.0, f64::max);
    let chi = check_chi_xi(p, ts);
    SymmetryReport {
        residual_ccp: max_at(&sys.first),
        residual_first_order: max_at(&sys.second),
        residual_second_order: max_at(&sys.third),
        chi_hermitian_residual: chi.chi_hermitian_residual,
        xi_offdiagonal_residual: chi.xi_offdiagonal_residual,
        xi_diagonal_residual: chi.xi_diagonal_residual,
        boundary_decay_ok: boundary < BOUNDARY_TOLERANCE,
        boundary_decay: boundary,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiXiReport {
    pub chi_hermitian_residual: f64,
    pub xi_offdiagonal_residual: f64,
    pub xi_diagonal_residual: f64,
}

/// `χ` and `ξ` at the given points, in extended precision.
pub fn check_chi_xi(p: &WeightParams, ts: &[f64]) -> ChiXiReport {
    type E = ExtendedComplex;
    let s = build_structure::<E>(p);
    let op = build_operator::<E>(p);
    let exp_pos = s.exp_acal();
    let exp_neg = s.exp_neg_acal();
    let f2_prime = op.f2.coeff(1);
    let f0 = op.f0.coeff(0);
    let b = s.b();
    let two = E::from_f64(2.0);
    let d_f64: Vec<f64> = build_structure::<Complex64>(p).d.diagonal().iter().map(|d| d.re).collect();

    let mut report = ChiXiReport {
        chi_hermitian_residual: 0.0,
        xi_offdiagonal_residual: 0.0,
        xi_diagonal_residual: 0.0,
    };
    for &t in ts {
        let te = E::from_f64(t);
        let e = exp_pos.eval(t);
        let e_inv = exp_neg.eval(t);
        let m = &(&e * &s.d) * &e_inv;
        let f = &s.acal + &m.scale(two * te);
        let f_prime = &m.scale(two) + &s.acal.commutator(&m).scale(two * te);
        let f2 = op.f2.eval(t);
        let x = &(&(&(-&(&(&f * &f2) * &f)) - &(&f_prime * &f2)) - &(&f * &f2_prime)) + &f0;
        let xi = &(&e_inv * &x) * &e;

        let expected = &(&Matrix::identity(s.dim()).scale(b) + &s.d.scale(two * b * te * te)) + &s.j.scale(two * b);
        let diag_dev = xi
            .diagonal()
            .iter()
            .zip(expected.diagonal())
            .map(|(x, y)| (*x - y).abs())
            .fold(0.0, f64::max);

        let gauss: Vec<E> = d_f64.iter().map(|d| E::from_f64((d * t * t).exp())).collect();
        let chi = Matrix::from_fn(s.dim(), |i, j| xi[(i, j)] * gauss[j] / gauss[i]);

        report.chi_hermitian_residual = report.chi_hermitian_residual.max(chi.hermitian_residual());
        report.xi_offdiagonal_residual = report.xi_offdiagonal_residual.max(xi.max_offdiagonal());
        report.xi_diagonal_residual = report.xi_diagonal_residual.max(diag_dev);
    }
    report
}

/// `max|∫D(P)WQ* - ∫PW D(Q)*|`, both sides through exact moments.
pub fn symmetry_bilinear_check(p: &WeightParams, lhs: &MatrixPolynomial, rhs: &MatrixPolynomial) -> Result<f64> {
    type E = ExtendedComplex;
    let d = build_operator::<E>(p);
    let moments = WeightMoments::<E>::new(p);
    let pe = MatrixPolynomial::<E>::from_c64(lhs);
    let qe = MatrixPolynomial::<E>::from_c64(rhs);
    let dp = apply_operator(&d, &pe)?;
    let dq = apply_operator(&d, &qe)?;
    let left = moments.integrate(&dp, &qe);
    let right = moments.integrate(&pe, &dq);
    Ok(left.to_c64().max_abs_diff(&right.to_c64()))
}

/// Pointwise residual of `D(P) - ΛP` relative to the coefficient scale of `P`.
pub fn eigen_residual<S: Scalar>(d: &DifferentialOperator<S>, lambda: &Matrix<S>, p: &MatrixPolynomial<S>) -> Result<f64> {
    let lhs = apply_operator(d, p)?;
    let rhs = p.left_mul(lambda);
    Ok(lhs.max_abs_diff(&rhs) / p.max_coeff_abs().max(1.0))
}

/// `ComplexMatrix` convenience wrapper around [`eigenvalue_matrix`].
pub fn eigenvalue_matrix_c64(p: &WeightParams, n: usize) -> ComplexMatrix {
    eigenvalue_matrix::<Complex64>(p, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid() -> Vec<f64> {
        (0..11).map(|i| -3.0 + 0.6 * i as f64).collect()
    }

    #[test]
    fn two_by_two_operator_display() {
        let a = c(0.6, 1.1);
        let b = 2.5;
        let p = WeightParams::new(2, vec![a], b).unwrap();
        let d = build_operator::<Complex64>(&p);
        let t = 1.3;
        let f2 = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), a * (b - 1.0) * t], vec![c(0.0, 0.0), c(b, 0.0)]]).unwrap();
        let f1 = ComplexMatrix::from_rows(&[vec![c(-2.0 * b * t, 0.0), a * 2.0 * b], vec![c(0.0, 0.0), c(-2.0 * b * t, 0.0)]]).unwrap();
        let f0 = ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(2.0 * b, 0.0)]);
        assert!(d.f2.eval(t).max_abs_diff(&f2) < 1e-15);
        assert!(d.f1.eval(t).max_abs_diff(&f1) < 1e-14);
        assert_eq!(d.f0.eval(t), f0);
    }

    #[test]
    fn tiny_parameter_limit() {
        let p = WeightParams::new(2, vec![c(1e-12, 0.0)], 3.0).unwrap();
        let d = build_operator::<Complex64>(&p);
        let t = 0.5;
        assert!(d.f2.eval(t).max_abs_diff(&ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(3.0, 0.0)])) < 1e-11);
        assert!(d.f1.eval(t).max_abs_diff(&ComplexMatrix::identity(2).scale(c(-6.0 * t, 0.0))) < 1e-11);
        assert!(d.f0.eval(t).max_abs_diff(&ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(6.0, 0.0)])) < 1e-11);
    }

    #[test]
    fn three_by_three_constant_term() {
        let p = WeightParams::new(3, vec![c(1.0, 0.0); 2], 2.0).unwrap();
        let d = build_operator::<Complex64>(&p);
        let expected = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(1.5, 0.0), c(2.0, 0.0)]);
        assert_eq!(d.f2.coeff(0), expected);
    }

    #[test]
    fn apply_to_identity_and_linear() {
        let p = WeightParams::new(2, vec![c(1.0, 0.0)], 2.0).unwrap();
        let d = build_operator::<Complex64>(&p);
        let id = MatrixPolynomial::identity(2);
        assert_eq!(apply_operator(&d, &id).unwrap().max_abs_diff(&d.f0), 0.0);
        let tp = MatrixPolynomial::monomial(ComplexMatrix::identity(2), 1);
        let expected = d.f1.add(&d.f0.shift(1));
        assert!(apply_operator(&d, &tp).unwrap().max_abs_diff(&expected) < 1e-15);
        assert!(apply_operator(&d, &MatrixPolynomial::identity(3)).is_err());
    }

    #[test]
    fn two_by_two_eigenvalues() {
        let b = 1.7;
        let p = WeightParams::new(2, vec![c(0.4, -2.0)], b).unwrap();
        for n in 0..6 {
            let l = eigenvalue_matrix_c64(&p, n);
            let nf = n as f64;
            let expected = ComplexMatrix::from_diagonal(&[c(-2.0 * b * nf, 0.0), c(-2.0 * b * (nf - 1.0), 0.0)]);
            assert!(l.max_abs_diff(&expected) < 1e-14);
        }
        let d = build_operator::<Complex64>(&p);
        assert_eq!(eigenvalue_matrix_c64(&p, 0), d.f0.coeff(0));
    }

    #[test]
    fn monic_degree_one_eigen_equation() {
        // P̂₁ = tI - B̂₀ with B̂₀ = [[0, a/2],[2ā√b/(γ₀γ₁)·b, 0]]
        let a = c(1.0, 0.0);
        let b = 2.0;
        let p = WeightParams::new(2, vec![a], b).unwrap();
        let g1 = 2.0 + b.sqrt();
        let b0 = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), a / 2.0],
            vec![a.conj() * 2.0 * b * b.powf(-0.5) / (2.0 * g1), c(0.0, 0.0)],
        ])
        .unwrap();
        let p1 = MatrixPolynomial::new(2, vec![-&b0, ComplexMatrix::identity(2)]).unwrap();
        let d = build_operator::<Complex64>(&p);
        let lambda = ComplexMatrix::from_diagonal(&[c(-2.0 * b, 0.0), c(0.0, 0.0)]);
        assert!(eigen_residual(&d, &lambda, &p1).unwrap() < 1e-14);
    }

    #[test]
    fn symmetry_equations_two_by_two() {
        let p = WeightParams::new(2, vec![c(1.0, 0.0)], 2.0).unwrap();
        let r = check_symmetry_equations(&p, &grid());
        assert!(r.max_pointwise() < 1e-10, "{r:?}");
        assert!(r.boundary_decay_ok);
    }

    #[test]
    fn symmetry_equations_diagonal_case_exact() {
        let p = WeightParams::new_allowing_zero_a(3, vec![c(0.0, 0.0); 2], 2.0).unwrap();
        let r = check_symmetry_equations(&p, &grid());
        assert_eq!(r.residual_ccp, 0.0);
        assert_eq!(r.chi_hermitian_residual, 0.0);
    }

    #[test]
    fn symmetry_equations_size_five() {
        let a = vec![c(0.3, 1.1), c(-1.2, 0.4), c(0.9, 0.0), c(0.5, -0.7)];
        let p = WeightParams::new(5, a, 0.5).unwrap();
        let r = check_symmetry_equations(&p, &grid());
        assert!(r.max_pointwise() < 1e-9, "{r:?}");
        assert!(r.chi_hermitian_residual < 1e-9, "{r:?}");
        assert!(r.xi_offdiagonal_residual < 1e-9 && r.xi_diagonal_residual < 1e-9, "{r:?}");
    }

    #[test]
    fn xi_at_origin_and_two_by_two_point() {
        let p = WeightParams::new(4, vec![c(1.0, 0.5), c(-0.3, 0.0), c(2.0, -1.0)], 3.5).unwrap();
        let r = check_chi_xi(&p, &[0.0]);
        assert!(r.xi_offdiagonal_residual < 1e-12 && r.xi_diagonal_residual < 1e-12, "{r:?}");

        let p = WeightParams::new(2, vec![c(1.0, 0.0)], 3.0).unwrap();
        let r = check_chi_xi(&p, &[1.2]);
        assert!(r.xi_offdiagonal_residual < 1e-12 && r.xi_diagonal_residual < 1e-12, "{r:?}");
    }

    #[test]
    fn bilinear_symmetry_small_cases() {
        let p = WeightParams::new(2, vec![c(1.0, 0.0)], 2.0).unwrap();
        let id = MatrixPolynomial::identity(2);
        let tp = MatrixPolynomial::monomial(ComplexMatrix::identity(2), 1);
        assert!(symmetry_bilinear_check(&p, &id, &id).unwrap() < 1e-10);
        assert!(symmetry_bilinear_check(&p, &id, &tp).unwrap() < 1e-10);
    }
}
