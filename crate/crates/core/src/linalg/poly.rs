use num_complex::Complex64;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Polynomial in a real variable `t` with square matrix coefficients;
/// `coeffs[k]` multiplies `t^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial<S = Complex64> {
    dim: usize,
    coeffs: Vec<Matrix<S>>,
}

impl<S: Scalar> MatrixPolynomial<S> {
    pub fn new(dim: usize, coeffs: Vec<Matrix<S>>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(MatrixPolynomial { dim, coeffs })
    }

    pub fn zero(dim: usize) -> Self {
        MatrixPolynomial {
            dim,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(m: Matrix<S>) -> Self {
        MatrixPolynomial {
            dim: m.dim(),
            coeffs: vec![m],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::constant(Matrix::identity(dim))
    }

    /// `m · t^k`.
    pub fn monomial(m: Matrix<S>, k: usize) -> Self {
        let dim = m.dim();
        let mut coeffs = vec![Matrix::zeros(dim); k];
        coeffs.push(m);
        MatrixPolynomial { dim, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[Matrix<S>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Matrix<S>> {
        self.coeffs
    }

    /// Coefficient of `t^k`; zero beyond the stored length.
    pub fn coeff(&self, k: usize) -> Matrix<S> {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.dim))
    }

    /// Highest index with a nonzero coefficient, `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs
            .iter()
            .rposition(|c| c.max_abs() > 0.0)
            .map_or(-1, |k| k as isize)
    }

    pub fn leading_coefficient(&self) -> Option<&Matrix<S>> {
        let d = self.degree();
        (d >= 0).then(|| &self.coeffs[d as usize])
    }

    /// Drops trailing exactly-zero coefficients.
    pub fn trimmed(mut self) -> Self {
        let keep = (self.degree() + 1) as usize;
        self.coeffs.truncate(keep);
        self
    }

    /// Horner evaluation at a real point.
    pub fn eval(&self, t: f64) -> Matrix<S> {
        let ts = S::from_f64(t);
        self.coeffs
            .iter()
            .rev()
            .fold(Matrix::zeros(self.dim), |acc, c| &acc.scale(ts) + c)
    }

    /// Coefficient-wise derivative of the given order.
    pub fn derivative(&self, order: usize) -> Self {
        if order == 0 {
            return self.clone();
        }
        if self.coeffs.len() <= order {
            return Self::zero(self.dim);
        }
        let coeffs = (order..self.coeffs.len())
            .map(|k| {
                let falling: f64 = (k + 1 - order..=k).map(|j| j as f64).product();
                self.coeffs[k].scale(S::from_f64(falling))
            })
            .collect();
        MatrixPolynomial {
            dim: self.dim,
            coeffs,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Matrix<S>, &Matrix<S>) -> Matrix<S>) -> Self {
        assert_eq!(self.dim, other.dim, "polynomial dimension mismatch");
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|k| f(&self.coeff(k), &other.coeff(k))).collect();
        MatrixPolynomial {
            dim: self.dim,
            coeffs,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "polynomial dimension mismatch");
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero(self.dim);
        }
        let mut coeffs = vec![Matrix::zeros(self.dim); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        MatrixPolynomial {
            dim: self.dim,
            coeffs,
        }
    }

    pub fn scale(&self, s: S) -> Self {
        self.map_coeffs(|c| c.scale(s))
    }

    /// `M · P(t)`.
    pub fn left_mul(&self, m: &Matrix<S>) -> Self {
        self.map_coeffs(|c| m * c)
    }

    /// `P(t) · M`.
    pub fn right_mul(&self, m: &Matrix<S>) -> Self {
        self.map_coeffs(|c| c * m)
    }

    /// `t^k · P(t)`.
    pub fn shift(&self, k: usize) -> Self {
        let mut coeffs = vec![Matrix::zeros(self.dim); k];
        coeffs.extend(self.coeffs.iter().cloned());
        MatrixPolynomial {
            dim: self.dim,
            coeffs,
        }
    }

    /// `P(t)*` for real `t`: conjugate transpose of each coefficient.
    pub fn adjoint(&self) -> Self {
        self.map_coeffs(Matrix::adjoint)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Matrix<S>) -> Matrix<S>) -> Self {
        MatrixPolynomial {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().map(Matrix::max_abs).fold(0.0, f64::max)
    }

    /// Largest coefficient-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len)
            .map(|k| self.coeff(k).max_abs_diff(&other.coeff(k)))
            .fold(0.0, f64::max)
    }

    /// Coefficient-wise difference scaled by `max(1, max|coeffs of other|)`.
    pub fn relative_diff(&self, reference: &Self) -> f64 {
        self.max_abs_diff(reference) / reference.max_coeff_abs().max(1.0)
    }

    pub fn to_c64(&self) -> MatrixPolynomial<Complex64> {
        MatrixPolynomial {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(Matrix::to_c64).collect(),
        }
    }

    pub fn from_c64(p: &MatrixPolynomial<Complex64>) -> Self {
        MatrixPolynomial {
            dim: p.dim,
            coeffs: p.coeffs.iter().map(Matrix::from_c64).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn constant_identity_evaluates_to_identity() {
        let p = MatrixPolynomial::identity(3);
        assert_eq!(p.eval(3.5), ComplexMatrix::identity(3));
    }

    #[test]
    fn linear_identity_scales() {
        let p = MatrixPolynomial::new(2, vec![ComplexMatrix::zeros(2), ComplexMatrix::identity(2)]).unwrap();
        assert_eq!(p.eval(2.0), diag(&[2.0, 2.0]));
    }

    #[test]
    fn derivative_of_constant_is_zero_polynomial() {
        let p = MatrixPolynomial::constant(diag(&[1.0, 2.0]));
        let d = p.derivative(1);
        assert_eq!(d.degree(), -1);
    }

    #[test]
    fn first_derivative_power_rule() {
        let (c0, c1, c2) = (diag(&[1.0, 0.0]), diag(&[2.0, 3.0]), diag(&[-1.0, 5.0]));
        let p = MatrixPolynomial::new(2, vec![c0, c1.clone(), c2.clone()]).unwrap();
        let d = p.derivative(1);
        assert_eq!(d.coeffs(), &[c1, c2.scale(Complex64::new(2.0, 0.0))]);
    }

    #[test]
    fn second_derivative_of_t_squared() {
        let p = MatrixPolynomial::monomial(ComplexMatrix::identity(2), 2);
        let d = p.derivative(2);
        assert_eq!(d.coeffs(), &[diag(&[2.0, 2.0])]);
        assert_eq!(p.derivative(3).degree(), -1);
    }

    #[test]
    fn product_evaluates_pointwise() {
        let a = MatrixPolynomial::new(
            2,
            vec![
                ComplexMatrix::from_rows(&[vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)], vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]]).unwrap(),
                diag(&[1.0, -1.0]),
            ],
        )
        .unwrap();
        let b = a.adjoint().shift(1);
        let t = 0.7;
        let lhs = a.mul(&b).eval(t);
        let rhs = &a.eval(t) * &b.eval(t);
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
    }

    #[test]
    fn degree_ignores_trailing_zeros() {
        let p = MatrixPolynomial::new(2, vec![diag(&[1.0, 1.0]), ComplexMatrix::zeros(2)]).unwrap();
        assert_eq!(p.degree(), 0);
        assert_eq!(p.trimmed().coeffs().len(), 1);
        assert_eq!(MatrixPolynomial::<Complex64>::zero(2).degree(), -1);
    }
}
