//! Exponentials of nilpotent matrices and iterated commutators.

use super::matrix::Matrix;
use super::poly::MatrixPolynomial;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `e^{Mt}` for nilpotent `M`, returned as the terminating series
/// `Σ_{k<N} M^k t^k / k!`.
///
/// `M^N` is formed explicitly and must satisfy
/// `max|M^N| < 1e-14 · max(1, max|M|^N)`.
pub fn nilpotent_exp<S: Scalar>(m: &Matrix<S>) -> Result<MatrixPolynomial<S>> {
    let n = m.dim();
    let mut coeffs = Vec::with_capacity(n);
    let mut power = Matrix::identity(n);
    let mut factorial = S::one();
    for k in 0..n {
        if k > 0 {
            power = &power * m;
            factorial *= S::from_usize(k);
        }
        coeffs.push(power.scale(S::one() / factorial));
    }
    let top = &power * m;
    let bound = 1e-14 * m.max_abs().powi(n as i32).max(1.0);
    let residual = top.max_abs();
    if residual >= bound {
        return Err(Error::NotNilpotent { residual });
    }
    Ok(MatrixPolynomial::new(n, coeffs)?.trimmed())
}

/// Iterated commutator `ad_X^n Y`: `ad⁰ = Y`, `ad^{k+1} = [X, ad^k]`.
pub fn ad_power<S: Scalar>(x: &Matrix<S>, y: &Matrix<S>, n: usize) -> Result<Matrix<S>> {
    x.check_dim(y)?;
    Ok((0..n).fold(y.clone(), |acc, _| x.commutator(&acc)))
}
