//! Monic orthogonal matrix polynomials from exact moments, their three-term
//! recurrences and the orthonormal gauge.
//!
//! `P̂_n` is built by block Gram–Schmidt: start from `t·P̂_{n-1}` and remove
//! its components along `P̂_0..P̂_{n-1}` under `⟨P, Q⟩ = ∫ P W Q*`, twice.
//! Entries of `‖P̂_n‖²` grow like `n!·b^{±n}`, and double precision loses
//! about eight digits by `n = 15`, so the default scalar is
//! [`ExtendedComplex`]. Results are rounded to `Complex64` on output.
//!
//! Conditioning is monitored through `κ_n = ‖⟨tP̂_{n-1}, tP̂_{n-1}⟩‖₁·‖‖P̂_n‖⁻²‖₁`,
//! the factor by which rounding in the projection is magnified. The
//! sequence is truncated when `κ_n`, expressed in double-precision units
//! (`κ_n · ε_work / ε_f64`), exceeds [`CONDITION_LIMIT`], or when a norm
//! matrix fails to be positive definite.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::{WeightMoments, WeightParams};
use crate::linalg::{ComplexMatrix, Matrix, MatrixPolynomial};
use crate::scalar::{ExtendedComplex, Scalar};

pub const DEFAULT_NMAX: usize = 25;
pub const CONDITION_LIMIT: f64 = 1e12;

/// Why a sequence stopped before the requested degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Truncation {
    /// First degree that could not be produced.
    pub n: usize,
    pub reason: Error,
}

#[derive(Clone, Debug)]
pub struct MonicSequence<S = ExtendedComplex> {
    params: WeightParams,
    requested: usize,
    polys: Vec<MatrixPolynomial<S>>,
    norms: Vec<Matrix<S>>,
    conditions: Vec<f64>,
    truncation: Option<Truncation>,
}

impl<S: Scalar> MonicSequence<S> {
    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn requested(&self) -> usize {
        self.requested
    }

    /// Number of polynomials produced (`P̂_0..P̂_{len-1}`).
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn polys(&self) -> &[MatrixPolynomial<S>] {
        &self.polys
    }

    /// `‖P̂_n‖² = ∫ P̂_n W P̂_n*`.
    pub fn norms(&self) -> &[Matrix<S>] {
        &self.norms
    }

    /// `κ_n` per degree (`κ_0` is the condition number of the zeroth moment).
    pub fn conditions(&self) -> &[f64] {
        &self.conditions
    }

    pub fn truncation(&self) -> Option<&Truncation> {
        self.truncation.as_ref()
    }

    pub fn poly_c64(&self, n: usize) -> MatrixPolynomial {
        self.polys[n].to_c64()
    }

    pub fn norm_c64(&self, n: usize) -> ComplexMatrix {
        self.norms[n].to_c64()
    }
}

/// `P̂_0..P̂_nmax` in extended precision.
pub fn monic_sequence(p: &WeightParams, nmax: usize) -> MonicSequence<ExtendedComplex> {
    monic_sequence_in::<ExtendedComplex>(p, nmax)
}

/// `P̂_0..P̂_nmax` in the scalar type `S`.
pub fn monic_sequence_in<S: Scalar>(p: &WeightParams, nmax: usize) -> MonicSequence<S> {
    let table = WeightMoments::<S>::new(p);
    let moments: Vec<Matrix<S>> = (0..=2 * nmax + 2).map(|m| table.moment(m)).collect();
    let dim = p.size();
    let units = S::epsilon() / (f64::EPSILON / 2.0);

    // ⟨Q, P⟩ = Σ_i Q_i V_i with V_i = Σ_j M_{i+j} P_j*
    let transform = |poly: &MatrixPolynomial<S>| -> Vec<Matrix<S>> {
        (0..=nmax + 1)
            .map(|i| {
                poly.coeffs()
                    .iter()
                    .enumerate()
                    .fold(Matrix::zeros(dim), |acc, (j, c)| &acc + &(&moments[i + j] * &c.adjoint()))
            })
            .collect()
    };
    let pair = |q: &MatrixPolynomial<S>, v: &[Matrix<S>]| -> Matrix<S> {
        q.coeffs()
            .iter()
            .enumerate()
            .fold(Matrix::zeros(dim), |acc, (i, c)| &acc + &(c * &v[i]))
    };

    let mut seq = MonicSequence {
        params: p.clone(),
        requested: nmax,
        polys: Vec::new(),
        norms: Vec::new(),
        conditions: Vec::new(),
        truncation: None,
    };
    let mut transforms: Vec<Vec<Matrix<S>>> = Vec::new();
    let mut inverses: Vec<Matrix<S>> = Vec::new();

    for n in 0..=nmax {
        let (q, start_gram) = if n == 0 {
            (MatrixPolynomial::identity(dim), moments[0].clone())
        } else {
            let start = seq.polys[n - 1].shift(1);
            let gram = pair(&start, &transform(&start));
            let mut q = start;
            for _ in 0..2 {
                for k in 0..n {
                    let coef = &pair(&q, &transforms[k]) * &inverses[k];
                    q = q.sub(&seq.polys[k].left_mul(&coef));
                }
            }
            // drop rounding residue above the leading degree
            let mut coeffs = q.into_coeffs();
            coeffs.truncate(n + 1);
            coeffs[n] = Matrix::identity(dim);
            (MatrixPolynomial::new(dim, coeffs).expect("square"), gram)
        };
        let v = transform(&q);
        let raw = pair(&q, &v);
        let h = (&raw + &raw.adjoint()).scale(S::from_f64(0.5));

        if let Err(reason) = h.upper_cholesky() {
            seq.truncation = Some(Truncation { n, reason });
            break;
        }
        let inv = match h.inverse() {
            Ok(inv) => inv,
            Err(reason) => {
                seq.truncation = Some(Truncation { n, reason });
                break;
            }
        };
        let condition = start_gram.norm_one() * inv.norm_one();
        if condition * units > CONDITION_LIMIT {
            seq.truncation = Some(Truncation {
                n,
                reason: Error::IllConditioned { n, condition },
            });
            break;
        }
        seq.polys.push(q);
        seq.norms.push(h);
        seq.conditions.push(condition);
        transforms.push(v);
        inverses.push(inv);
    }
    seq
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecurrenceKind {
    /// `t𝒫_n = A_{n+1}𝒫_{n+1} + B_n𝒫_n + A_n*𝒫_{n-1}`
    Orthonormal,
    /// `tP̂_n = P̂_{n+1} + B̂_nP̂_n + Ĉ_nP̂_{n-1}`
    Monic,
    /// `tP_n = Ã_{n+1}P_{n+1} + B̃_nP_n + C̃_nP_{n-1}` for the Rodrigues sequence
    RodriguesNormalized,
}

impl RecurrenceKind {
    pub fn name(self) -> &'static str {
        match self {
            RecurrenceKind::Orthonormal => "orthonormal",
            RecurrenceKind::Monic => "monic",
            RecurrenceKind::RodriguesNormalized => "rodrigues-normalized",
        }
    }
}

/// `tQ_n = A_{n+1}Q_{n+1} + B_nQ_n + C_nQ_{n-1}`.
///
/// With `L` polynomials available, `a` and `c` hold `n = 0..L-1` and `b`
/// holds `n = 0..L-2`. `a[0]` and `c[0]` are placeholders (identity for the
/// monic kind, zero otherwise). `residuals[n]` is the coefficient residual of
/// the identity at degree `n`, relative to `max(1, max|coeff of tQ_n|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceTable {
    pub kind: RecurrenceKind,
    pub a: Vec<ComplexMatrix>,
    pub b: Vec<ComplexMatrix>,
    pub c: Vec<ComplexMatrix>,
    pub residuals: Vec<f64>,
}

impl RecurrenceTable {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Coefficient residuals of `tQ_n - A_{n+1}Q_{n+1} - B_nQ_n - C_nQ_{n-1}`.
pub fn recurrence_residuals<S: Scalar>(
    a: &[Matrix<S>],
    b: &[Matrix<S>],
    c: &[Matrix<S>],
    polys: &[MatrixPolynomial<S>],
) -> Vec<f64> {
    (0..b.len())
        .map(|n| {
            let lhs = polys[n].shift(1);
            let mut rhs = polys[n + 1].left_mul(&a[n + 1]).add(&polys[n].left_mul(&b[n]));
            if n > 0 {
                rhs = rhs.add(&polys[n - 1].left_mul(&c[n]));
            }
            lhs.max_abs_diff(&rhs) / lhs.max_coeff_abs().max(1.0)
        })
        .collect()
}

fn require_two<S>(polys: &[S]) -> Result<()> {
    if polys.len() < 2 {
        return Err(Error::SequenceTooShort(format!(
            "need at least two polynomials, have {}",
            polys.len()
        )));
    }
    Ok(())
}

/// Monic recurrence: `B̂_n = coeff_{n-1}(P̂_n) - coeff_n(P̂_{n+1})`,
/// `Ĉ_n = ‖P̂_n‖²(‖P̂_{n-1}‖²)⁻¹`.
pub fn recurrence_from_sequence<S: Scalar>(s: &MonicSequence<S>) -> Result<RecurrenceTable> {
    let (a, b, c) = monic_coefficients(s)?;
    let residuals = recurrence_residuals(&a, &b, &c, s.polys());
    Ok(RecurrenceTable {
        kind: RecurrenceKind::Monic,
        a: a.iter().map(Matrix::to_c64).collect(),
        b: b.iter().map(Matrix::to_c64).collect(),
        c: c.iter().map(Matrix::to_c64).collect(),
        residuals,
    })
}

type Coefficients<S> = (Vec<Matrix<S>>, Vec<Matrix<S>>, Vec<Matrix<S>>);

fn monic_coefficients<S: Scalar>(s: &MonicSequence<S>) -> Result<Coefficients<S>> {
    require_two(s.polys())?;
    let len = s.len();
    let dim = s.params.size();
    let a = vec![Matrix::identity(dim); len];
    let b = (0..len - 1)
        .map(|n| {
            let below = if n == 0 {
                Matrix::zeros(dim)
            } else {
                s.polys[n].coeff(n - 1)
            };
            &below - &s.polys[n + 1].coeff(n)
        })
        .collect();
    let mut c = vec![Matrix::zeros(dim)];
    for n in 1..len {
        c.push(&s.norms[n] * &s.norms[n - 1].inverse()?);
    }
    Ok((a, b, c))
}

/// Orthonormal gauge `𝒫_n = Δ_n P̂_n` and its recurrence.
#[derive(Clone, Debug, PartialEq)]
pub struct Orthonormalization {
    /// `Δ_n = U_n⁻¹` with `‖P̂_n‖² = U_n U_n*`, `U_n` upper triangular with positive diagonal.
    pub deltas: Vec<ComplexMatrix>,
    pub table: RecurrenceTable,
    /// `max|B_n - B_n*|`
    pub hermitian_residual: f64,
    /// `max|Δ_nĈ_nΔ_{n-1}⁻¹ - A_n*|`
    pub c_consistency: f64,
}

pub fn orthonormalize_sequence<S: Scalar>(s: &MonicSequence<S>) -> Result<Orthonormalization> {
    let (_, b_hat, c_hat) = monic_coefficients(s)?;
    let len = s.len();
    let dim = s.params.size();
    let mut deltas = Vec::with_capacity(len);
    let mut delta_inv = Vec::with_capacity(len);
    for h in &s.norms {
        let u = h.upper_cholesky()?;
        deltas.push(u.inverse()?);
        delta_inv.push(u);
    }
    let mut a = vec![Matrix::zeros(dim)];
    for n in 1..len {
        a.push(&deltas[n - 1] * &delta_inv[n]);
    }
    let b: Vec<Matrix<S>> = (0..len - 1)
        .map(|n| &(&deltas[n] * &b_hat[n]) * &delta_inv[n])
        .collect();
    let mut c = vec![Matrix::zeros(dim)];
    let mut c_consistency: f64 = 0.0;
    for n in 1..len {
        let adj = a[n].adjoint();
        let direct = &(&deltas[n] * &c_hat[n]) * &delta_inv[n - 1];
        c_consistency = c_consistency.max(direct.max_abs_diff(&adj));
        c.push(adj);
    }
    let hermitian_residual = b.iter().map(Matrix::hermitian_residual).fold(0.0, f64::max);
    let ortho: Vec<MatrixPolynomial<S>> = s
        .polys
        .iter()
        .zip(&deltas)
        .map(|(p, d)| p.left_mul(d))
        .collect();
    let residuals = recurrence_residuals(&a, &b, &c, &ortho);
    Ok(Orthonormalization {
        deltas: deltas.iter().map(Matrix::to_c64).collect(),
        table: RecurrenceTable {
            kind: RecurrenceKind::Orthonormal,
            a: a.iter().map(Matrix::to_c64).collect(),
            b: b.iter().map(Matrix::to_c64).collect(),
            c: c.iter().map(Matrix::to_c64).collect(),
            residuals,
        },
        hermitian_residual,
        c_consistency,
    })
}

/// Recurrence of `Q_n = K_n P̂_n` for given nonsingular leading coefficients `K_n`:
/// `A_{n+1} = K_nK_{n+1}⁻¹`, `B_n = K_nB̂_nK_n⁻¹`, `C_n = K_nĈ_nK_{n-1}⁻¹`.
pub fn rescaled_recurrence<S: Scalar>(
    s: &MonicSequence<S>,
    leading: &[Matrix<S>],
    kind: RecurrenceKind,
) -> Result<RecurrenceTable> {
    let (_, b_hat, c_hat) = monic_coefficients(s)?;
    let len = s.len();
    if leading.len() < len {
        return Err(Error::SequenceTooShort(format!(
            "need {len} leading coefficients, have {}",
            leading.len()
        )));
    }
    let dim = s.params.size();
    let inv: Vec<Matrix<S>> = leading[..len].iter().map(Matrix::inverse).collect::<Result<_>>()?;
    let mut a = vec![Matrix::zeros(dim)];
    let mut c = vec![Matrix::zeros(dim)];
    for n in 1..len {
        a.push(&leading[n - 1] * &inv[n]);
        c.push(&(&leading[n] * &c_hat[n]) * &inv[n - 1]);
    }
    let b: Vec<Matrix<S>> = (0..len - 1)
        .map(|n| &(&leading[n] * &b_hat[n]) * &inv[n])
        .collect();
    let polys: Vec<MatrixPolynomial<S>> = s
        .polys
        .iter()
        .zip(leading)
        .map(|(p, k)| p.left_mul(k))
        .collect();
    let residuals = recurrence_residuals(&a, &b, &c, &polys);
    Ok(RecurrenceTable {
        kind,
        a: a.iter().map(Matrix::to_c64).collect(),
        b: b.iter().map(Matrix::to_c64).collect(),
        c: c.iter().map(Matrix::to_c64).collect(),
        residuals,
    })
}

/// `max_{m<n} |∫P̂_n W P̂_m*|` relative to `max(1, max_n |‖P̂_n‖²|)`.
pub fn orthogonality_residual<S: Scalar>(s: &MonicSequence<S>) -> f64 {
    let table = WeightMoments::<S>::new(&s.params);
    let scale = s.norms.iter().map(Matrix::max_abs).fold(1.0, f64::max);
    let mut worst: f64 = 0.0;
    for n in 0..s.len() {
        for m in 0..n {
            worst = worst.max(table.integrate(&s.polys[n], &s.polys[m]).max_abs());
        }
    }
    worst / scale
}

/// Convenience: the sequence as double-precision polynomials.
pub fn polys_c64<S: Scalar>(s: &MonicSequence<S>) -> Vec<MatrixPolynomial<Complex64>> {
    s.polys.iter().map(MatrixPolynomial::to_c64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::weight_moment;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degree_zero_is_identity_with_zeroth_moment() {
        let p = WeightParams::new(3, vec![c(1.0, 0.2), c(-0.5, 0.0)], 1.5).unwrap();
        let s = monic_sequence(&p, 3);
        assert_eq!(s.poly_c64(0), MatrixPolynomial::identity(3));
        assert!(s.norm_c64(0).max_abs_diff(&weight_moment(&p, 0)) < 1e-15);
    }

    #[test]
    fn zeroth_norm_for_b_four() {
        let p = WeightParams::new(2, vec![c(1.0, 0.0)], 4.0).unwrap();
        let s = monic_sequence(&p, 0);
        let expected = ComplexMatrix::identity(2).scale(c(PI.sqrt(), 0.0));
        assert!(s.norm_c64(0).max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn polynomials_are_monic_and_orthogonal() {
        let p = WeightParams::new(3, vec![c(0.7, -0.3), c(1.2, 0.5)], 0.6).unwrap();
        let s = monic_sequence(&p, 8);
        assert_eq!(s.len(), 9);
        assert!(s.truncation().is_none());
        for (n, poly) in s.polys().iter().enumerate() {
            assert_eq!(poly.degree(), n as isize);
            assert_eq!(poly.coeff(n).to_c64(), ComplexMatrix::identity(3));
            assert!(s.norms()[n].to_c64().hermitian_residual() < 1e-12);
            assert!(s.norms()[n].is_positive_definite());
        }
        assert!(orthogonality_residual(&s) < 1e-25);
    }

    #[test]
    fn monic_recurrence_holds() {
        let p = WeightParams::new(2, vec![c(1.0, 1.0)], 0.5).unwrap();
        let s = monic_sequence(&p, 10);
        let table = recurrence_from_sequence(&s).unwrap();
        assert_eq!(table.b.len(), 10);
        assert_eq!(table.a.len(), 11);
        assert!(table.max_residual() < 1e-25);
    }

    #[test]
    fn diagonal_weight_has_zero_b_hat() {
        let p = WeightParams::new_allowing_zero_a(2, vec![c(0.0, 0.0)], 2.0).unwrap();
        let table = recurrence_from_sequence(&monic_sequence(&p, 6)).unwrap();
        for b in &table.b {
            assert!(b.max_abs() < 1e-25);
        }
    }

    #[test]
    fn orthonormal_gauge_is_consistent() {
        let p = WeightParams::new(3, vec![c(0.4, 0.9), c(-1.1, 0.0)], 3.0).unwrap();
        let s = monic_sequence(&p, 8);
        let o = orthonormalize_sequence(&s).unwrap();
        assert!(o.hermitian_residual < 1e-12, "{}", o.hermitian_residual);
        assert!(o.c_consistency < 1e-12, "{}", o.c_consistency);
        assert!(o.table.max_residual() < 1e-12);
        for a in &o.table.a[1..] {
            assert!(a.inverse().is_ok());
        }
    }

    #[test]
    fn short_sequences_are_rejected() {
        let p = WeightParams::new(2, vec![c(1.0, 0.0)], 2.0).unwrap();
        let s = monic_sequence(&p, 0);
        assert!(matches!(recurrence_from_sequence(&s), Err(Error::SequenceTooShort(_))));
    }

    #[test]
    fn double_precision_guard_truncates() {
        let p = WeightParams::new(2, vec![c(1.0, 0.0)], 4.0).unwrap();
        let s = monic_sequence_in::<Complex64>(&p, 40);
        let t = s.truncation().expect("double precision cannot reach degree 40");
        assert!(t.n < 40);
        assert_eq!(s.len(), t.n);
    }
}
