//! Closed forms for the 2×2 family (`W` with parameters `a`, `b`).
//!
//! With `γ_n = 2 + |a|² b^{n-1/2} n` and physicists' Hermite polynomials `H_n`:
//!
//! ```text
//! P_n = [[ b^{-n/2}H_n(√b t),          -a t b^{-n/2}H_n(√b t) + (a/2)H_{n+1}(t)  ],
//!        [ -2ā b^{n/2} n H_{n-1}(√b t),  2|a|² b^{n/2} n t H_{n-1}(√b t) + 2H_n(t) ]]
//! ```
//!
//! has leading coefficient `Γ_n = 2^n diag(1, γ_n)` and equals
//! `R_n^{(n)} W⁻¹` for the Gaussian–Erf matrix `R_n`. Orthonormal
//! polynomials are `𝒫_n = Δ_n P̂_n` with `P̂_n = Γ_n⁻¹P_n` and `P_n = G_n𝒫_n`.
//!
//! Quantities involving `n!`, `2^n` or `b^n` switch to logarithms for `n > 30`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::family::{two_by_two_scales, weight_inverse_function_matrix, WeightParams};
use crate::linalg::{ComplexMatrix, GaussErfAtom, GaussErfFunction, GaussErfFunctionMatrix, MatrixPolynomial};
use crate::operator::{build_operator, eigenvalue_matrix_c64};

const LOG_SPACE_FROM: usize = 30;

/// Relative tolerance for the cancellation of non-polynomial atoms in `R_n^{(n)}W⁻¹`.
pub const CANCELLATION_TOLERANCE: f64 = 1e-9;

fn require_two(p: &WeightParams) -> Result<()> {
    if p.size() != 2 {
        return Err(Error::RequiresSizeTwo(p.size()));
    }
    Ok(())
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn diag(x: f64, y: f64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[re(x), re(y)])
}

fn off_diag(upper: Complex64, lower: Complex64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 1)] = upper;
    m[(1, 0)] = lower;
    m
}

/// `H_n(x)` by `H_{k+1} = 2xH_k - 2kH_{k-1}`.
pub fn hermite_eval(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Monomial coefficients of `H_k(s·t)` for `k = 0..=nmax`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledHermite {
    scale: f64,
    rows: Vec<Vec<f64>>,
}

impl ScaledHermite {
    pub fn new(nmax: usize, scale: f64) -> Self {
        let mut plain: Vec<Vec<f64>> = vec![vec![1.0]];
        for k in 0..nmax {
            let mut next = vec![0.0; k + 2];
            for (i, c) in plain[k].iter().enumerate() {
                next[i + 1] += 2.0 * c;
            }
            if k > 0 {
                for (i, c) in plain[k - 1].iter().enumerate() {
                    next[i] -= 2.0 * k as f64 * c;
                }
            }
            plain.push(next);
        }
        let rows = plain
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(i, c)| c * scale.powi(i as i32))
                    .collect()
            })
            .collect();
        ScaledHermite { scale, rows }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn nmax(&self) -> usize {
        self.rows.len() - 1
    }

    /// Coefficients of `H_n(s·t)`; `H_{-1}` is taken as zero.
    pub fn coeffs(&self, n: isize) -> &[f64] {
        if n < 0 {
            &[]
        } else {
            &self.rows[n as usize]
        }
    }
}

type Scalar1d = Vec<Complex64>;

fn poly_scale(p: &[f64], s: Complex64) -> Scalar1d {
    p.iter().map(|c| s * c).collect()
}

fn poly_add(x: &[Complex64], y: &[Complex64]) -> Scalar1d {
    let len = x.len().max(y.len());
    (0..len)
        .map(|i| x.get(i).copied().unwrap_or_default() + y.get(i).copied().unwrap_or_default())
        .collect()
}

fn shift(p: &[Complex64]) -> Scalar1d {
    std::iter::once(Complex64::default()).chain(p.iter().copied()).collect()
}

fn assemble(entries: [Scalar1d; 4]) -> MatrixPolynomial {
    let len = entries.iter().map(Vec::len).max().unwrap_or(0);
    let coeffs = (0..len)
        .map(|k| ComplexMatrix::from_fn(2, |i, j| entries[2 * i + j].get(k).copied().unwrap_or_default()))
        .collect();
    MatrixPolynomial::new(2, coeffs).expect("2x2").trimmed()
}

/// Hermite tables for `H_k(√b t)` and `H_k(t)` up to `nmax + 1`.
#[derive(Clone, Debug)]
pub struct HermitePair {
    scaled: ScaledHermite,
    plain: ScaledHermite,
}

impl HermitePair {
    pub fn new(p: &WeightParams, nmax: usize) -> Self {
        HermitePair {
            scaled: ScaledHermite::new(nmax + 1, p.b().sqrt()),
            plain: ScaledHermite::new(nmax + 1, 1.0),
        }
    }
}

/// Closed-form `P_n` (with `P_0 = diag(1, 2)`).
pub fn explicit_pn(p: &WeightParams, n: usize) -> Result<MatrixPolynomial> {
    require_two(p)?;
    explicit_pn_with(p, n, &HermitePair::new(p, n))
}

/// Closed-form `P_0..P_nmax`, sharing one Hermite table.
pub fn explicit_sequence(p: &WeightParams, nmax: usize) -> Result<Vec<MatrixPolynomial>> {
    require_two(p)?;
    let tables = HermitePair::new(p, nmax);
    (0..=nmax).map(|n| explicit_pn_with(p, n, &tables)).collect()
}

fn explicit_pn_with(p: &WeightParams, n: usize, h: &HermitePair) -> Result<MatrixPolynomial> {
    let a = p.a()[0];
    let b = p.b();
    let ni = n as isize;
    let nf = n as f64;
    let hn_s = h.scaled.coeffs(ni);
    let hm_s = h.scaled.coeffs(ni - 1);
    let down = b.powf(-nf / 2.0);
    let up = b.powf(nf / 2.0);

    let e11 = poly_scale(hn_s, re(down));
    let mut e12 = poly_add(
        &shift(&poly_scale(hn_s, -a * down)),
        &poly_scale(h.plain.coeffs(ni + 1), a / 2.0),
    );
    // the degree n+1 terms cancel identically
    e12.truncate(n + 1);
    let e21 = poly_scale(hm_s, -a.conj() * 2.0 * up * nf);
    let e22 = poly_add(
        &shift(&poly_scale(hm_s, re(2.0 * a.norm_sqr() * up * nf))),
        &poly_scale(h.plain.coeffs(ni), re(2.0)),
    );
    Ok(assemble([e11, e12, e21, e22]))
}

/// `R_n` with entries
/// `(-1)^n(b^{-n}e^{-bt²} + (|a|²/2)(n+2t²)e^{-t²})`, `(-1)^n a t e^{-t²}`,
/// `(-1)^n ā(2te^{-t²} + √π n(Erf(√b t) - Erf(t)))`, `(-1)^n 2e^{-t²}`.
pub fn rodrigues_rn(p: &WeightParams, n: usize) -> Result<GaussErfFunctionMatrix> {
    require_two(p)?;
    if n == 0 {
        return Err(Error::InvalidParameter("R_n is defined for n >= 1".into()));
    }
    let a = p.a()[0];
    let b = p.b();
    let (cb, c1) = two_by_two_scales(p);
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let nf = n as f64;
    let half_a2 = a.norm_sqr() / 2.0;
    let g = GaussErfAtom::gaussian;
    let entries = [
        vec![
            (g(0, cb), re(sign * b.powi(-(n as i32)))),
            (g(0, c1), re(sign * half_a2 * nf)),
            (g(2, c1), re(sign * half_a2 * 2.0)),
        ],
        vec![(g(1, c1), a * sign)],
        vec![
            (g(1, c1), a.conj() * (2.0 * sign)),
            (GaussErfAtom::erf(0, cb), a.conj() * (sign * PI.sqrt() * nf)),
            (GaussErfAtom::erf(0, c1), a.conj() * (-sign * PI.sqrt() * nf)),
        ],
        vec![(g(0, c1), re(2.0 * sign))],
    ];
    let mut it = entries.into_iter();
    Ok(GaussErfFunctionMatrix::from_fn(2, |_, _| {
        GaussErfFunction::new(it.next().expect("four entries"))
    }))
}

/// `P_n = R_n^{(n)} W⁻¹`, with the cancellation of every Gaussian and Erf
/// atom asserted at relative [`CANCELLATION_TOLERANCE`].
pub fn rodrigues_polynomial(p: &WeightParams, n: usize) -> Result<MatrixPolynomial> {
    let derived = rodrigues_rn(p, n)?.nth_derivative(n);
    let product = derived.mul(&weight_inverse_function_matrix(p)?)?;
    product.to_matrix_polynomial(CANCELLATION_TOLERANCE)
}

fn ln_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// `ln γ_n` for `n ≥ 0`, stable for large `n`.
fn ln_gamma_seq(p: &WeightParams, n: usize) -> f64 {
    let a2 = p.a()[0].norm_sqr();
    if n == 0 || a2 == 0.0 {
        return 2f64.ln();
    }
    let l = (a2 * n as f64).ln() + (n as f64 - 0.5) * p.b().ln();
    // ln(2 + e^l)
    if l > 0.0 {
        l + (2.0 * (-l).exp()).ln_1p()
    } else {
        2f64.ln() + (l.exp() / 2.0).ln_1p()
    }
}

/// `γ_n = 2 + |a|² b^{n-1/2} n`.
pub fn gamma_seq(p: &WeightParams, n: usize) -> f64 {
    if n <= LOG_SPACE_FROM {
        2.0 + p.a()[0].norm_sqr() * p.b().powf(n as f64 - 0.5) * n as f64
    } else {
        ln_gamma_seq(p, n).exp()
    }
}

/// `γ_m/γ_n`, through logarithms when either index is large.
fn gamma_ratio(p: &WeightParams, m: usize, n: usize) -> f64 {
    if m.max(n) <= LOG_SPACE_FROM {
        gamma_seq(p, m) / gamma_seq(p, n)
    } else {
        (ln_gamma_seq(p, m) - ln_gamma_seq(p, n)).exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationFactors {
    pub n: usize,
    pub gamma_n: f64,
    /// `Γ_n = 2^n diag(1, γ_n)`
    pub gamma: ComplexMatrix,
    /// `Δ_n = √(2^n/(√π n!)) diag(√(2b^{n+1/2}/γ_{n+1}), √(γ_n/2))`
    pub delta: ComplexMatrix,
    /// `G_n = Γ_nΔ_n⁻¹`
    pub g: ComplexMatrix,
}

pub fn normalization_factors(p: &WeightParams, n: usize) -> Result<NormalizationFactors> {
    require_two(p)?;
    let b = p.b();
    let nf = n as f64;
    let gamma_n = gamma_seq(p, n);
    let (gamma, delta, g) = if n <= LOG_SPACE_FROM {
        let two_n = 2f64.powi(n as i32);
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let pre = (two_n / (PI.sqrt() * fact)).sqrt();
        let d1 = pre * (2.0 * b.powf(nf + 0.5) / gamma_seq(p, n + 1)).sqrt();
        let d2 = pre * (gamma_n / 2.0).sqrt();
        (diag(two_n, two_n * gamma_n), diag(d1, d2), diag(two_n / d1, two_n * gamma_n / d2))
    } else {
        let ln2 = 2f64.ln();
        let ln_pre = 0.5 * (nf * ln2 - 0.5 * PI.ln() - ln_factorial(n));
        let ln_d1 = ln_pre + 0.5 * (ln2 + (nf + 0.5) * b.ln() - ln_gamma_seq(p, n + 1));
        let ln_d2 = ln_pre + 0.5 * (ln_gamma_seq(p, n) - ln2);
        let ln_g1 = nf * ln2;
        let ln_g2 = nf * ln2 + ln_gamma_seq(p, n);
        (
            diag(ln_g1.exp(), ln_g2.exp()),
            diag(ln_d1.exp(), ln_d2.exp()),
            diag((ln_g1 - ln_d1).exp(), (ln_g2 - ln_d2).exp()),
        )
    };
    Ok(NormalizationFactors {
        n,
        gamma_n,
        gamma,
        delta,
        g,
    })
}

/// `A_n` (for `n ≥ 1`) and `B_n` of the orthonormal recurrence.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalCoefficients {
    pub a: Option<ComplexMatrix>,
    pub b: ComplexMatrix,
}

/// `A_n = √n diag(√(γ_{n+1}/(2bγ_n)), √(γ_{n-1}/(2γ_n)))`,
/// `B_n = (b^{(2n-3)/4}(b+(b-1)n)/√(γ_nγ_{n+1})) [[0, a], [ā, 0]]`.
pub fn orthonormal_recurrence(p: &WeightParams, n: usize) -> Result<OrthonormalCoefficients> {
    require_two(p)?;
    let b = p.b();
    let a = p.a()[0];
    let nf = n as f64;
    let a_n = (n >= 1).then(|| {
        diag(
            (nf * gamma_ratio(p, n + 1, n) / (2.0 * b)).sqrt(),
            (nf * gamma_ratio(p, n - 1, n) / 2.0).sqrt(),
        )
    });
    let ln_mag = (2.0 * nf - 3.0) / 4.0 * b.ln() - 0.5 * (ln_gamma_seq(p, n) + ln_gamma_seq(p, n + 1));
    let coef = (b + (b - 1.0) * nf) * ln_mag.exp();
    Ok(OrthonormalCoefficients {
        a: a_n,
        b: off_diag(a * coef, a.conj() * coef),
    })
}

/// Monic and Rodrigues-normalized recurrence coefficients at index `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonicNormalizedCoefficients {
    pub b_hat: ComplexMatrix,
    /// Zero at `n = 0`.
    pub c_hat: ComplexMatrix,
    /// `None` at `n = 0`.
    pub a_tilde: Option<ComplexMatrix>,
    pub b_tilde: ComplexMatrix,
    /// Zero at `n = 0`.
    pub c_tilde: ComplexMatrix,
    /// Largest relative mismatch of `Ã_n = G_{n-1}A_nG_n⁻¹`, `B̃_n = G_nB_nG_n⁻¹`
    /// and `C̃_n = G_nA_n*G_{n-1}⁻¹` against the closed forms above.
    pub gauge_consistency: f64,
}

/// `B̂_n = (b+(b-1)n) [[0, a/(2b)], [2āb^{n-1/2}/(γ_nγ_{n+1}), 0]]`,
/// `Ĉ_n = (n/2b) diag(γ_{n+1}/γ_n, bγ_{n-1}/γ_n)`,
/// `Ã_n = ½ diag(1, γ_{n-1}/γ_n)`,
/// `B̃_n = (-n+(n+1)b) [[0, a/(2bγ_n)], [2āb^{n-1/2}/γ_{n+1}, 0]]`,
/// `C̃_n = n diag(γ_{n+1}/(bγ_n), 1)`.
pub fn monic_and_normalized_recurrence(p: &WeightParams, n: usize) -> Result<MonicNormalizedCoefficients> {
    require_two(p)?;
    let a = p.a()[0];
    let b = p.b();
    let nf = n as f64;
    let lb = b.ln();
    let ln_g = |k| ln_gamma_seq(p, k);

    let lower_hat = ((nf - 0.5) * lb - ln_g(n) - ln_g(n + 1)).exp();
    let b_hat = off_diag(a / (2.0 * b), a.conj() * 2.0 * lower_hat).scale(re(b + (b - 1.0) * nf));
    let lower_tilde = ((nf - 0.5) * lb - ln_g(n + 1)).exp();
    let b_tilde = off_diag(a / (2.0 * b * gamma_seq(p, n)), a.conj() * 2.0 * lower_tilde)
        .scale(re(-nf + (nf + 1.0) * b));
    let (c_hat, a_tilde, c_tilde) = if n == 0 {
        (ComplexMatrix::zeros(2), None, ComplexMatrix::zeros(2))
    } else {
        let up = gamma_ratio(p, n + 1, n);
        let down = gamma_ratio(p, n - 1, n);
        (
            diag(up, b * down).scale(re(nf / (2.0 * b))),
            Some(diag(0.5, 0.5 * down)),
            diag(nf * up / b, nf),
        )
    };

    let mut gauge_consistency: f64 = 0.0;
    let fit = |x: &ComplexMatrix, y: &ComplexMatrix| x.max_abs_diff(y) / y.max_abs().max(f64::MIN_POSITIVE);
    let g_n = normalization_factors(p, n)?.g;
    let on = orthonormal_recurrence(p, n)?;
    let lhs_b = &(&g_n * &on.b) * &g_n.inverse()?;
    if b_tilde.max_abs() > 0.0 {
        gauge_consistency = gauge_consistency.max(fit(&lhs_b, &b_tilde));
    } else {
        gauge_consistency = gauge_consistency.max(lhs_b.max_abs());
    }
    if let (Some(a_t), Some(a_n)) = (&a_tilde, &on.a) {
        let g_prev = normalization_factors(p, n - 1)?.g;
        let lhs_a = &(&g_prev * a_n) * &g_n.inverse()?;
        gauge_consistency = gauge_consistency.max(fit(&lhs_a, a_t));
        let lhs_c = &(&g_n * &a_n.adjoint()) * &g_prev.inverse()?;
        gauge_consistency = gauge_consistency.max(fit(&lhs_c, &c_tilde));
    }

    Ok(MonicNormalizedCoefficients {
        b_hat,
        c_hat,
        a_tilde,
        b_tilde,
        c_tilde,
        gauge_consistency,
    })
}

/// `‖P̂_n‖² = (√π n!/2^n) diag(γ_{n+1}/(2b^{n+1/2}), 2/γ_n)` and
/// `‖P_n‖² = 2^n√π n! diag(γ_{n+1}/(2b^{n+1/2}), 2γ_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Norms {
    pub monic: ComplexMatrix,
    pub rodrigues: ComplexMatrix,
}

pub fn norms(p: &WeightParams, n: usize) -> Result<Norms> {
    require_two(p)?;
    let nf = n as f64;
    let b = p.b();
    let ln2 = 2f64.ln();
    let ln_sp = 0.5 * PI.ln() + ln_factorial(n);
    let ln_first = ln_gamma_seq(p, n + 1) - ln2 - (nf + 0.5) * b.ln();
    let ln_gn = ln_gamma_seq(p, n);
    if n <= LOG_SPACE_FROM {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let sp = PI.sqrt() * fact;
        let two_n = 2f64.powi(n as i32);
        let first = gamma_seq(p, n + 1) / (2.0 * b.powf(nf + 0.5));
        let gn = gamma_seq(p, n);
        return Ok(Norms {
            monic: diag(sp / two_n * first, sp / two_n * 2.0 / gn),
            rodrigues: diag(two_n * sp * first, two_n * sp * 2.0 * gn),
        });
    }
    Ok(Norms {
        monic: diag(
            (ln_sp - nf * ln2 + ln_first).exp(),
            (ln_sp - nf * ln2 + ln2 - ln_gn).exp(),
        ),
        rodrigues: diag(
            (ln_sp + nf * ln2 + ln_first).exp(),
            (ln_sp + nf * ln2 + ln2 + ln_gn).exp(),
        ),
    })
}

/// Branch limit of `A_n/√n`: `diag(1/√2, 1/√(2b))` for `b > 1`,
/// `diag(1/√(2b), 1/√2)` for `0 < b < 1`.
pub fn asymptotic_limit(b: f64) -> Result<ComplexMatrix> {
    if !(b.is_finite() && b > 0.0) || b == 1.0 {
        return Err(Error::InvalidParameter(format!(
            "asymptotic limit needs b > 0 and b != 1, got {b}"
        )));
    }
    let s2 = 2f64.sqrt();
    Ok(if b > 1.0 {
        diag(1.0 / s2, 1.0 / (2.0 * b).sqrt())
    } else {
        diag(1.0 / (2.0 * b).sqrt(), 1.0 / s2)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticReport {
    pub limit: ComplexMatrix,
    /// `(n, ‖A_n/√n - L‖)` for `n = 1..=horizon`.
    pub errors: Vec<(usize, f64)>,
    /// `(n, ‖B_n‖)` for `n = 0..=horizon`.
    pub b_norms: Vec<(usize, f64)>,
}

impl AsymptoticReport {
    pub fn error_at(&self, n: usize) -> Option<f64> {
        self.errors.iter().find(|(k, _)| *k == n).map(|(_, e)| *e)
    }

    /// Whether the error sequence strictly decreases from index `from` on.
    pub fn decreasing_from(&self, from: usize) -> bool {
        self.errors
            .windows(2)
            .filter(|w| w[0].0 >= from)
            .all(|w| w[1].1 < w[0].1)
    }

    /// Whether `‖B_n‖` strictly decreases from index `from` on.
    pub fn b_decreasing_from(&self, from: usize) -> bool {
        self.b_norms
            .windows(2)
            .filter(|w| w[0].0 >= from)
            .all(|w| w[1].1 < w[0].1)
    }
}

/// Distance of `A_n/√n` from the branch limit, computed from cancellation-free
/// expressions for `γ_{n±1}/γ_n` minus their limits.
pub fn asymptotic_convergence(p: &WeightParams, horizon: usize) -> Result<AsymptoticReport> {
    require_two(p)?;
    let b = p.b();
    let limit = asymptotic_limit(b)?;
    let a2 = p.a()[0].norm_sqr();
    let errors = (1..=horizon)
        .map(|n| {
            let nf = n as f64;
            let (first, second) = if b > 1.0 {
                // divide numerator and denominator of γ ratios by b^{n-1/2}
                let w = b.powf(-(nf - 0.5));
                let den = 2.0 * w + a2 * nf;
                let r_minus = (2.0 * (1.0 - b) * w + a2 * b) / den;
                let s_minus = (2.0 * (b - 1.0) * w - a2) / (b * den);
                let r = b + r_minus;
                let s = 1.0 / b + s_minus;
                (
                    r_minus / ((2.0 * b).sqrt() * (r.sqrt() + b.sqrt())),
                    s_minus / (2f64.sqrt() * (s.sqrt() + 1.0 / b.sqrt())),
                )
            } else {
                let gn = gamma_seq(p, n);
                let r_minus = a2 * b.powf(nf - 0.5) * (b * (nf + 1.0) - nf) / gn;
                let s_minus = a2 * b.powf(nf - 1.5) * ((nf - 1.0) - b * nf) / gn;
                let r = 1.0 + r_minus;
                let s = 1.0 + s_minus;
                (
                    r_minus / ((2.0 * b).sqrt() * (r.sqrt() + 1.0)),
                    s_minus / (2f64.sqrt() * (s.sqrt() + 1.0)),
                )
            };
            (n, first.abs().max(second.abs()))
        })
        .collect();
    let b_norms = (0..=horizon)
        .map(|n| orthonormal_recurrence(p, n).map(|c| (n, c.b.max_abs())))
        .collect::<Result<_>>()?;
    Ok(AsymptoticReport { limit, errors, b_norms })
}

/// Residual of `(RF₂*)″ - (R[F₁* + n(F₂*)′])′ + R[F₀* + n(F₁*)′ + C(n,2)(F₂*)″] - Λ_nR`
/// for `R = R_n`, maximized over `ts`.
pub fn verify_rodrigues_pde(p: &WeightParams, n: usize, ts: &[f64]) -> Result<f64> {
    let r = rodrigues_rn(p, n)?;
    let (k2, k1, k0) = pde_coefficients(p, n);
    let lambda = MatrixPolynomial::constant(eigenvalue_matrix_c64(p, n));
    let residual = r
        .mul_poly_right(&k2)
        .nth_derivative(2)
        .sub(&r.mul_poly_right(&k1).derivative())
        .add(&r.mul_poly_right(&k0))
        .sub(&r.mul_poly_left(&lambda));
    Ok(ts.iter().map(|&t| residual.eval(t).max_abs()).fold(0.0, f64::max))
}

/// `F₂*`, `F₁* + n(F₂*)′`, `F₀* + n(F₁*)′ + C(n,2)(F₂*)″`.
fn pde_coefficients(p: &WeightParams, n: usize) -> (MatrixPolynomial, MatrixPolynomial, MatrixPolynomial) {
    let d = build_operator::<Complex64>(p);
    let nf = re(n as f64);
    let f2s = d.f2.adjoint();
    let f1s = d.f1.adjoint();
    let k1 = f1s.add(&f2s.derivative(1).scale(nf));
    let binom = re((n * n.saturating_sub(1)) as f64 / 2.0);
    let k0 = d
        .f0
        .adjoint()
        .add(&f1s.derivative(1).scale(nf))
        .add(&f2s.derivative(2).scale(binom));
    (f2s, k1, k0)
}

/// Compares the three coefficient polynomials of the PDE with the
/// hand-simplified 2×2 display
/// `[[1, 0], [ā(b-1)t, b]]`, `[[-2bt, 0], [ā(b(2+n)-n), -2bt]]`, `Λ_n`.
pub fn pde_display_consistency(p: &WeightParams, n: usize) -> Result<f64> {
    require_two(p)?;
    let a = p.a()[0].conj();
    let b = p.b();
    let nf = n as f64;
    let zero = ComplexMatrix::zeros(2);
    let lin = |c0: ComplexMatrix, c1: ComplexMatrix| MatrixPolynomial::new(2, vec![c0, c1]).expect("2x2");
    let mut lower = ComplexMatrix::zeros(2);
    lower[(1, 0)] = a * (b - 1.0);
    let disp2 = lin(diag(1.0, b), lower);
    let mut c0 = zero.clone();
    c0[(1, 0)] = a * (b * (2.0 + nf) - nf);
    let disp1 = lin(c0, diag(-2.0 * b, -2.0 * b));
    let disp0 = MatrixPolynomial::constant(eigenvalue_matrix_c64(p, n));
    let (k2, k1, k0) = pde_coefficients(p, n);
    Ok(k2
        .max_abs_diff(&disp2)
        .max(k1.max_abs_diff(&disp1))
        .max(k0.max_abs_diff(&disp0)))
}
