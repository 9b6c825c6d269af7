//! Exact algebra of functions `Σ coef · t^k · g(t)` where `g` is `1`,
//! `e^{-c t²}` or `Erf(√c t)`.
//!
//! The set is closed under differentiation:
//!
//! ```text
//! d/dt [t^k e^{-ct²}]   = k t^{k-1} e^{-ct²} - 2c t^{k+1} e^{-ct²}
//! d/dt [t^k Erf(√c t)]  = k t^{k-1} Erf(√c t) + (2√c/√π) t^k e^{-ct²}
//! ```
//!
//! Products are closed except for `Erf × Gaussian` and `Erf × Erf`, which
//! are rejected. Gaussian scales may be negative (growing exponentials) so
//! that inverse weights live in the same algebra; `e^{-ct²}·e^{+ct²}`
//! collapses to a plain monomial when the scales cancel exactly.
//!
//! Scales are compared exactly. Every scale used by this crate is produced
//! once and reused, so equal mathematical scales are equal bit patterns.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::poly::MatrixPolynomial;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AtomKind {
    Plain,
    /// `e^{-c t²}`
    Gaussian(f64),
    /// `Erf(√c t)`, `c > 0`
    Erf(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussErfAtom {
    pub power: u32,
    pub kind: AtomKind,
}

impl GaussErfAtom {
    pub fn plain(power: u32) -> Self {
        GaussErfAtom {
            power,
            kind: AtomKind::Plain,
        }
    }

    /// `t^k e^{-c t²}`; a zero scale is the plain monomial.
    pub fn gaussian(power: u32, c: f64) -> Self {
        let kind = if c == 0.0 {
            AtomKind::Plain
        } else {
            AtomKind::Gaussian(c)
        };
        GaussErfAtom { power, kind }
    }

    /// `t^k Erf(√c t)`; panics unless `c > 0`.
    pub fn erf(power: u32, c: f64) -> Self {
        assert!(c > 0.0, "Erf atom needs a positive scale, got {c}");
        GaussErfAtom {
            power,
            kind: AtomKind::Erf(c),
        }
    }

    pub fn is_plain(&self) -> bool {
        self.kind == AtomKind::Plain
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mono = t.powi(self.power as i32);
        match self.kind {
            AtomKind::Plain => mono,
            AtomKind::Gaussian(c) => mono * (-c * t * t).exp(),
            AtomKind::Erf(c) => mono * libm::erf(c.sqrt() * t),
        }
    }

    fn order(&self, other: &Self) -> Ordering {
        fn tag(k: &AtomKind) -> (u8, f64) {
            match *k {
                AtomKind::Plain => (0, 0.0),
                AtomKind::Gaussian(c) => (1, c),
                AtomKind::Erf(c) => (2, c),
            }
        }
        let (ta, ca) = tag(&self.kind);
        let (tb, cb) = tag(&other.kind);
        ta.cmp(&tb)
            .then(ca.total_cmp(&cb))
            .then(self.power.cmp(&other.power))
    }

    fn product(&self, other: &Self) -> Result<Self> {
        let power = self.power + other.power;
        match (self.kind, other.kind) {
            (AtomKind::Plain, k) | (k, AtomKind::Plain) => Ok(GaussErfAtom { power, kind: k }),
            (AtomKind::Gaussian(c1), AtomKind::Gaussian(c2)) => Ok(GaussErfAtom::gaussian(power, c1 + c2)),
            _ => Err(Error::OutsideAlgebra(format!("{:?} × {:?}", self.kind, other.kind))),
        }
    }
}

/// Canonical finite sum of atoms with complex coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaussErfFunction {
    terms: Vec<(GaussErfAtom, Complex64)>,
}

impl GaussErfFunction {
    pub fn new(terms: Vec<(GaussErfAtom, Complex64)>) -> Self {
        let mut f = GaussErfFunction { terms };
        f.canonicalize();
        f
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn atom(atom: GaussErfAtom, coef: Complex64) -> Self {
        Self::new(vec![(atom, coef)])
    }

    /// `Σ coeffs[k] t^k`.
    pub fn polynomial(coeffs: &[Complex64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| (GaussErfAtom::plain(k as u32), c))
                .collect(),
        )
    }

    pub fn terms(&self) -> &[(GaussErfAtom, Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sorts atoms, merges identical ones and drops exact zeros.
    pub fn canonicalize(&mut self) {
        self.terms.sort_by(|a, b| a.0.order(&b.0));
        let mut merged: Vec<(GaussErfAtom, Complex64)> = Vec::with_capacity(self.terms.len());
        for (atom, coef) in self.terms.drain(..) {
            match merged.last_mut() {
                Some((last, acc)) if *last == atom => *acc += coef,
                _ => merged.push((atom, coef)),
            }
        }
        merged.retain(|(_, c)| *c != Complex64::new(0.0, 0.0));
        self.terms = merged;
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.terms.iter().chain(&other.terms).copied().collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.terms.iter().map(|&(a, c)| (a, c * s)).collect())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.terms.iter().map(|&(a, c)| (a, c.conj())).collect())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.push((a.product(b)?, ca * cb));
            }
        }
        Ok(Self::new(out))
    }

    pub fn derivative(&self) -> Self {
        let two_over_sqrt_pi = 2.0 / PI.sqrt();
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for &(atom, coef) in &self.terms {
            let k = atom.power;
            let lowered = |kind| GaussErfAtom { power: k - 1, kind };
            match atom.kind {
                AtomKind::Plain => {
                    if k > 0 {
                        out.push((lowered(AtomKind::Plain), coef * k as f64));
                    }
                }
                AtomKind::Gaussian(c) => {
                    if k > 0 {
                        out.push((lowered(atom.kind), coef * k as f64));
                    }
                    out.push((GaussErfAtom::gaussian(k + 1, c), coef * (-2.0 * c)));
                }
                AtomKind::Erf(c) => {
                    if k > 0 {
                        out.push((lowered(atom.kind), coef * k as f64));
                    }
                    out.push((GaussErfAtom::gaussian(k, c), coef * (two_over_sqrt_pi * c.sqrt())));
                }
            }
        }
        Self::new(out)
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|(a, c)| c * a.eval(t)).sum()
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient attached to a non-plain atom.
    pub fn max_non_plain(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(a, _)| !a.is_plain())
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// Coefficients of the plain (polynomial) part, index = power.
    pub fn polynomial_part(&self) -> Vec<Complex64> {
        let len = self
            .terms
            .iter()
            .filter(|(a, _)| a.is_plain())
            .map(|(a, _)| a.power as usize + 1)
            .max()
            .unwrap_or(0);
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (a, c) in self.terms.iter().filter(|(a, _)| a.is_plain()) {
            out[a.power as usize] += c;
        }
        out
    }
}

/// Square matrix of [`GaussErfFunction`] entries.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussErfFunctionMatrix {
    dim: usize,
    entries: Vec<GaussErfFunction>,
}

impl GaussErfFunctionMatrix {
    pub fn zeros(dim: usize) -> Self {
        GaussErfFunctionMatrix {
            dim,
            entries: vec![GaussErfFunction::zero(); dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> GaussErfFunction) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        GaussErfFunctionMatrix { dim, entries }
    }

    pub fn from_matrix_polynomial(p: &MatrixPolynomial) -> Self {
        let dim = p.dim();
        Self::from_fn(dim, |i, j| {
            let coeffs: Vec<Complex64> = p.coeffs().iter().map(|c| c[(i, j)]).collect();
            GaussErfFunction::polynomial(&coeffs)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &GaussErfFunction {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[GaussErfFunction] {
        &self.entries
    }

    pub fn canonicalize(&mut self) {
        self.entries.iter_mut().for_each(GaussErfFunction::canonicalize);
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, GaussErfFunction::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, GaussErfFunction::sub)
    }

    fn zip(&self, other: &Self, f: impl Fn(&GaussErfFunction, &GaussErfFunction) -> GaussErfFunction) -> Self {
        assert_eq!(self.dim, other.dim, "function matrix dimension mismatch");
        GaussErfFunctionMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        GaussErfFunctionMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e.scale(s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let n = self.dim;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut terms = Vec::new();
                for k in 0..n {
                    terms.extend(self.entry(i, k).mul(other.entry(k, j))?.terms);
                }
                entries.push(GaussErfFunction::new(terms));
            }
        }
        Ok(GaussErfFunctionMatrix { dim: n, entries })
    }

    /// `F(t) · P(t)`; always inside the algebra.
    pub fn mul_poly_right(&self, p: &MatrixPolynomial) -> Self {
        self.mul(&Self::from_matrix_polynomial(p))
            .expect("polynomial factors never leave the algebra")
    }

    /// `P(t) · F(t)`.
    pub fn mul_poly_left(&self, p: &MatrixPolynomial) -> Self {
        Self::from_matrix_polynomial(p)
            .mul(self)
            .expect("polynomial factors never leave the algebra")
    }

    /// Entrywise conjugate transpose (all atoms are real functions of real `t`).
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.entry(j, i).conj())
    }

    pub fn derivative(&self) -> Self {
        GaussErfFunctionMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(GaussErfFunction::derivative).collect(),
        }
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |f, _| f.derivative())
    }

    pub fn eval(&self, t: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim, |i, j| self.entry(i, j).eval(t))
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.entries.iter().map(GaussErfFunction::max_coeff_abs).fold(0.0, f64::max)
    }

    pub fn max_non_plain(&self) -> f64 {
        self.entries.iter().map(GaussErfFunction::max_non_plain).fold(0.0, f64::max)
    }

    /// Extracts the polynomial part, failing if any non-plain coefficient
    /// exceeds `tol · max(1, max|coeffs|)`.
    pub fn to_matrix_polynomial(&self, tol: f64) -> Result<MatrixPolynomial> {
        let residual = self.max_non_plain();
        if residual > tol * self.max_coeff_abs().max(1.0) {
            return Err(Error::CancellationFailed { residual });
        }
        let parts: Vec<Vec<Complex64>> = self.entries.iter().map(GaussErfFunction::polynomial_part).collect();
        let len = parts.iter().map(Vec::len).max().unwrap_or(0);
        let coeffs = (0..len)
            .map(|k| {
                ComplexMatrix::from_fn(self.dim, |i, j| {
                    parts[i * self.dim + j].get(k).copied().unwrap_or_default()
                })
            })
            .collect();
        Ok(MatrixPolynomial::new(self.dim, coeffs)?.trimmed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn derivative_of_gaussian() {
        let f = GaussErfFunction::atom(GaussErfAtom::gaussian(0, 1.0), c(1.0));
        let d = f.derivative();
        assert_eq!(d, GaussErfFunction::atom(GaussErfAtom::gaussian(1, 1.0), c(-2.0)));
    }

    #[test]
    fn second_derivative_of_scaled_erf() {
        let b = 2.5;
        let f = GaussErfFunction::atom(GaussErfAtom::erf(0, b), c(1.0));
        let d2 = f.derivative().derivative();
        let expected = GaussErfFunction::atom(
            GaussErfAtom::gaussian(1, b),
            c(2.0 * b.sqrt() / PI.sqrt() * (-2.0 * b)),
        );
        assert_eq!(d2.terms().len(), 1);
        assert!((d2.terms()[0].1 - expected.terms()[0].1).norm() < 1e-14);
        assert_eq!(d2.terms()[0].0, expected.terms()[0].0);
    }

    #[test]
    fn evaluation_at_simple_points() {
        assert_eq!(GaussErfFunction::atom(GaussErfAtom::erf(0, 3.0), c(1.0)).eval(0.0), c(0.0));
        assert_eq!(GaussErfFunction::atom(GaussErfAtom::gaussian(0, 1.0), c(1.0)).eval(0.0), c(1.0));
        let f = GaussErfFunction::atom(GaussErfAtom::gaussian(1, 1.0), c(2.0));
        assert!((f.eval(1.0) - c(2.0 * (-1.0f64).exp())).norm() < 1e-15);
    }

    #[test]
    fn canonicalization_merges_and_drops() {
        let f = GaussErfFunction::new(vec![
            (GaussErfAtom::gaussian(2, 1.0), c(1.0)),
            (GaussErfAtom::plain(0), c(3.0)),
            (GaussErfAtom::gaussian(2, 1.0), c(-1.0)),
            (GaussErfAtom::plain(0), c(1.0)),
        ]);
        assert_eq!(f.terms(), &[(GaussErfAtom::plain(0), c(4.0))]);
    }

    #[test]
    fn opposite_scales_cancel_to_plain() {
        let g = GaussErfFunction::atom(GaussErfAtom::gaussian(1, 2.0), c(1.0));
        let h = GaussErfFunction::atom(GaussErfAtom::gaussian(2, -2.0), c(3.0));
        let p = g.mul(&h).unwrap();
        assert_eq!(p.terms(), &[(GaussErfAtom::plain(3), c(3.0))]);
    }

    #[test]
    fn erf_times_gaussian_is_rejected() {
        let e = GaussErfFunction::atom(GaussErfAtom::erf(0, 1.0), c(1.0));
        let g = GaussErfFunction::atom(GaussErfAtom::gaussian(0, 1.0), c(1.0));
        assert!(matches!(e.mul(&g), Err(Error::OutsideAlgebra(_))));
        assert!(e.mul(&GaussErfFunction::polynomial(&[c(0.0), c(1.0)])).is_ok());
    }

    #[test]
    fn polynomial_extraction_requires_cancellation() {
        let mut m = GaussErfFunctionMatrix::zeros(1);
        m.entries[0] = GaussErfFunction::new(vec![
            (GaussErfAtom::plain(1), c(2.0)),
            (GaussErfAtom::gaussian(0, 1.0), c(1e-3)),
        ]);
        assert!(m.to_matrix_polynomial(1e-9).is_err());
        let p = m.to_matrix_polynomial(1e-2).unwrap();
        assert_eq!(p.degree(), 1);
    }
}
