//! Gauss–Hermite quadrature, used only as an independent check on the exact
//! moment route.
//!
//! Each Gaussian component `e^{-c_k t²}` of the weight is integrated with its
//! own rule after the substitution `u = √c_k t`.

use num_complex::Complex64;

use crate::family::{build_structure, WeightParams};
use crate::linalg::{ComplexMatrix, Matrix};
use crate::scalar::Scalar;

/// Nodes and weights for `∫ f(u) e^{-u²} du ≈ Σ w_i f(u_i)`, exact for
/// polynomials of degree `< 2m`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussHermiteRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermiteRule {
    /// `m`-point rule; roots found by Newton iteration on the orthonormal
    /// Hermite recurrence, so small tail weights keep full relative accuracy.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "quadrature rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let mf = m as f64;
        let mut z = 0.0f64;
        for i in 0..m.div_ceil(2) {
            z = match i {
                0 => (2.0 * mf + 1.0).sqrt() - 1.85575 * (2.0 * mf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * mf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut derivative = 0.0;
            for _ in 0..100 {
                let (p, dp) = orthonormal_hermite(m, z, pim4);
                derivative = dp;
                let step = p / dp;
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            if m % 2 == 1 && i == m / 2 {
                z = 0.0;
                derivative = orthonormal_hermite(m, 0.0, pim4).1;
            }
            nodes[i] = z;
            nodes[m - 1 - i] = -z;
            let w = 2.0 / (derivative * derivative);
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        nodes.reverse();
        weights.reverse();
        GaussHermiteRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ f(t) e^{-c t²} dt` for `c > 0`.
    pub fn integrate(&self, c: f64, f: impl Fn(f64) -> ComplexMatrix) -> ComplexMatrix {
        self.integrate_in(c, f)
    }

    /// [`GaussHermiteRule::integrate`] with the integrand and the sum in `S`.
    ///
    /// Mirror nodes `±u` are added pairwise before accumulation so that odd
    /// parts of `f` cancel exactly.
    pub fn integrate_in<S: Scalar>(&self, c: f64, f: impl Fn(f64) -> Matrix<S>) -> Matrix<S> {
        let root = c.sqrt();
        let m = self.len();
        let term = |i: usize| f(self.nodes[i] / root).scale(S::from_f64(self.weights[i] / root));
        let mut acc = if m % 2 == 1 {
            term(m / 2)
        } else {
            &term(m / 2 - 1) + &term(m / 2)
        };
        for i in (0..(m - 1) / 2).rev() {
            acc = &acc + &(&term(i) + &term(m - 1 - i));
        }
        acc
    }
}

/// Value of the degree-`m` orthonormal Hermite function and its derivative
/// at `z` (`pim4 = π^{-1/4}`).
fn orthonormal_hermite(m: usize, z: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 1..=m {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * m as f64).sqrt() * p2)
}

/// An oracle value together with the change when the rule size doubles.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<S = Complex64> {
    pub value: Matrix<S>,
    /// `max|I_{2M} - I_M|`
    pub delta: f64,
}

/// `∫ L(t) W(t) R(t)* dt` by Gauss–Hermite quadrature on each Gaussian
/// component of `W`, with `M = degree_hint + 1` points (and `2M` for the
/// reported delta). `degree_hint` should bound the total polynomial degree
/// of `L W R*` after the Gaussians are factored out.
pub fn quadrature_oracle(
    p: &WeightParams,
    left: impl Fn(f64) -> ComplexMatrix,
    right: impl Fn(f64) -> ComplexMatrix,
    degree_hint: usize,
) -> OracleResult {
    quadrature_oracle_in(p, left, right, degree_hint)
}

/// [`quadrature_oracle`] with the integrand formed and summed in `S`, for
/// integrands whose products `L(t)e^{𝒜t}` cancel heavily.
pub fn quadrature_oracle_in<S: Scalar>(
    p: &WeightParams,
    left: impl Fn(f64) -> Matrix<S>,
    right: impl Fn(f64) -> Matrix<S>,
    degree_hint: usize,
) -> OracleResult<S> {
    let m = degree_hint + 1;
    let coarse = oracle_with(p, &left, &right, &GaussHermiteRule::new(m));
    let fine = oracle_with(p, &left, &right, &GaussHermiteRule::new(2 * m));
    OracleResult {
        delta: fine.to_c64().max_abs_diff(&coarse.to_c64()),
        value: fine,
    }
}

fn oracle_with<S: Scalar>(
    p: &WeightParams,
    left: &impl Fn(f64) -> Matrix<S>,
    right: &impl Fn(f64) -> Matrix<S>,
    rule: &GaussHermiteRule,
) -> Matrix<S> {
    let s = build_structure::<S>(p);
    let e = s.exp_acal();
    let n = p.size();
    let mut total = Matrix::zeros(n);
    for (k, c) in s.scales().iter().enumerate() {
        // W_k(t) = E(t)_{·k} E(t)_{·k}*
        let part = rule.integrate_in(c.re_f64(), |t| {
            let et = e.eval(t);
            let wk = Matrix::from_fn(n, |i, j| et[(i, k)] * et[(j, k)].conj());
            &(&left(t) * &wk) * &right(t).adjoint()
        });
        total = &total + &part;
    }
    total
}
