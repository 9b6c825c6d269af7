//! The weight family `W(t) = T(t)T*(t)`, `T(t) = e^{𝒜t}e^{𝒟t²}`.
//!
//! With `A` strictly upper bidiagonal (entries `a₁..a_{N-1}`) and
//! `𝒥 = diag(0, 1, …, N-1)`:
//!
//! ```text
//! Ψ   = I + ((b-1)/(N-1)) 𝒥
//! 𝒟   = -(b/2) Ψ⁻¹
//! 𝒜   = Σ_{j=0}^{⌊N/2⌋-1} α_j A^{2j+1}
//! α_j = (1-b)^j (2j+1)^{j-1} / ((4b)^j (N-1)^j j!)
//! ```
//!
//! Entry `(i, j)` of `W` is `Σ_k E_ik(t) conj(E_jk(t)) e^{-c_k t²}` with
//! `E = e^{𝒜t}` and `c_k = -2𝒟_kk = b/ψ_k`, so every moment is a finite sum
//! of Gaussian integrals and is computed exactly.

use std::collections::HashMap;
use std::sync::RwLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    nilpotent_exp, ComplexMatrix, GaussErfAtom, GaussErfFunction, GaussErfFunctionMatrix, Matrix,
    MatrixPolynomial,
};
use crate::scalar::{ExtendedComplex, Scalar};

/// Size `N`, parameters `a₁..a_{N-1}` and `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightParams {
    size: usize,
    a: Vec<Complex64>,
    b: f64,
}

impl WeightParams {
    /// Validates `N ≥ 2`, `a.len() = N-1`, every `a_i ≠ 0` and finite `b > 0`.
    pub fn new(size: usize, a: Vec<Complex64>, b: f64) -> Result<Self> {
        let p = Self::new_allowing_zero_a(size, a, b)?;
        if let Some(i) = p.a.iter().position(|z| *z == Complex64::new(0.0, 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "a_{} must be nonzero",
                i + 1
            )));
        }
        Ok(p)
    }

    /// Same checks as [`WeightParams::new`] except that zero `a_i` are kept.
    /// The resulting weight is diagonal; useful as a decoupled reference.
    pub fn new_allowing_zero_a(size: usize, a: Vec<Complex64>, b: f64) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidParameter(format!("size must be at least 2, got {size}")));
        }
        if a.len() != size - 1 {
            return Err(Error::InvalidParameter(format!(
                "size {size} needs {} parameters a_i, got {}",
                size - 1,
                a.len()
            )));
        }
        if let Some(i) = a.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("a_{} is not finite", i + 1)));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!("b must be a positive real, got {b}")));
        }
        Ok(WeightParams { size, a, b })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `b = 1`: `Ψ = I`, `𝒜 = A`, and the identities carrying `1/(1-b)` do not apply.
    pub fn is_degenerate(&self) -> bool {
        self.b == 1.0
    }

    fn require_size_two(&self) -> Result<()> {
        if self.size != 2 {
            return Err(Error::RequiresSizeTwo(self.size));
        }
        Ok(())
    }
}

/// `A`, `𝒥`, `Ψ`, `𝒟`, `𝒜` and `α_0..α_{⌊(N-1)/2⌋}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureMatrices<S = Complex64> {
    pub a: Matrix<S>,
    pub j: Matrix<S>,
    pub psi: Matrix<S>,
    pub d: Matrix<S>,
    pub acal: Matrix<S>,
    pub alphas: Vec<S>,
    b: S,
}

impl<S: Scalar> StructureMatrices<S> {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn b(&self) -> S {
        self.b
    }

    /// `(b-1)/(N-1)`.
    pub fn slope(&self) -> S {
        (self.b - S::one()) / S::from_usize(self.dim() - 1)
    }

    /// `[𝒜, 𝒥]`.
    pub fn commutator(&self) -> Matrix<S> {
        self.acal.commutator(&self.j)
    }

    /// `e^{𝒜t}` as a matrix polynomial of degree `N-1`.
    pub fn exp_acal(&self) -> MatrixPolynomial<S> {
        nilpotent_exp(&self.acal).expect("𝒜 is strictly upper triangular")
    }

    /// `e^{-𝒜t}`.
    pub fn exp_neg_acal(&self) -> MatrixPolynomial<S> {
        nilpotent_exp(&-&self.acal).expect("𝒜 is strictly upper triangular")
    }

    /// Gaussian scales `c_k = -2𝒟_kk`.
    pub fn scales(&self) -> Vec<S> {
        self.d.diagonal().into_iter().map(|d| -(d + d)).collect()
    }
}

pub fn build_structure<S: Scalar>(p: &WeightParams) -> StructureMatrices<S> {
    let n = p.size;
    let b = S::from_f64(p.b);
    let one = S::one();
    let nm1 = S::from_usize(n - 1);
    let a = Matrix::from_fn(n, |i, j| if j == i + 1 { S::from_c64(p.a[i]) } else { S::zero() });
    let grading: Vec<S> = (0..n).map(S::from_usize).collect();
    let j = Matrix::from_diagonal(&grading);
    let slope = (b - one) / nm1;
    let psi_diag: Vec<S> = grading.iter().map(|&k| one + slope * k).collect();
    let psi = Matrix::from_diagonal(&psi_diag);
    let half_b = b / S::from_f64(2.0);
    let d = Matrix::from_diagonal(&psi_diag.iter().map(|&psi| -half_b / psi).collect::<Vec<_>>());

    let alphas: Vec<S> = (0..=(n - 1) / 2)
        .map(|jj| {
            let jj32 = jj as u32;
            let num = (one - b).powu(jj32) * power_signed(S::from_usize(2 * jj + 1), jj as i32 - 1);
            let factorial: S = (1..=jj).fold(one, |acc, k| acc * S::from_usize(k));
            let den = (S::from_f64(4.0) * b).powu(jj32) * nm1.powu(jj32) * factorial;
            num / den
        })
        .collect();

    let mut acal = Matrix::zeros(n);
    let mut odd_power = a.clone();
    let a2 = &a * &a;
    for (jj, alpha) in alphas.iter().enumerate().take(n / 2) {
        if jj > 0 {
            odd_power = &odd_power * &a2;
        }
        acal = &acal + &odd_power.scale(*alpha);
    }

    StructureMatrices { a, j, psi, d, acal, alphas, b }
}

fn power_signed<S: Scalar>(x: S, e: i32) -> S {
    if e >= 0 {
        x.powu(e as u32)
    } else {
        S::one() / x.powu((-e) as u32)
    }
}

/// `T(t)` and `W(t) = T(t)T(t)*`.
pub fn weight_eval(p: &WeightParams, t: f64) -> (ComplexMatrix, ComplexMatrix) {
    let s = build_structure::<Complex64>(p);
    let e = s.exp_acal().eval(t);
    let gauss: Vec<Complex64> = s
        .d
        .diagonal()
        .iter()
        .map(|d| Complex64::new((d.re * t * t).exp(), 0.0))
        .collect();
    let tm = &e * &ComplexMatrix::from_diagonal(&gauss);
    let w = &tm * &tm.adjoint();
    (tm, w)
}

/// `W(t)` as an exact Gaussian–polynomial function matrix.
pub fn weight_function_matrix(p: &WeightParams) -> GaussErfFunctionMatrix {
    let s = build_structure::<Complex64>(p);
    let e = s.exp_acal();
    let scales: Vec<f64> = s.scales().iter().map(|c| c.re).collect();
    let n = p.size;
    GaussErfFunctionMatrix::from_fn(n, |i, j| {
        let mut terms = Vec::new();
        for (k, &c) in scales.iter().enumerate() {
            for (pi, ep) in e.coeffs().iter().enumerate() {
                for (qi, eq) in e.coeffs().iter().enumerate() {
                    let coef = ep[(i, k)] * eq[(j, k)].conj();
                    terms.push((GaussErfAtom::gaussian((pi + qi) as u32, c), coef));
                }
            }
        }
        GaussErfFunction::new(terms)
    })
}

/// `∫ t^m e^{-c t²} dt` for `c > 0`; zero for odd `m`.
pub fn gaussian_moment<S: Scalar>(m: usize, c: S) -> S {
    if m % 2 == 1 {
        return S::zero();
    }
    let mut g = S::sqrt_pi() / c.real_sqrt();
    let two_c = c + c;
    for q in 0..m / 2 {
        g = g * S::from_usize(2 * q + 1) / two_c;
    }
    g
}

/// Exact moments `∫ t^m W(t) dt`, memoized per `m`.
///
/// The cache is behind an `RwLock`, so one table can be shared between threads.
#[derive(Debug)]
pub struct WeightMoments<S = ExtendedComplex> {
    structure: StructureMatrices<S>,
    exp_coeffs: Vec<Matrix<S>>,
    scales: Vec<S>,
    cache: RwLock<HashMap<usize, Matrix<S>>>,
}

impl<S: Scalar> WeightMoments<S> {
    pub fn new(p: &WeightParams) -> Self {
        let structure = build_structure::<S>(p);
        let exp_coeffs = structure.exp_acal().into_coeffs();
        let scales = structure.scales();
        WeightMoments {
            structure,
            exp_coeffs,
            scales,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn structure(&self) -> &StructureMatrices<S> {
        &self.structure
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    pub fn moment(&self, m: usize) -> Matrix<S> {
        if let Some(hit) = self.cache.read().expect("moment cache poisoned").get(&m) {
            return hit.clone();
        }
        let value = self.compute(m);
        self.cache
            .write()
            .expect("moment cache poisoned")
            .entry(m)
            .or_insert(value)
            .clone()
    }

    fn compute(&self, m: usize) -> Matrix<S> {
        let n = self.dim();
        let deg = self.exp_coeffs.len();
        let gauss: Vec<Vec<S>> = self
            .scales
            .iter()
            .map(|&c| (0..m + 2 * deg).map(|r| gaussian_moment(r, c)).collect())
            .collect();
        Matrix::from_fn(n, |i, j| {
            let mut acc = S::zero();
            for (k, g) in gauss.iter().enumerate() {
                for (pi, ep) in self.exp_coeffs.iter().enumerate() {
                    let left = ep[(i, k)];
                    if left.is_zero() {
                        continue;
                    }
                    for (qi, eq) in self.exp_coeffs.iter().enumerate() {
                        let right = eq[(j, k)];
                        if right.is_zero() {
                            continue;
                        }
                        acc += left * right.conj() * g[m + pi + qi];
                    }
                }
            }
            acc
        })
    }

    /// `∫ P(t) W(t) Q(t)* dt = Σ_{i,j} P_i M_{i+j} Q_j*`.
    pub fn integrate(&self, p: &MatrixPolynomial<S>, q: &MatrixPolynomial<S>) -> Matrix<S> {
        let mut acc = Matrix::zeros(self.dim());
        for (i, pc) in p.coeffs().iter().enumerate() {
            for (j, qc) in q.coeffs().iter().enumerate() {
                acc = &acc + &(&(pc * &self.moment(i + j)) * &qc.adjoint());
            }
        }
        acc
    }
}

/// `∫ t^m W(t) dt`, evaluated in extended precision and rounded.
pub fn weight_moment(p: &WeightParams, m: usize) -> ComplexMatrix {
    WeightMoments::<ExtendedComplex>::new(p).moment(m).to_c64()
}

/// Closed-form `W(t)⁻¹` for `N = 2`.
pub fn weight_inverse_2x2(p: &WeightParams, t: f64) -> Result<ComplexMatrix> {
    p.require_size_two()?;
    let a = p.a[0];
    let eb = (p.b * t * t).exp();
    let e1 = (t * t).exp();
    Ok(ComplexMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 0) => Complex64::new(eb, 0.0),
        (0, 1) => -a * eb * t,
        (1, 0) => -a.conj() * eb * t,
        _ => Complex64::new(a.norm_sqr() * eb * t * t + e1, 0.0),
    }))
}

/// `W(t)⁻¹` for `N = 2` in the function algebra (growing Gaussians carry negative scales).
pub fn weight_inverse_function_matrix(p: &WeightParams) -> Result<GaussErfFunctionMatrix> {
    p.require_size_two()?;
    let a = p.a[0];
    let (cb, c1) = two_by_two_scales(p);
    let g = |k: u32, c: f64, coef: Complex64| (GaussErfAtom::gaussian(k, -c), coef);
    let one = Complex64::new(1.0, 0.0);
    Ok(GaussErfFunctionMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 0) => GaussErfFunction::new(vec![g(0, cb, one)]),
        (0, 1) => GaussErfFunction::new(vec![g(1, cb, -a)]),
        (1, 0) => GaussErfFunction::new(vec![g(1, cb, -a.conj())]),
        _ => GaussErfFunction::new(vec![
            g(2, cb, Complex64::new(a.norm_sqr(), 0.0)),
            g(0, c1, one),
        ]),
    }))
}

/// The two Gaussian scales of the `N = 2` weight, `(b, 1)`, exactly as the
/// weight itself produces them.
pub(crate) fn two_by_two_scales(p: &WeightParams) -> (f64, f64) {
    let s = build_structure::<Complex64>(p).scales();
    (s[0].re, s[1].re)
}

/// Max-abs residuals of the six structural identities. The last two contain
/// `1/(1-b)` and are `None` when `b = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    /// `[𝒜,𝒥] = Σ (2j+1) α_j A^{2j+1}`
    pub commutator_expansion: f64,
    /// `e^{𝒜t}Ψ = F₂(t) e^{𝒜t}`
    pub psi_intertwining: f64,
    /// `M Ψ = -(b/2)I - ((b-1)t/(N-1)) M [𝒜,𝒥]`, `M = e^{𝒜t}𝒟e^{-𝒜t}`
    pub d_conjugation_right: f64,
    /// `Ψ M = -(b/2)I - ((b-1)t/(N-1)) [𝒜,𝒥] M`
    pub d_conjugation_left: f64,
    /// `𝒜[𝒜,𝒥] = (2b(N-1)/(1-b)) Σ_{j≥1} α_j (2j)^j/(2j+1)^{j-1} A^{2j}`
    pub even_power_expansion: Option<f64>,
    /// `[𝒜,𝒥] - 𝒜 = ((1-b)/(2b(N-1))) 𝒜²[𝒜,𝒥]`
    pub principal_relation: Option<f64>,
}

impl LemmaReport {
    pub fn entries(&self) -> [(&'static str, Option<f64>); 6] {
        [
            ("commutator_expansion", Some(self.commutator_expansion)),
            ("psi_intertwining", Some(self.psi_intertwining)),
            ("d_conjugation_right", Some(self.d_conjugation_right)),
            ("d_conjugation_left", Some(self.d_conjugation_left)),
            ("even_power_expansion", self.even_power_expansion),
            ("principal_relation", self.principal_relation),
        ]
    }

    /// Largest residual among the identities that were evaluated.
    pub fn max_residual(&self) -> f64 {
        self.entries()
            .iter()
            .filter_map(|(_, r)| *r)
            .fold(0.0, f64::max)
    }
}

pub fn verify_lemma_identities(p: &WeightParams, t: f64) -> LemmaReport {
    let s = build_structure::<Complex64>(p);
    let n = p.size;
    let b = Complex64::new(p.b, 0.0);
    let c = |x: f64| Complex64::new(x, 0.0);
    let comm = s.commutator();
    let slope = s.slope();

    let mut expansion = ComplexMatrix::zeros(n);
    for (jj, alpha) in s.alphas.iter().enumerate().take(n / 2) {
        expansion = &expansion + &s.a.pow(2 * jj as u32 + 1).scale(alpha * (2 * jj + 1) as f64);
    }
    let commutator_expansion = comm.max_abs_diff(&expansion);

    let e = s.exp_acal().eval(t);
    let e_inv = s.exp_neg_acal().eval(t);
    let f2 = &s.psi + &comm.scale(slope * t);
    let psi_intertwining = (&e * &s.psi).max_abs_diff(&(&f2 * &e));

    let m = &(&e * &s.d) * &e_inv;
    let half_b = ComplexMatrix::identity(n).scale(-b / 2.0);
    let k = slope * t;
    let right = &half_b - &(&m * &comm).scale(k);
    let d_conjugation_right = (&m * &s.psi).max_abs_diff(&right);
    let left = &half_b - &(&comm * &m).scale(k);
    let d_conjugation_left = (&s.psi * &m).max_abs_diff(&left);

    let (even_power_expansion, principal_relation) = if p.is_degenerate() {
        (None, None)
    } else {
        let nm1 = (n - 1) as f64;
        let mut sum = ComplexMatrix::zeros(n);
        for (jj, alpha) in s.alphas.iter().enumerate().skip(1) {
            let jf = jj as f64;
            let w = (2.0 * jf).powi(jj as i32) / (2.0 * jf + 1.0).powi(jj as i32 - 1);
            sum = &sum + &s.a.pow(2 * jj as u32).scale(alpha * w);
        }
        let rhs = sum.scale(c(2.0) * b * nm1 / (c(1.0) - b));
        let even = (&s.acal * &comm).max_abs_diff(&rhs);

        let acal2 = &s.acal * &s.acal;
        let rhs = (&acal2 * &comm).scale((c(1.0) - b) / (c(2.0) * b * nm1));
        let principal = (&comm - &s.acal).max_abs_diff(&rhs);
        (Some(even), Some(principal))
    };

    LemmaReport {
        commutator_expansion,
        psi_intertwining,
        d_conjugation_right,
        d_conjugation_left,
        even_power_expansion,
        principal_relation,
    }
}

/// Both sides of `Σ_m C(k,m)(m+z)^m(k-m+w)^{k-m-1} = w⁻¹(z+w+k)^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbelCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `|lhs - rhs| / |rhs|`
    pub residual: f64,
}

/// Largest `k` accepted by [`abel_identity_check`].
pub const ABEL_MAX_K: usize = 40;

pub fn abel_identity_check(k: usize, z: Complex64, w: Complex64) -> Result<AbelCheck> {
    if k > ABEL_MAX_K {
        return Err(Error::InvalidParameter(format!(
            "Abel check limited to k <= {ABEL_MAX_K}, got {k}"
        )));
    }
    if w == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidParameter("w must be nonzero".into()));
    }
    let mut lhs = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    for m in 0..=k {
        if m > 0 {
            binom = binom * (k + 1 - m) as f64 / m as f64;
        }
        let first = (z + m as f64).powu(m as u32);
        let second = power_signed(w + (k - m) as f64, (k - m) as i32 - 1);
        lhs += first * second * binom;
    }
    let rhs = (z + w + k as f64).powu(k as u32) / w;
    let residual = (lhs - rhs).norm() / rhs.norm();
    Ok(AbelCheck { lhs, rhs, residual })
}
