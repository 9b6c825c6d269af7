//! Verification suite driven by a [`RunConfig`].

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use matorth::family::{build_structure, verify_lemma_identities, weight_eval, weight_moment, WeightMoments};
use matorth::hermite2x2::{
    asymptotic_convergence, explicit_pn, monic_and_normalized_recurrence, norms, normalization_factors,
    orthonormal_recurrence, rodrigues_polynomial, verify_rodrigues_pde,
};
use matorth::operator::{build_operator, check_chi_xi, check_symmetry_equations, eigen_residual, eigenvalue_matrix};
use matorth::orthogonalize::{
    monic_sequence, orthogonality_residual, orthonormalize_sequence, recurrence_from_sequence, rescaled_recurrence,
    MonicSequence, RecurrenceKind,
};
use matorth::quadrature::quadrature_oracle;
use matorth::{ComplexMatrix, ExtendedComplex, Matrix, MatrixPolynomial, Scalar, WeightParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;

type E = ExtendedComplex;

/// Largest admissible `‖A_n/√n - L‖` at the asymptotic horizon.
pub const ASYMPTOTIC_TOLERANCE: f64 = 0.02;
pub const ASYMPTOTIC_HORIZON: usize = 200;
/// The error sequence must decrease from this index on.
pub const MONOTONE_FROM: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    /// `None` when the check was skipped or could not be evaluated.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
    pub note: Option<String>,
}

impl Check {
    /// Passes when `residual ≤ tolerance`; NaN fails.
    pub fn measured(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            residual: Some(residual),
            tolerance,
            status: if residual <= tolerance { Status::Pass } else { Status::Fail },
            note: None,
        }
    }

    pub fn failed(name: impl Into<String>, tolerance: f64, note: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            residual: None,
            tolerance,
            status: Status::Fail,
            note: Some(note.into()),
        }
    }

    pub fn skipped(name: impl Into<String>, tolerance: f64, note: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            residual: None,
            tolerance,
            status: Status::Skipped,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Marks the check failed while keeping its residual.
    fn fail_because(mut self, note: impl Into<String>) -> Self {
        self.status = Status::Fail;
        self.note = Some(note.into());
        self
    }

    pub fn pass(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationSummary {
    /// In execution order.
    pub checks: Vec<Check>,
    /// Wall-clock seconds per stage, in execution order.
    pub timings: Vec<(String, f64)>,
    pub total_seconds: f64,
}

impl VerificationSummary {
    /// Conjunction over all non-skipped checks.
    pub fn pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Runner {
    checks: Vec<Check>,
    timings: Vec<(String, f64)>,
}

impl Runner {
    /// Runs one stage; an error or panic becomes a failing check named after the stage.
    fn stage(&mut self, name: &str, tolerance: f64, body: impl FnOnce() -> matorth::Result<Vec<Check>>) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(body));
        self.timings.push((name.to_string(), start.elapsed().as_secs_f64()));
        match outcome {
            Ok(Ok(checks)) => self.checks.extend(checks),
            Ok(Err(e)) => self.checks.push(Check::failed(name, tolerance, e.to_string())),
            Err(panic) => {
                let message = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                self.checks.push(Check::failed(name, tolerance, format!("aborted: {message}")));
            }
        }
    }
}

/// Runs every applicable check; failures are recorded and never stop later stages.
pub fn run_suite(config: &RunConfig) -> VerificationSummary {
    let start = Instant::now();
    let p = &config.params;
    let ts = &config.t_grid;
    let tol = config.tolerances;
    let nmax = config.nmax;
    let mut run = Runner {
        checks: Vec::new(),
        timings: Vec::new(),
    };

    run.stage("structure", tol.rel, || Ok(structure_checks(p, ts, tol.rel)));
    run.stage("lemma", tol.abs, || Ok(lemma_checks(p, ts, tol.abs)));
    run.stage("symmetry", tol.abs, || Ok(symmetry_checks(p, ts, tol.abs)));
    run.stage("chi_xi", tol.abs, || {
        let r = check_chi_xi(p, ts);
        Ok(vec![
            Check::measured("chi_xi/chi_hermitian", r.chi_hermitian_residual, tol.abs),
            Check::measured("chi_xi/xi_offdiagonal", r.xi_offdiagonal_residual, tol.abs),
            Check::measured("chi_xi/xi_diagonal", r.xi_diagonal_residual, tol.abs),
        ])
    });
    run.stage("oracle", tol.rel, || Ok(vec![oracle_check(p, 2 * nmax, tol.rel)]));

    let mut sequence = None;
    run.stage("orthogonality", tol.rel, || {
        let s = monic_sequence(p, nmax + 1);
        let mut check = Check::measured("orthogonality", orthogonality_residual(&s), tol.rel);
        if let Some(t) = s.truncation() {
            check = check.fail_because(format!("sequence stopped at degree {}: {}", t.n, t.reason));
        }
        sequence = Some(s);
        Ok(vec![check])
    });
    let Some(s) = sequence else {
        return finish(run, start);
    };
    run.stage("eigen", tol.rel, || Ok(vec![eigen_check(p, &s, nmax, tol.rel)]));

    if p.size() == 2 {
        run.stage("rodrigues_explicit", tol.rel, || {
            let worst = (1..=nmax).try_fold(0.0f64, |w, n| {
                Ok::<_, matorth::Error>(w.max(rodrigues_polynomial(p, n)?.relative_diff(&explicit_pn(p, n)?)))
            })?;
            Ok(vec![Check::measured("rodrigues_explicit", worst, tol.rel)])
        });
        run.stage("recurrence", tol.rel, || recurrence_checks(p, &s, nmax, tol.rel));
        run.stage("norms", tol.rel, || Ok(vec![norms_check(p, &s, nmax, tol.rel)?]));
        run.stage("pde", tol.abs, || {
            let worst = (1..=nmax).try_fold(0.0f64, |w, n| Ok::<_, matorth::Error>(w.max(verify_rodrigues_pde(p, n, ts)?)))?;
            Ok(vec![Check::measured("pde", worst, tol.abs)])
        });
        run.stage("asymptotics", ASYMPTOTIC_TOLERANCE, || asymptotic_checks(p, nmax));
    }

    if let Some(seed) = config.seed {
        run.stage("sweep", tol.abs, || Ok(sweep_checks(p.size(), seed, config.draws, ts, tol.abs)));
    }
    finish(run, start)
}

fn finish(run: Runner, start: Instant) -> VerificationSummary {
    VerificationSummary {
        checks: run.checks,
        timings: run.timings,
        total_seconds: start.elapsed().as_secs_f64(),
    }
}

/// `W(t)` Hermitian (relative to `|W|`) and positive definite at every grid point,
/// the latter decided in extended precision.
fn structure_checks(p: &WeightParams, ts: &[f64], tol: f64) -> Vec<Check> {
    let s = build_structure::<E>(p);
    let e = s.exp_acal();
    let diag = s.d.diagonal();
    let mut hermitian: f64 = 0.0;
    let mut failures = Vec::new();
    for &t in ts {
        let w = weight_eval(p, t).1;
        hermitian = hermitian.max(w.hermitian_residual() / w.max_abs());
        let gauss: Vec<E> = diag.iter().map(|d| E::from_f64((d.re_f64() * t * t).exp())).collect();
        let tm = &e.eval(t) * &Matrix::from_diagonal(&gauss);
        if !(&tm * &tm.adjoint()).is_positive_definite() {
            failures.push(t);
        }
    }
    let mut pd = Check::measured("structure/positive_definite", failures.len() as f64, 0.0);
    if !failures.is_empty() {
        pd = pd.with_note(format!("not positive definite at t = {failures:?}"));
    }
    vec![Check::measured("structure/hermitian", hermitian, tol), pd]
}

fn lemma_checks(p: &WeightParams, ts: &[f64], tol: f64) -> Vec<Check> {
    let reports: Vec<_> = ts.iter().map(|&t| verify_lemma_identities(p, t)).collect();
    let names = reports
        .first()
        .map(|r| r.entries().map(|(name, _)| name))
        .unwrap_or_default();
    names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let name = format!("lemma/{name}");
            let values: Option<Vec<f64>> = reports.iter().map(|r| r.entries()[i].1).collect();
            match values {
                Some(v) => Check::measured(name, v.into_iter().fold(0.0, f64::max), tol),
                None => Check::skipped(name, tol, "degenerate-skipped: identity carries 1/(1-b) and b = 1"),
            }
        })
        .collect()
}

fn symmetry_checks(p: &WeightParams, ts: &[f64], tol: f64) -> Vec<Check> {
    let r = check_symmetry_equations(p, ts);
    vec![
        Check::measured("symmetry/ccp", r.residual_ccp, tol),
        Check::measured("symmetry/first_order", r.residual_first_order, tol),
        Check::measured("symmetry/second_order", r.residual_second_order, tol),
    ]
}

/// Exact moments against Gauss–Hermite quadrature for `m ≤ mmax`.
fn oracle_check(p: &WeightParams, mmax: usize, tol: f64) -> Check {
    let id = ComplexMatrix::identity(p.size());
    let extra = 2 * (p.size() - 1);
    let worst = (0..=mmax)
        .map(|m| {
            let exact = weight_moment(p, m);
            let oracle = quadrature_oracle(p, |t| id.scale(Complex64::new(t.powi(m as i32), 0.0)), |_| id.clone(), m + extra);
            exact.max_abs_diff(&oracle.value) / exact.max_abs().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    Check::measured("oracle", worst, tol).with_note(format!("moments m <= {mmax}"))
}

fn eigen_check(p: &WeightParams, s: &MonicSequence<E>, nmax: usize, tol: f64) -> Check {
    let d = build_operator::<E>(p);
    let worst = s
        .polys()
        .iter()
        .enumerate()
        .take(nmax + 1)
        .map(|(n, poly)| eigen_residual(&d, &eigenvalue_matrix::<E>(p, n), poly).expect("dimensions agree"))
        .fold(0.0, f64::max);
    Check::measured("eigen", worst, tol)
}

/// `max|x - y| / max(1, max|y|)`.
fn rel(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    x.max_abs_diff(y) / y.max_abs().max(1.0)
}

/// Entrywise deviation scaled by `√(|y_ii||y_jj|)`.
fn rel_gram(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    let n = y.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let scale = (y[(i, i)].norm() * y[(j, j)].norm()).sqrt();
            worst = worst.max((x[(i, j)] - y[(i, j)]).norm() / scale);
        }
    }
    worst
}

fn require_length(s: &MonicSequence<E>, len: usize) -> matorth::Result<()> {
    match s.truncation() {
        Some(t) if s.len() < len => Err(t.reason.clone()),
        _ => Ok(()),
    }
}

fn recurrence_checks(p: &WeightParams, s: &MonicSequence<E>, nmax: usize, tol: f64) -> matorth::Result<Vec<Check>> {
    require_length(s, nmax + 2)?;
    let ortho = orthonormalize_sequence(s)?;
    let monic = recurrence_from_sequence(s)?;
    let leading: Vec<Matrix<E>> = (0..s.len())
        .map(|n| normalization_factors(p, n).map(|f| Matrix::from_c64(&f.gamma)))
        .collect::<matorth::Result<_>>()?;
    let tilde = rescaled_recurrence(s, &leading, RecurrenceKind::RodriguesNormalized)?;
    let identity = [&ortho.table, &monic, &tilde]
        .iter()
        .flat_map(|t| t.residuals[..=nmax].iter().copied())
        .fold(0.0, f64::max);
    let mut closed: f64 = 0.0;
    for n in 0..=nmax {
        let on = orthonormal_recurrence(p, n)?;
        let mn = monic_and_normalized_recurrence(p, n)?;
        closed = closed
            .max(rel(&ortho.table.b[n], &on.b))
            .max(rel(&monic.b[n], &mn.b_hat))
            .max(rel(&tilde.b[n], &mn.b_tilde));
        if let (Some(a), Some(a_tilde)) = (&on.a, &mn.a_tilde) {
            closed = closed
                .max(rel(&ortho.table.a[n], a))
                .max(rel(&monic.c[n], &mn.c_hat))
                .max(rel(&tilde.a[n], a_tilde))
                .max(rel(&tilde.c[n], &mn.c_tilde));
        }
    }
    Ok(vec![
        Check::measured("recurrence/closed_form", closed, tol),
        Check::measured("recurrence/identity", identity, tol),
    ])
}

fn norms_check(p: &WeightParams, s: &MonicSequence<E>, nmax: usize, tol: f64) -> matorth::Result<Check> {
    require_length(s, nmax + 1)?;
    let moments = WeightMoments::<E>::new(p);
    let mut worst: f64 = 0.0;
    for n in 0..=nmax {
        let closed = norms(p, n)?;
        worst = worst.max(rel_gram(&s.norm_c64(n), &closed.monic));
        let pn = MatrixPolynomial::<E>::from_c64(&explicit_pn(p, n)?);
        worst = worst.max(rel_gram(&moments.integrate(&pn, &pn).to_c64(), &closed.rodrigues));
    }
    Ok(Check::measured("norms", worst, tol))
}

fn asymptotic_checks(p: &WeightParams, nmax: usize) -> matorth::Result<Vec<Check>> {
    if p.is_degenerate() {
        let note = "degenerate-skipped: the branch limit requires b != 1";
        return Ok(vec![
            Check::skipped("asymptotics/limit", ASYMPTOTIC_TOLERANCE, note),
            Check::skipped("asymptotics/monotone", 0.0, note),
        ]);
    }
    let horizon = nmax.max(ASYMPTOTIC_HORIZON);
    let rep = asymptotic_convergence(p, horizon)?;
    let err = rep.error_at(horizon).expect("horizon is in range");
    let increases = rep
        .errors
        .windows(2)
        .filter(|w| w[0].0 >= MONOTONE_FROM && w[1].1 >= w[0].1)
        .count();
    Ok(vec![
        Check::measured("asymptotics/limit", err, ASYMPTOTIC_TOLERANCE).with_note(format!("n = {horizon}")),
        Check::measured("asymptotics/monotone", increases as f64, 0.0)
            .with_note(format!("non-decreasing steps for n >= {MONOTONE_FROM}")),
    ])
}

/// Random parameters of the given size: `b ∈ [0.2, 5]` away from 1,
/// `|a_i| ∈ [0.1, 2]` with uniform phase.
pub fn random_params(size: usize, seed: u64, count: usize) -> Vec<WeightParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let b = loop {
                let b: f64 = rng.random_range(0.2..=5.0);
                if (b - 1.0).abs() > 1e-3 {
                    break b;
                }
            };
            let a = (0..size - 1)
                .map(|_| Complex64::from_polar(rng.random_range(0.1..=2.0), rng.random_range(0.0..2.0 * PI)))
                .collect();
            WeightParams::new(size, a, b).expect("drawn parameters are valid")
        })
        .collect()
}

fn sweep_checks(size: usize, seed: u64, draws: usize, ts: &[f64], tol: f64) -> Vec<Check> {
    let (mut symmetry, mut lemma, mut chi_xi) = (0.0f64, 0.0f64, 0.0f64);
    for p in random_params(size, seed, draws) {
        symmetry = symmetry.max(check_symmetry_equations(&p, ts).max_pointwise());
        lemma = ts
            .iter()
            .map(|&t| verify_lemma_identities(&p, t).max_residual())
            .fold(lemma, f64::max);
        let r = check_chi_xi(&p, ts);
        chi_xi = chi_xi
            .max(r.chi_hermitian_residual)
            .max(r.xi_offdiagonal_residual)
            .max(r.xi_diagonal_residual);
    }
    let note = format!("{draws} draws, seed {seed}");
    vec![
        Check::measured("sweep/symmetry", symmetry, tol).with_note(note.clone()),
        Check::measured("sweep/lemma", lemma, tol).with_note(note.clone()),
        Check::measured("sweep/chi_xi", chi_xi, tol).with_note(note),
    ]
}
