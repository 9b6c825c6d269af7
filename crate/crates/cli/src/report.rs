//! Rendering of each subcommand's output as JSON or CSV.

use std::collections::BTreeMap;

use matorth::family::{build_structure, weight_eval};
use matorth::hermite2x2::{asymptotic_convergence, explicit_sequence};
use matorth::operator::build_operator;
use matorth::orthogonalize::{monic_sequence, polys_c64};
use matorth::{ComplexMatrix, MatrixPolynomial};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::suite::VerificationSummary;
use crate::tables::{
    build_tables, complex_doc, csv_fields, real, csv_header, matrix_doc, rows_doc, to_json, ComplexDoc, MatrixDoc, ParamsDoc,
    RowDoc, Table, Value, NORM_TABLES, RECURRENCE_TABLES,
};

fn csv_string(records: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.write_record(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is UTF-8")
}

fn matrix_header(prefix: &[&str], dim: usize) -> Vec<String> {
    let mut h: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    h.extend(csv_header(Some(dim)).into_iter().skip(1));
    h
}

#[derive(Serialize)]
struct CheckDoc<'a> {
    name: &'a str,
    residual: Option<f64>,
    tolerance: f64,
    pass: bool,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    params: ParamsDoc,
    pass: bool,
    checks: Vec<CheckDoc<'a>>,
    timings: BTreeMap<&'a str, f64>,
    total_seconds: f64,
    tables: BTreeMap<String, Vec<RowDoc>>,
}

/// The verification report; tables are included when they can be built.
pub fn render_summary(config: &RunConfig, summary: &VerificationSummary) -> String {
    match config.format {
        Format::Json => {
            let tables = build_tables(&config.params, config.nmax)
                .map(|ts| ts.iter().map(|t| (t.name.clone(), rows_doc(t))).collect())
                .unwrap_or_default();
            to_json(&SummaryDoc {
                params: ParamsDoc::new(config),
                pass: summary.pass(),
                checks: summary
                    .checks
                    .iter()
                    .map(|c| CheckDoc {
                        name: &c.name,
                        residual: c.residual,
                        tolerance: c.tolerance,
                        pass: c.pass(),
                        status: c.status.as_str(),
                        note: c.note.as_deref(),
                    })
                    .collect(),
                timings: summary.timings.iter().map(|(k, v)| (k.as_str(), *v)).collect(),
                total_seconds: summary.total_seconds,
                tables,
            })
        }
        Format::Csv => csv_string(
            std::iter::once(["name", "residual", "tolerance", "pass", "status", "note"].map(String::from).to_vec()).chain(
                summary.checks.iter().map(|c| {
                    vec![
                        c.name.clone(),
                        c.residual.map(real).unwrap_or_default(),
                        real(c.tolerance),
                        c.pass().to_string(),
                        c.status.as_str().into(),
                        c.note.clone().unwrap_or_default(),
                    ]
                }),
            ),
        ),
    }
}

#[derive(Serialize)]
struct PolyDoc {
    coefficients: Vec<MatrixDoc>,
}

impl PolyDoc {
    fn new(p: &MatrixPolynomial) -> Self {
        PolyDoc {
            coefficients: p.coeffs().iter().map(matrix_doc).collect(),
        }
    }
}

#[derive(Serialize)]
struct WeightSampleDoc {
    t: f64,
    w: MatrixDoc,
}

#[derive(Serialize)]
struct StructureDoc {
    params: ParamsDoc,
    #[serde(rename = "A")]
    a: MatrixDoc,
    #[serde(rename = "J")]
    j: MatrixDoc,
    #[serde(rename = "Psi")]
    psi: MatrixDoc,
    #[serde(rename = "D")]
    d: MatrixDoc,
    #[serde(rename = "Acal")]
    acal: MatrixDoc,
    alphas: Vec<ComplexDoc>,
    slope: ComplexDoc,
    commutator: MatrixDoc,
    #[serde(rename = "F2")]
    f2: PolyDoc,
    #[serde(rename = "F1")]
    f1: PolyDoc,
    #[serde(rename = "F0")]
    f0: PolyDoc,
    weight: Vec<WeightSampleDoc>,
}

/// Structure matrices, operator coefficients and `W(t)` on the grid.
/// CSV rows are `name, index, row, col, re, im`, with `index` the power of `t`
/// for polynomial coefficients or the grid position for `W`.
pub fn render_structure(config: &RunConfig) -> String {
    let p = &config.params;
    let s = build_structure::<num_complex::Complex64>(p);
    let op = build_operator::<num_complex::Complex64>(p);
    let weights: Vec<(f64, ComplexMatrix)> = config.t_grid.iter().map(|&t| (t, weight_eval(p, t).1)).collect();
    match config.format {
        Format::Json => to_json(&StructureDoc {
            params: ParamsDoc::new(config),
            a: matrix_doc(&s.a),
            j: matrix_doc(&s.j),
            psi: matrix_doc(&s.psi),
            d: matrix_doc(&s.d),
            acal: matrix_doc(&s.acal),
            alphas: s.alphas.iter().copied().map(complex_doc).collect(),
            slope: complex_doc(s.slope()),
            commutator: matrix_doc(&s.commutator()),
            f2: PolyDoc::new(&op.f2),
            f1: PolyDoc::new(&op.f1),
            f0: PolyDoc::new(&op.f0),
            weight: weights.iter().map(|(t, w)| WeightSampleDoc { t: *t, w: matrix_doc(w) }).collect(),
        }),
        Format::Csv => {
            let mut rows = vec![["name", "index", "row", "col", "re", "im"].map(String::from).to_vec()];
            let mut push = |name: &str, index: usize, m: &ComplexMatrix| {
                let n = m.dim();
                for i in 0..n {
                    for j in 0..n {
                        let z = m[(i, j)];
                        rows.push(vec![
                            name.into(),
                            index.to_string(),
                            (i + 1).to_string(),
                            (j + 1).to_string(),
                            real(z.re),
                            real(z.im),
                        ]);
                    }
                }
            };
            for (name, m) in [("A", &s.a), ("J", &s.j), ("Psi", &s.psi), ("D", &s.d), ("Acal", &s.acal)] {
                push(name, 0, m);
            }
            push("commutator", 0, &s.commutator());
            for (name, poly) in [("F2", &op.f2), ("F1", &op.f1), ("F0", &op.f0)] {
                for (k, c) in poly.coeffs().iter().enumerate() {
                    push(name, k, c);
                }
            }
            for (k, (_, w)) in weights.iter().enumerate() {
                push("W", k, w);
            }
            for (k, alpha) in s.alphas.iter().enumerate() {
                rows.push(vec![
                    "alpha".into(),
                    k.to_string(),
                    String::new(),
                    String::new(),
                    real(alpha.re),
                    real(alpha.im),
                ]);
            }
            csv_string(rows)
        }
    }
}

#[derive(Serialize)]
struct OrthoEntryDoc {
    n: usize,
    #[serde(flatten)]
    poly: PolyDoc,
}

#[derive(Serialize)]
struct OrthoDoc {
    params: ParamsDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    truncation: Option<String>,
    monic: Vec<OrthoEntryDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    explicit: Option<Vec<OrthoEntryDoc>>,
}

/// Monic sequence from moments, and for `N = 2` the explicit `P_n`.
/// CSV rows are `family, n, k` followed by the flattened coefficient of `t^k`.
pub fn render_orthopoly(config: &RunConfig) -> Result<String, CliError> {
    let p = &config.params;
    let s = monic_sequence(p, config.nmax);
    let monic = polys_c64(&s);
    let explicit = if p.size() == 2 {
        Some(explicit_sequence(p, config.nmax)?)
    } else {
        None
    };
    let truncation = s.truncation().map(|t| format!("stopped at degree {}: {}", t.n, t.reason));
    Ok(match config.format {
        Format::Json => {
            let entries = |ps: &[MatrixPolynomial]| {
                ps.iter()
                    .enumerate()
                    .map(|(n, q)| OrthoEntryDoc { n, poly: PolyDoc::new(q) })
                    .collect::<Vec<_>>()
            };
            to_json(&OrthoDoc {
                params: ParamsDoc::new(config),
                truncation,
                monic: entries(&monic),
                explicit: explicit.as_deref().map(entries),
            })
        }
        Format::Csv => {
            let mut rows = vec![matrix_header(&["family", "n", "k"], p.size())];
            let families = [("monic", Some(&monic)), ("explicit", explicit.as_ref())];
            for (family, ps) in families {
                for (n, q) in ps.into_iter().flatten().enumerate() {
                    for (k, c) in q.coeffs().iter().enumerate() {
                        let mut r = vec![family.to_string(), n.to_string(), k.to_string()];
                        r.extend(csv_fields(&Value::Matrix(c.clone())));
                        rows.push(r);
                    }
                }
            }
            csv_string(rows)
        }
    })
}

#[derive(Serialize)]
struct TablesDoc {
    params: ParamsDoc,
    sources: BTreeMap<String, &'static str>,
    tables: BTreeMap<String, Vec<RowDoc>>,
}

/// A subset of the exported tables. CSV rows are `table, n` followed by the
/// flattened matrix; scalar tables use a single `value` column.
pub fn render_tables(config: &RunConfig, names: &[&str]) -> Result<String, CliError> {
    let tables: Vec<Table> = build_tables(&config.params, config.nmax)?
        .into_iter()
        .filter(|t| names.contains(&t.name.as_str()))
        .collect();
    Ok(match config.format {
        Format::Json => to_json(&TablesDoc {
            params: ParamsDoc::new(config),
            sources: tables.iter().map(|t| (t.name.clone(), t.source.as_str())).collect(),
            tables: tables.iter().map(|t| (t.name.clone(), rows_doc(t))).collect(),
        }),
        Format::Csv => {
            let mut header = matrix_header(&["table", "n"], config.params.size());
            header.push("value".into());
            let width = header.len();
            let mut rows = vec![header];
            for t in &tables {
                for (n, v) in &t.rows {
                    let mut r = vec![t.name.clone(), n.to_string()];
                    match v {
                        Value::Matrix(_) => {
                            r.extend(csv_fields(v));
                            r.push(String::new());
                        }
                        Value::Scalar(_) => {
                            r.resize(width - 1, String::new());
                            r.extend(csv_fields(v));
                        }
                    }
                    rows.push(r);
                }
            }
            csv_string(rows)
        }
    })
}

pub fn render_recurrence(config: &RunConfig) -> Result<String, CliError> {
    render_tables(config, &RECURRENCE_TABLES)
}

pub fn render_norms(config: &RunConfig) -> Result<String, CliError> {
    render_tables(config, &NORM_TABLES)
}

#[derive(Serialize)]
struct AsymptoticRowDoc {
    n: usize,
    error: f64,
    b_norm: f64,
}

#[derive(Serialize)]
struct AsymptoticDoc {
    params: ParamsDoc,
    limit: MatrixDoc,
    decreasing_from_20: bool,
    rows: Vec<AsymptoticRowDoc>,
}

/// `‖A_n/√n - L‖` and `‖B_n‖` for `n = 1..=nmax` (`N = 2`, `b ≠ 1`).
pub fn render_asymptotics(config: &RunConfig) -> Result<String, CliError> {
    let rep = asymptotic_convergence(&config.params, config.nmax)?;
    let b_norms: BTreeMap<usize, f64> = rep.b_norms.iter().copied().collect();
    let rows: Vec<AsymptoticRowDoc> = rep
        .errors
        .iter()
        .map(|&(n, error)| AsymptoticRowDoc {
            n,
            error,
            b_norm: b_norms[&n],
        })
        .collect();
    Ok(match config.format {
        Format::Json => to_json(&AsymptoticDoc {
            params: ParamsDoc::new(config),
            limit: matrix_doc(&rep.limit),
            decreasing_from_20: rep.decreasing_from(20),
            rows,
        }),
        Format::Csv => csv_string(
            std::iter::once(vec!["n".into(), "error".into(), "b_norm".into()])
                .chain(rows.iter().map(|r| vec![r.n.to_string(), real(r.error), real(r.b_norm)])),
        ),
    })
}
