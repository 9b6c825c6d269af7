//! Recurrence, norm and normalization tables and their JSON/CSV forms.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use matorth::hermite2x2::{gamma_seq, monic_and_normalized_recurrence, normalization_factors, norms, orthonormal_recurrence};
use matorth::orthogonalize::{monic_sequence, orthonormalize_sequence, recurrence_from_sequence, recurrence_residuals};
use matorth::{ComplexMatrix, ExtendedComplex, Matrix, MatrixPolynomial, WeightParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

type E = ExtendedComplex;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Scalar(f64),
    Matrix(ComplexMatrix),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    ClosedForm,
    Moments,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::ClosedForm => "closed-form",
            Source::Moments => "moments",
        }
    }
}

/// One sequence indexed by `n`, rows in increasing `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub source: Source,
    pub rows: Vec<(usize, Value)>,
}

impl Table {
    fn matrices(name: &str, source: Source, rows: impl IntoIterator<Item = (usize, ComplexMatrix)>) -> Self {
        Table {
            name: name.into(),
            source,
            rows: rows.into_iter().map(|(n, m)| (n, Value::Matrix(m))).collect(),
        }
    }

    /// Matrix rows keyed by `n`; scalar rows are left out.
    pub fn matrix_rows(&self) -> BTreeMap<usize, ComplexMatrix> {
        self.rows
            .iter()
            .filter_map(|(n, v)| match v {
                Value::Matrix(m) => Some((*n, m.clone())),
                Value::Scalar(_) => None,
            })
            .collect()
    }
}

pub const RECURRENCE_TABLES: [&str; 7] = ["A", "B", "B_hat", "C_hat", "A_tilde", "B_tilde", "C_tilde"];
pub const NORM_TABLES: [&str; 6] = ["norm_monic", "norm_rodrigues", "Delta", "gamma", "Gamma", "G"];

/// Every exported table. `N = 2` uses the closed forms and adds the
/// Rodrigues-normalized sequences; other sizes use the moment route.
pub fn build_tables(p: &WeightParams, nmax: usize) -> Result<Vec<Table>, CliError> {
    if p.size() == 2 {
        closed_form_tables(p, nmax)
    } else {
        moment_tables(p, nmax)
    }
}

fn closed_form_tables(p: &WeightParams, nmax: usize) -> Result<Vec<Table>, CliError> {
    let cf = Source::ClosedForm;
    let on = (0..=nmax).map(|n| orthonormal_recurrence(p, n)).collect::<Result<Vec<_>, _>>()?;
    let mn = (0..=nmax)
        .map(|n| monic_and_normalized_recurrence(p, n))
        .collect::<Result<Vec<_>, _>>()?;
    let nf = (0..=nmax).map(|n| normalization_factors(p, n)).collect::<Result<Vec<_>, _>>()?;
    let nm = (0..=nmax).map(|n| norms(p, n)).collect::<Result<Vec<_>, _>>()?;
    let from_one = |f: &dyn Fn(usize) -> ComplexMatrix| (1..=nmax).map(|n| (n, f(n))).collect::<Vec<_>>();
    let from_zero = |f: &dyn Fn(usize) -> ComplexMatrix| (0..=nmax).map(|n| (n, f(n))).collect::<Vec<_>>();
    Ok(vec![
        Table::matrices("A", cf, from_one(&|n| on[n].a.clone().expect("n >= 1"))),
        Table::matrices("B", cf, from_zero(&|n| on[n].b.clone())),
        Table::matrices("B_hat", cf, from_zero(&|n| mn[n].b_hat.clone())),
        Table::matrices("C_hat", cf, from_one(&|n| mn[n].c_hat.clone())),
        Table::matrices("A_tilde", cf, from_one(&|n| mn[n].a_tilde.clone().expect("n >= 1"))),
        Table::matrices("B_tilde", cf, from_zero(&|n| mn[n].b_tilde.clone())),
        Table::matrices("C_tilde", cf, from_one(&|n| mn[n].c_tilde.clone())),
        Table::matrices("norm_monic", cf, from_zero(&|n| nm[n].monic.clone())),
        Table::matrices("norm_rodrigues", cf, from_zero(&|n| nm[n].rodrigues.clone())),
        Table::matrices("Delta", cf, from_zero(&|n| nf[n].delta.clone())),
        Table {
            name: "gamma".into(),
            source: cf,
            rows: (0..=nmax + 1).map(|n| (n, Value::Scalar(gamma_seq(p, n)))).collect(),
        },
        Table::matrices("Gamma", cf, from_zero(&|n| nf[n].gamma.clone())),
        Table::matrices("G", cf, from_zero(&|n| nf[n].g.clone())),
    ])
}

fn moment_tables(p: &WeightParams, nmax: usize) -> Result<Vec<Table>, CliError> {
    let s = monic_sequence(p, nmax + 1);
    if let Some(t) = s.truncation() {
        return Err(CliError::Truncated {
            n: t.n,
            reason: t.reason.to_string(),
        });
    }
    let ortho = orthonormalize_sequence(&s)?;
    let monic = recurrence_from_sequence(&s)?;
    let m = Source::Moments;
    let pick = |v: &[ComplexMatrix], range: std::ops::RangeInclusive<usize>| {
        range.map(|n| (n, v[n].clone())).collect::<Vec<_>>()
    };
    Ok(vec![
        Table::matrices("A", m, pick(&ortho.table.a, 1..=nmax)),
        Table::matrices("B", m, pick(&ortho.table.b, 0..=nmax)),
        Table::matrices("B_hat", m, pick(&monic.b, 0..=nmax)),
        Table::matrices("C_hat", m, pick(&monic.c, 1..=nmax)),
        Table::matrices("norm_monic", m, (0..=nmax).map(|n| (n, s.norm_c64(n)))),
        Table::matrices("Delta", m, pick(&ortho.deltas, 0..=nmax)),
    ])
}

/// Re-verifies the monic and orthonormal recurrence identities using
/// `B̂, Ĉ, A, B, Δ` from `tables` against an independently computed monic
/// sequence. Returns the largest relative coefficient residual.
pub fn recurrence_identity_residual(p: &WeightParams, tables: &BTreeMap<String, Table>, nmax: usize) -> Result<f64, CliError> {
    let get = |name: &str| {
        tables
            .get(name)
            .map(Table::matrix_rows)
            .ok_or_else(|| CliError::MissingTable(name.into()))
    };
    let (b_hat, c_hat, a, b, delta) = (get("B_hat")?, get("C_hat")?, get("A")?, get("B")?, get("Delta")?);
    let s = monic_sequence(p, nmax + 1);
    if s.len() < nmax + 2 {
        let t = s.truncation().expect("short sequences record a truncation");
        return Err(CliError::Truncated {
            n: t.n,
            reason: t.reason.to_string(),
        });
    }
    let dim = p.size();
    let lookup = |rows: &BTreeMap<usize, ComplexMatrix>, name: &str, n: usize| -> Result<Matrix<E>, CliError> {
        rows.get(&n)
            .map(Matrix::from_c64)
            .ok_or_else(|| CliError::MissingTable(format!("{name}[{n}]")))
    };
    let zero = Matrix::<E>::zeros(dim);

    let monic_a = vec![Matrix::<E>::identity(dim); nmax + 2];
    let monic_b = (0..=nmax).map(|n| lookup(&b_hat, "B_hat", n)).collect::<Result<Vec<_>, _>>()?;
    let mut monic_c = vec![zero.clone()];
    for n in 1..=nmax {
        monic_c.push(lookup(&c_hat, "C_hat", n)?);
    }
    let monic = recurrence_residuals(&monic_a, &monic_b, &monic_c, &s.polys()[..=nmax + 1]);

    let mut on_a = vec![zero.clone()];
    let mut on_c = vec![zero];
    for n in 1..=nmax {
        let an = lookup(&a, "A", n)?;
        on_c.push(an.adjoint());
        on_a.push(an);
    }
    let on_b = (0..nmax).map(|n| lookup(&b, "B", n)).collect::<Result<Vec<_>, _>>()?;
    let ortho_polys: Vec<MatrixPolynomial<E>> = (0..=nmax)
        .map(|n| Ok(s.polys()[n].left_mul(&lookup(&delta, "Delta", n)?)))
        .collect::<Result<_, CliError>>()?;
    let ortho = recurrence_residuals(&on_a, &on_b, &on_c, &ortho_polys);

    Ok(monic.into_iter().chain(ortho).fold(0.0, f64::max))
}

/// `[re, im]`.
pub type ComplexDoc = [f64; 2];
/// Row-major `N×N` matrix of `[re, im]` pairs.
pub type MatrixDoc = Vec<Vec<ComplexDoc>>;

pub fn complex_doc(z: Complex64) -> ComplexDoc {
    [z.re, z.im]
}

pub fn matrix_doc(m: &ComplexMatrix) -> MatrixDoc {
    let n = m.dim();
    (0..n).map(|i| (0..n).map(|j| complex_doc(m[(i, j)])).collect()).collect()
}

pub fn matrix_from_doc(doc: &MatrixDoc) -> Option<ComplexMatrix> {
    let rows: Vec<Vec<Complex64>> = doc
        .iter()
        .map(|r| r.iter().map(|z| Complex64::new(z[0], z[1])).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).ok()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub size: usize,
    pub a: Vec<ComplexDoc>,
    pub b: f64,
    pub nmax: usize,
    pub grid: Vec<f64>,
    pub tol_abs: f64,
    pub tol_rel: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl ParamsDoc {
    pub fn new(config: &RunConfig) -> Self {
        ParamsDoc {
            size: config.params.size(),
            a: config.params.a().iter().copied().map(complex_doc).collect(),
            b: config.params.b(),
            nmax: config.nmax,
            grid: config.t_grid.clone(),
            tol_abs: config.tolerances.abs,
            tol_rel: config.tolerances.rel,
            seed: config.seed,
        }
    }

    pub fn weight_params(&self) -> Result<WeightParams, CliError> {
        let a = self.a.iter().map(|z| Complex64::new(z[0], z[1])).collect();
        Ok(WeightParams::new(self.size, a, self.b)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueDoc {
    Scalar(f64),
    Matrix(MatrixDoc),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowDoc {
    pub n: usize,
    pub value: ValueDoc,
}

/// One exported table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableDoc {
    pub params: ParamsDoc,
    pub table: String,
    pub source: String,
    pub rows: Vec<RowDoc>,
}

pub fn rows_doc(table: &Table) -> Vec<RowDoc> {
    table
        .rows
        .iter()
        .map(|(n, v)| RowDoc {
            n: *n,
            value: match v {
                Value::Scalar(x) => ValueDoc::Scalar(*x),
                Value::Matrix(m) => ValueDoc::Matrix(matrix_doc(m)),
            },
        })
        .collect()
}

impl TableDoc {
    pub fn new(config: &RunConfig, table: &Table) -> Self {
        TableDoc {
            params: ParamsDoc::new(config),
            table: table.name.clone(),
            source: table.source.as_str().into(),
            rows: rows_doc(table),
        }
    }

    pub fn to_table(&self) -> Option<Table> {
        let source = match self.source.as_str() {
            "closed-form" => Source::ClosedForm,
            "moments" => Source::Moments,
            _ => return None,
        };
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let v = match &r.value {
                    ValueDoc::Scalar(x) => Value::Scalar(*x),
                    ValueDoc::Matrix(m) => Value::Matrix(matrix_from_doc(m)?),
                };
                Some((r.n, v))
            })
            .collect::<Option<_>>()?;
        Some(Table {
            name: self.table.clone(),
            source,
            rows,
        })
    }
}

/// CSV header: `n` then `v{i}{j}_re, v{i}{j}_im` row-major (1-based), or
/// `n, value` for scalar tables.
pub fn csv_header(dim: Option<usize>) -> Vec<String> {
    let mut header = vec!["n".to_string()];
    match dim {
        Some(d) => {
            for i in 1..=d {
                for j in 1..=d {
                    header.push(format!("v{i}{j}_re"));
                    header.push(format!("v{i}{j}_im"));
                }
            }
        }
        None => header.push("value".into()),
    }
    header
}

/// Shortest round-trip decimal form, switching to exponent notation for very
/// small or large magnitudes.
pub fn real(x: f64) -> String {
    format!("{x:?}")
}

pub fn csv_fields(value: &Value) -> Vec<String> {
    match value {
        Value::Scalar(x) => vec![real(*x)],
        Value::Matrix(m) => m
            .as_slice()
            .iter()
            .flat_map(|z| [real(z.re), real(z.im)])
            .collect(),
    }
}

pub fn table_csv(table: &Table) -> Result<String, csv::Error> {
    let dim = table.rows.iter().find_map(|(_, v)| match v {
        Value::Matrix(m) => Some(m.dim()),
        Value::Scalar(_) => None,
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(csv_header(dim))?;
    for (n, v) in &table.rows {
        let mut record = vec![n.to_string()];
        record.extend(csv_fields(v));
        w.write_record(record)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string(value).expect("documents serialize");
    s.push('\n');
    s
}

/// Writes one file per table into the directory `config.output`, named
/// `<table>.json` or `<table>.csv`. Returns the written paths in table order.
pub fn export_tables(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let dir = config.output.clone().unwrap_or_else(|| PathBuf::from("."));
    let tables = build_tables(&config.params, config.nmax)?;
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    tables
        .iter()
        .map(|t| {
            let path = dir.join(format!("{}.{}", t.name, config.format.extension()));
            let body = match config.format {
                Format::Json => to_json(&TableDoc::new(config, t)),
                Format::Csv => table_csv(t).map_err(|e| CliError::Format {
                    path: path.clone(),
                    message: e.to_string(),
                })?,
            };
            fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

pub fn read_table_json(path: &Path) -> Result<TableDoc, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.into(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_doc_round_trips() {
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(1.0, -2.0), Complex64::new(0.1, 0.0)],
            vec![Complex64::new(-3.5, 1e-300), Complex64::new(0.0, 7.0)],
        ])
        .unwrap();
        let doc = matrix_doc(&m);
        assert_eq!(doc[0][0], [1.0, -2.0]);
        assert_eq!(doc[1][0], [-3.5, 1e-300]);
        let text = serde_json::to_string(&doc).unwrap();
        let back: MatrixDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(matrix_from_doc(&back).unwrap(), m);
    }

    #[test]
    fn csv_layout_is_row_major() {
        assert_eq!(
            csv_header(Some(2)),
            ["n", "v11_re", "v11_im", "v12_re", "v12_im", "v21_re", "v21_im", "v22_re", "v22_im"]
        );
        assert_eq!(csv_header(None), ["n", "value"]);
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(1.0, 2.0), Complex64::new(3.0, 4.0)],
            vec![Complex64::new(5.0, 6.0), Complex64::new(7.0, 8.0)],
        ])
        .unwrap();
        assert_eq!(csv_fields(&Value::Matrix(m)), ["1.0", "2.0", "3.0", "4.0", "5.0", "6.0", "7.0", "8.0"]);
    }

    #[test]
    fn closed_form_tables_have_expected_ranges() {
        let p = WeightParams::new(2, vec![Complex64::new(1.0, 0.0)], 2.0).unwrap();
        let tables = build_tables(&p, 5).unwrap();
        let by_name = |name: &str| tables.iter().find(|t| t.name == name).unwrap();
        assert_eq!(by_name("A").rows.first().unwrap().0, 1);
        assert_eq!(by_name("A").rows.len(), 5);
        assert_eq!(by_name("B").rows.len(), 6);
        assert_eq!(by_name("gamma").rows.len(), 7);
        // γ_0 = 2
        assert_eq!(by_name("gamma").rows[0].1, Value::Scalar(2.0));
        for name in RECURRENCE_TABLES.iter().chain(&NORM_TABLES) {
            assert_eq!(by_name(name).source, Source::ClosedForm);
        }
    }

    #[test]
    fn moment_tables_for_size_three() {
        let p = WeightParams::new(3, vec![Complex64::new(1.0, 0.0); 2], 2.0).unwrap();
        let tables = build_tables(&p, 4).unwrap();
        let names: Vec<&str> = tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["A", "B", "B_hat", "C_hat", "norm_monic", "Delta"]);
        assert!(tables.iter().all(|t| t.source == Source::Moments));
        let map: BTreeMap<String, Table> = tables.into_iter().map(|t| (t.name.clone(), t)).collect();
        assert!(recurrence_identity_residual(&p, &map, 4).unwrap() < 1e-9);
    }
}
