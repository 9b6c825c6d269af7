//! Run configuration and parsing of command-line literals.

use std::path::PathBuf;

use matorth::WeightParams;
use num_complex::Complex64;

use crate::error::CliError;

pub const DEFAULT_SIZE: usize = 2;
pub const DEFAULT_A: &str = "1";
pub const DEFAULT_B: f64 = 2.0;
pub const DEFAULT_NMAX: usize = 10;
pub const DEFAULT_GRID: &str = "-3:3:11";
pub const DEFAULT_TOL_ABS: f64 = 1e-10;
pub const DEFAULT_TOL_REL: f64 = 1e-8;
pub const DEFAULT_DRAWS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            abs: DEFAULT_TOL_ABS,
            rel: DEFAULT_TOL_REL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: WeightParams,
    pub nmax: usize,
    pub t_grid: Vec<f64>,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Enables the randomized sweep when set.
    pub seed: Option<u64>,
    pub draws: usize,
}

impl RunConfig {
    /// Defaults: `N = 2`, `a = 1`, `b = 2`, `nmax = 10`, 11 grid points on `[-3, 3]`.
    pub fn new(params: WeightParams) -> Self {
        RunConfig {
            params,
            nmax: DEFAULT_NMAX,
            t_grid: parse_grid(DEFAULT_GRID).expect("default grid is valid"),
            tolerances: Tolerances::default(),
            output: None,
            format: Format::Json,
            seed: None,
            draws: DEFAULT_DRAWS,
        }
    }

    pub fn flagship() -> Self {
        RunConfig::new(WeightParams::new(DEFAULT_SIZE, vec![Complex64::new(1.0, 0.0)], DEFAULT_B).expect("valid"))
    }
}

/// Builds validated parameters; a single `a` value is repeated for every index.
pub fn build_params(size: usize, a: &[Complex64], b: f64) -> Result<WeightParams, CliError> {
    let expected = size.saturating_sub(1);
    let a = match a.len() {
        1 if expected > 1 => vec![a[0]; expected],
        n if n == expected => a.to_vec(),
        found => {
            return Err(CliError::ParameterCount { size, expected, found });
        }
    };
    Ok(WeightParams::new(size, a, b)?)
}

/// Comma-separated complex literals; indices in errors start at 1.
pub fn parse_a_list(list: &str) -> Result<Vec<Complex64>, CliError> {
    list.split(',')
        .enumerate()
        .map(|(i, s)| {
            parse_complex(s.trim()).ok_or_else(|| CliError::ComplexLiteral {
                index: i + 1,
                literal: s.trim().to_string(),
            })
        })
        .collect()
}

/// `"re"`, `"re+imi"`, `"re-imi"` or `"imi"`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let finite = |z: Complex64| (z.re.is_finite() && z.im.is_finite()).then_some(z);
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0)).and_then(finite);
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let z = match split {
        Some(k) => Complex64::new(body[..k].parse().ok()?, parse_imaginary(&body[k..])?),
        None => Complex64::new(0.0, parse_imaginary(body)?),
    };
    finite(z)
}

fn parse_imaginary(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse().ok(),
    }
}

/// `lo:hi:count`, evenly spaced and inclusive of both ends.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(CliError::Grid(format!("expected lo:hi:count, got {spec:?}")));
    };
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CliError::Grid(format!("{s:?} is not a finite number")))
    };
    let (lo, hi) = (number(lo)?, number(hi)?);
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| CliError::Grid(format!("{count:?} is not a point count")))?;
    if count == 0 {
        return Err(CliError::Grid("grid must contain at least one point".into()));
    }
    if lo > hi {
        return Err(CliError::Grid(format!("lower end {lo} exceeds upper end {hi}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| ((last - i as f64) * lo + i as f64 * hi) / last)
        .collect())
}

pub fn check_tolerance(name: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::Tolerance(format!("{name} must be a positive number, got {value}")))
    }
}
