#![allow(dead_code)]

use std::f64::consts::PI;

use matorth::WeightParams;
use num_complex::Complex64;
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn two(a: Complex64, b: f64) -> WeightParams {
    WeightParams::new(2, vec![a], b).expect("valid parameters")
}

pub fn grid() -> Vec<f64> {
    (0..11).map(|i| -3.0 + 0.6 * i as f64).collect()
}

pub fn flagship_sets() -> Vec<WeightParams> {
    vec![
        two(c(1.0, 0.0), 2.0),
        two(c(1.0, 0.0), 4.0),
        two(c(1.0, 1.0), 0.5),
        two(c(2.0, 0.0), 0.25),
    ]
}

/// Nonzero complex value with modulus in `[lo, hi]`.
pub fn nonzero_complex(lo: f64, hi: f64) -> impl Strategy<Value = Complex64> {
    (lo..=hi, 0.0..2.0 * PI).prop_map(|(r, phi)| Complex64::from_polar(r, phi))
}

/// `b` in `[lo, hi]` kept away from 1.
pub fn b_away_from_one(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..=hi).prop_filter("b must differ from 1", |b| (b - 1.0).abs() > 1e-3)
}

pub fn params(sizes: std::ops::RangeInclusive<usize>, a_max: f64, b_lo: f64, b_hi: f64) -> impl Strategy<Value = WeightParams> {
    sizes.prop_flat_map(move |n| {
        (proptest::collection::vec(nonzero_complex(0.1, a_max), n - 1), b_away_from_one(b_lo, b_hi))
            .prop_map(move |(a, b)| WeightParams::new(n, a, b).expect("valid draw"))
    })
}
