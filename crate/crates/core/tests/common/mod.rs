#![allow(dead_code)]

use qmt_core::landau::{default_grid, DEFAULT_N, DEFAULT_N_SIGMA, FIELD_PARAM};
use qmt_core::{Grid2D, ParamPoint};

pub fn at_b(b: f64) -> ParamPoint {
    ParamPoint::from_pairs([(FIELD_PARAM, b)]).unwrap()
}

pub fn grid_for(b: f64) -> Grid2D {
    default_grid(b, DEFAULT_N, DEFAULT_N_SIGMA).unwrap()
}

pub fn rel_err(value: f64, expected: f64) -> f64 {
    (value - expected).abs() / expected.abs()
}
