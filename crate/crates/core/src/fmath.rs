//! Thin wrappers over `libm` so the same float operations are used on
//! `std` and `no_std` builds (bit-identical results either way).

#![allow(dead_code)]

pub(crate) use libm::{
    cos, erf, erfc, exp, expm1, fabs, floor, log as ln, log1p as ln_1p, pow as powf, sin, sqrt,
};

pub(crate) const SQRT_PI: f64 = 1.772_453_850_905_516_027_3;
pub(crate) const SQRT_2PI: f64 = 2.506_628_274_631_000_502_4;
pub(crate) const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_9;
pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}
