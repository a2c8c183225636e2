//! Adaptive Gauss-Kronrod quadrature (7-15 pair) with interval bisection.

use alloc::format;
use alloc::string::String;

use crate::fmath::{exp, fabs, ln};

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (positive half;
/// the even-index entries are the embedded 7-point Gauss nodes).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_2,
    0.949_107_912_342_758_524_5,
    0.864_864_423_359_769_072_8,
    0.741_531_185_599_394_439_9,
    0.586_087_235_467_691_130_3,
    0.405_845_151_377_397_166_9,
    0.207_784_955_007_898_467_6,
    0.0,
];

/// Weights of the 15-point Kronrod rule.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_96,
    0.063_092_092_629_978_553_29,
    0.104_790_010_322_250_183_8,
    0.140_653_259_715_525_918_7,
    0.169_004_726_639_267_902_8,
    0.190_350_578_064_785_409_9,
    0.204_432_940_075_298_892_4,
    0.209_482_141_084_727_828_0,
];

/// Weights of the embedded 7-point Gauss rule (nodes XGK[1], XGK[3], ...).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_3,
    0.279_705_391_489_276_667_9,
    0.381_830_050_505_118_944_9,
    0.417_959_183_673_469_387_8,
];

/// Quadrature failure: the requested absolute tolerance was not met.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureFailure {
    /// Best available estimate of the integral.
    pub estimate: f64,
    /// Estimated absolute error of `estimate`.
    pub error: f64,
    /// Tolerance that was requested.
    pub tolerance: f64,
}

impl core::fmt::Display for QuadratureFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "quadrature tolerance not met: |err| ~ {:.3e} > {:.3e}",
            self.error, self.tolerance
        )
    }
}

impl core::error::Error for QuadratureFailure {}

impl QuadratureFailure {
    pub fn describe(&self) -> String {
        format!("{self}")
    }
}

/// One G7-K15 panel on [a, b]: returns (kronrod estimate, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, fabs(kronrod - gauss))
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32, worst: &mut f64) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        if err > tol {
            *worst = worst.max(err - tol);
        }
        return value;
    }
    let mid = 0.5 * (a + b);
    let half_tol = 0.5 * tol;
    adapt(f, a, mid, half_tol, depth - 1, worst) + adapt(f, mid, b, half_tol, depth - 1, worst)
}

/// Integrate `f` over [a, b] to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureFailure> {
    if a == b {
        return Ok(0.0);
    }
    let mut worst = 0.0;
    let value = adapt(&f, a, b, tol, 48, &mut worst);
    if worst > 0.0 {
        return Err(QuadratureFailure {
            estimate: value,
            error: worst,
            tolerance: tol,
        });
    }
    Ok(value)
}

/// Integrate `f` over the left tail (-inf, b] to absolute tolerance `tol`.
///
/// The tail is mapped by the substitution y = ln s, turning the unbounded
/// interval into (0, e^b]. The integrand must decay at least like a
/// Gaussian for the mapped integral to be benign.
pub fn integrate_left_tail<F: Fn(f64) -> f64>(
    f: F,
    b: f64,
    tol: f64,
) -> Result<f64, QuadratureFailure> {
    let mapped = |s: f64| if s <= 0.0 { 0.0 } else { f(ln(s)) / s };
    integrate(mapped, 0.0, exp(b), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmath::{exp, sqrt, SQRT_PI};
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn gaussian_over_wide_interval() {
        let v = integrate(|x| exp(-x * x), -8.0, 8.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, SQRT_PI, epsilon = 1e-11);
    }

    #[test]
    fn left_tail_of_gaussian() {
        let v = integrate_left_tail(|x| exp(-x * x), 0.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 0.5 * SQRT_PI, epsilon = 1e-10);
    }

    #[test]
    fn oscillatory_integrand() {
        use crate::fmath::cos;
        let v = integrate(|x| cos(10.0 * x) * exp(-x), 0.0, 4.0, 1e-12).unwrap();
        // antiderivative of cos(10x)e^{-x}: e^{-x}(10 sin(10x) - cos(10x))/101
        let exact = |x: f64| exp(-x) * (10.0 * crate::fmath::sin(10.0 * x) - cos(10.0 * x)) / 101.0;
        assert_abs_diff_eq!(v, exact(4.0) - exact(0.0), epsilon = 1e-11);
    }

    #[test]
    fn reports_failure_on_unresolvable_singularity() {
        let r = integrate(|x| 1.0 / sqrt(x), 0.0, 1.0, 1e-14);
        assert!(r.is_err());
    }
}
