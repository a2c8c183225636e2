//! Expectation and variance of the trade duration when the trade runs
//! until a barrier is hit (no horizon).
//!
//! The mean solves (θ-x)g' + g''/2 = -1 with zero boundary values; by
//! variation of constants the solution is a combination of I(x-θ) and
//! G(x-θ). The second moment solves the same operator with right-hand
//! side -2g⁽¹⁾ and is produced by integrating the Green's function of
//! the operator against the mean.

use crate::fmath::exp;
use crate::quad;
use crate::specfun::{g_script, int_exp_sq};

use super::ClassicalError;

/// First two moments of the exit time from x = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

fn check_bounds(pi_low: f64, pi_high: f64) -> Result<(), ClassicalError> {
    if !(pi_low < 0.0 && pi_high > 0.0) {
        return Err(ClassicalError::Domain("need pi_low < 0 < pi_high"));
    }
    Ok(())
}

/// g⁽¹⁾(x): expected exit time started from x.
fn g1(x: f64, theta: f64, pi_low: f64, pi_high: f64) -> Result<f64, ClassicalError> {
    let gl = g_script(pi_low - theta)?;
    let gu = g_script(pi_high - theta)?;
    let il = int_exp_sq(pi_low - theta)?;
    let iu = int_exp_sq(pi_high - theta)?;
    let gx = g_script(x - theta)?;
    let ix = int_exp_sq(x - theta)?;
    Ok(2.0 * ((gu - gl) / (iu - il) * (ix - il) - (gx - gl)))
}

/// Expected duration of the barrier-terminated trade started at x = 0.
pub fn duration_mean(theta: f64, pi_low: f64, pi_high: f64) -> Result<f64, ClassicalError> {
    check_bounds(pi_low, pi_high)?;
    g1(0.0, theta, pi_low, pi_high)
}

/// Green's function of (θ-x)∂ₓ + ∂ₓₓ/2 with zero boundary values at
/// π_low and π_high; piecewise in y with the weight e^{-(y-θ)²}.
pub fn greens_function(
    theta: f64,
    pi_low: f64,
    pi_high: f64,
    x: f64,
    y: f64,
) -> Result<f64, ClassicalError> {
    check_bounds(pi_low, pi_high)?;
    let il = int_exp_sq(pi_low - theta)?;
    let iu = int_exp_sq(pi_high - theta)?;
    let ix = int_exp_sq(x - theta)?;
    let iy = int_exp_sq(y - theta)?;
    let w = iu - il;
    let weight = exp(-(y - theta) * (y - theta));
    Ok(if y <= x {
        2.0 * weight * (iy - il) * (ix - iu) / w
    } else {
        2.0 * weight * (iy - iu) * (ix - il) / w
    })
}

/// Mean, second moment, and variance of the exit time from x = 0.
///
/// The second moment is g⁽²⁾(0) = -2 ∫ 𝔾(0,y) g⁽¹⁾(y) dy over
/// [π_low, π_high]; the integral is split at the Green's-function kink
/// at y = 0.
pub fn duration_variance(
    theta: f64,
    pi_low: f64,
    pi_high: f64,
) -> Result<DurationMoments, ClassicalError> {
    check_bounds(pi_low, pi_high)?;
    let mean = g1(0.0, theta, pi_low, pi_high)?;

    // components of G(0, y) that do not depend on y
    let il = int_exp_sq(pi_low - theta)?;
    let iu = int_exp_sq(pi_high - theta)?;
    let i0 = int_exp_sq(-theta)?;
    let w = iu - il;

    let integrand_left = |y: f64| {
        // y <= 0 branch
        let iy = int_exp_sq(y - theta).unwrap_or(f64::NAN);
        let g1y = g1(y, theta, pi_low, pi_high).unwrap_or(f64::NAN);
        2.0 * exp(-(y - theta) * (y - theta)) * (iy - il) * (i0 - iu) / w * g1y
    };
    let integrand_right = |y: f64| {
        let iy = int_exp_sq(y - theta).unwrap_or(f64::NAN);
        let g1y = g1(y, theta, pi_low, pi_high).unwrap_or(f64::NAN);
        2.0 * exp(-(y - theta) * (y - theta)) * (iy - iu) * (i0 - il) / w * g1y
    };

    let tol = 1e-9;
    let left = quad::integrate(integrand_left, pi_low, 0.0, tol)?;
    let right = quad::integrate(integrand_right, 0.0, pi_high, tol)?;
    let second_moment = -2.0 * (left + right);

    Ok(DurationMoments {
        mean,
        second_moment,
        variance: second_moment - mean * mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn collapsing_boundaries_kill_the_duration() {
        let m = duration_mean(0.0, -1e-4, 1e-4).unwrap();
        assert!(m > 0.0 && m < 1e-6, "mean = {m}");
        let v = duration_variance(0.0, -1e-4, 1e-4).unwrap();
        assert!(v.variance >= -1e-18 && v.variance < 1e-10, "var = {}", v.variance);
    }

    #[test]
    fn boundary_values_vanish() {
        // the mean exit time from either barrier is zero
        let g_at_low = super::g1(-1.5, 0.3, -1.5, 2.0).unwrap();
        let g_at_high = super::g1(2.0, 0.3, -1.5, 2.0).unwrap();
        assert_abs_diff_eq!(g_at_low, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g_at_high, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn greens_function_branches_agree_on_the_diagonal() {
        for &(theta, lo, hi, x) in &[(0.0, -1.0, 1.0, 0.3), (1.0, -2.0, 1.5, -0.4), (0.5, -0.7, 2.0, 0.0)] {
            let left = greens_function(theta, lo, hi, x, x - 1e-12).unwrap();
            let right = greens_function(theta, lo, hi, x, x + 1e-12).unwrap();
            assert_abs_diff_eq!(left, right, epsilon = 1e-9 * (1.0 + left.abs()));
        }
    }

    #[test]
    fn greens_function_is_nonpositive() {
        for i in 0..20 {
            let y = -0.95 + 0.1 * i as f64;
            let g = greens_function(0.2, -1.0, 1.2, 0.0, y).unwrap();
            assert!(g <= 1e-15, "G(0, {y}) = {g}");
        }
    }

    #[test]
    fn variance_is_nonnegative_on_a_parameter_sweep() {
        for &(theta, lo, hi) in &[
            (0.0, -0.7071, 0.7071),
            (1.0, -2.0, 1.0),
            (0.5, -1.0, 0.5),
            (0.0, -2.0, 2.0),
        ] {
            let m = duration_variance(theta, lo, hi).unwrap();
            assert!(m.variance >= 0.0, "variance {} at ({theta},{lo},{hi})", m.variance);
            assert!(m.mean > 0.0);
            assert!(m.second_moment >= m.mean * m.mean);
        }
    }
}
