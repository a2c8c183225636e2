//! Perpetual value functions with a free take-profit boundary.
//!
//! Two stationary variants share the structure "given the stop-loss l,
//! find the take-profit u where value matching and smooth pasting hold":
//!
//! * discounting at rate λ: V'' - 2xV' - λV = 0, solved by Kummer
//!   functions of x²;
//! * opportunity cost λ: V'' - 2xV' = λ, solved by I and G.
//!
//! Both reduce to one nonlinear scalar equation for u, solved by
//! Newton-Raphson (central finite differences) with a bisection
//! fallback over u ∈ (0, 4].

use alloc::vec::Vec;

use crate::fmath::{exp, fabs};
use crate::specfun::{f_aux, g_script, int_exp_sq, kummer_m};

use super::ClassicalError;

/// Which stationary problem produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueVariant {
    Discount,
    Opportunity,
    Jump,
}

/// A solved free-boundary problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunctionSolution {
    /// Optimal take-profit boundary.
    pub u_star: f64,
    /// Solution coefficients; for [`ValueVariant::Jump`] these hold the
    /// shooting parameters (c, d) = (v'(l), I₋(l)).
    pub a0: f64,
    pub a1: f64,
    /// Nondimensional rate (2r/κ, 2c/κ, or the jump problem's λ).
    pub lambda: f64,
    /// Given stop-loss boundary.
    pub l: f64,
    /// Sampled (x, V(x)) on [l, u_star].
    pub samples: Vec<(f64, f64)>,
    pub variant: ValueVariant,
    /// |V(l)-l|, |V(u*)-u*|, |V'(u*)-1|.
    pub residuals: (f64, f64, f64),
}

pub(super) const SMOOTH_PASTING_TOL: f64 = 1e-8;

/// Newton-Raphson with central finite differences and a bisection
/// fallback on a sign change over (0, 4].
pub(super) fn newton_with_bisection_fallback<F: Fn(f64) -> Result<f64, ClassicalError>>(
    residual: F,
    u0: f64,
    what: &'static str,
) -> Result<f64, ClassicalError> {
    let h = 1e-6;
    let mut u = u0;
    for _ in 0..100 {
        let r = residual(u)?;
        if fabs(r) < 1e-12 {
            return Ok(u);
        }
        let d = (residual(u + h)? - residual(u - h)?) / (2.0 * h);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let step = r / d;
        let next = u - step;
        if !next.is_finite() || next <= 0.0 || next > 6.0 {
            break; // diverging; fall back to bisection
        }
        if fabs(step) < 1e-13 * fabs(u).max(1.0) {
            return Ok(next);
        }
        u = next;
    }

    // bracket a sign change on (0, 4]
    let mut prev_u = 0.01;
    let mut prev_r = residual(prev_u)?;
    let mut k = 1;
    while k <= 400 {
        let cand = 0.01 * (k + 1) as f64;
        let r = residual(cand)?;
        if prev_r.signum() != r.signum() {
            let (mut a, mut b, mut ra) = (prev_u, cand, prev_r);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let rm = residual(mid)?;
                if fabs(rm) < 1e-12 || b - a < 1e-14 {
                    return Ok(mid);
                }
                if ra.signum() != rm.signum() {
                    b = mid;
                } else {
                    a = mid;
                    ra = rm;
                }
            }
            return Ok(0.5 * (a + b));
        }
        prev_u = cand;
        prev_r = r;
        k += 1;
    }
    Err(ClassicalError::NoConvergence(what))
}

// ---------------------------------------------------------------------------
// Discounting variant
// ---------------------------------------------------------------------------

struct DiscountPieces {
    c00: f64,
    c01: f64,
}

impl DiscountPieces {
    fn new(l: f64, lambda: f64) -> Result<Self, ClassicalError> {
        Ok(Self {
            c00: kummer_m(0.25 * lambda, 0.5, l * l)?,
            c01: l * kummer_m(0.25 * (lambda + 2.0), 1.5, l * l)?,
        })
    }

    /// Residual of the closing equation for u, scaled by the coefficient
    /// determinant for conditioning.
    fn residual(&self, l: f64, lambda: f64, u: f64) -> Result<f64, ClassicalError> {
        let c10 = kummer_m(0.25 * lambda, 0.5, u * u)?;
        let c11 = u * kummer_m(0.25 * (lambda + 2.0), 1.5, u * u)?;
        let det = self.c00 * c11 - self.c01 * c10;
        let vprime_a0 = lambda * u * kummer_m(0.25 * (lambda + 4.0), 1.5, u * u)?;
        let vprime_a1 = kummer_m(0.25 * (lambda + 2.0), 1.5, u * u)?
            + (lambda + 2.0) / 3.0 * u * u * kummer_m(0.25 * (lambda + 6.0), 2.5, u * u)?;
        let lhs = (c11 * l - self.c01 * u) * vprime_a0 + (-c10 * l + self.c00 * u) * vprime_a1;
        Ok((lhs - det) / det)
    }
}

/// Discounted perpetual value function: given l < 0 and λ = 2r/κ > 0,
/// find u*, the coefficients, and the sampled value function.
pub fn perpetual_value_discount(l: f64, lambda: f64) -> Result<ValueFunctionSolution, ClassicalError> {
    if !(l < 0.0) {
        return Err(ClassicalError::Domain("need l < 0"));
    }
    if !(lambda > 0.0) {
        return Err(ClassicalError::Domain("need lambda > 0"));
    }
    let pieces = DiscountPieces::new(l, lambda)?;
    let u = newton_with_bisection_fallback(
        |u| pieces.residual(l, lambda, u),
        1.0,
        "discount free boundary",
    )?;

    let c10 = kummer_m(0.25 * lambda, 0.5, u * u)?;
    let c11 = u * kummer_m(0.25 * (lambda + 2.0), 1.5, u * u)?;
    let det = pieces.c00 * c11 - pieces.c01 * c10;
    let a0 = (c11 * l - pieces.c01 * u) / det;
    let a1 = (-c10 * l + pieces.c00 * u) / det;

    let value = |x: f64| -> Result<f64, ClassicalError> {
        Ok(a0 * kummer_m(0.25 * lambda, 0.5, x * x)?
            + a1 * x * kummer_m(0.25 * (lambda + 2.0), 1.5, x * x)?)
    };
    let slope = |x: f64| -> Result<f64, ClassicalError> {
        Ok(a0 * lambda * x * kummer_m(0.25 * (lambda + 4.0), 1.5, x * x)?
            + a1 * (kummer_m(0.25 * (lambda + 2.0), 1.5, x * x)?
                + (lambda + 2.0) / 3.0 * x * x * kummer_m(0.25 * (lambda + 6.0), 2.5, x * x)?))
    };

    finish_analytic(l, lambda, u, a0, a1, ValueVariant::Discount, value, slope)
}

// ---------------------------------------------------------------------------
// Opportunity-cost variant
// ---------------------------------------------------------------------------

/// Opportunity-cost perpetual value function: V'' - 2xV' = λ with value
/// matching at l and u and smooth pasting at u; solution
/// V = a₀ + a₁ I(x) + λ G(x).
pub fn perpetual_value_opportunity(
    l: f64,
    lambda: f64,
) -> Result<ValueFunctionSolution, ClassicalError> {
    if !(l < 0.0) {
        return Err(ClassicalError::Domain("need l < 0"));
    }
    if !(lambda > 0.0) {
        return Err(ClassicalError::Domain("need lambda > 0"));
    }
    let target_l = l - lambda * g_script(l)?;
    let il = int_exp_sq(l)?;
    let residual = |u: f64| -> Result<f64, ClassicalError> {
        let target_u = u - lambda * g_script(u)?;
        let iu = int_exp_sq(u)?;
        Ok(exp(u * u) * (target_u - target_l) / (iu - il) - (1.0 - lambda * f_aux(u)?))
    };
    let u = newton_with_bisection_fallback(residual, 1.0, "opportunity free boundary")?;

    let a1 = (u - lambda * g_script(u)? - target_l) / (int_exp_sq(u)? - il);
    let a0 = target_l - a1 * il;
    let value = |x: f64| -> Result<f64, ClassicalError> {
        Ok(a0 + a1 * int_exp_sq(x)? + lambda * g_script(x)?)
    };
    let slope = |x: f64| -> Result<f64, ClassicalError> { Ok(a1 * exp(x * x) + lambda * f_aux(x)?) };

    finish_analytic(l, lambda, u, a0, a1, ValueVariant::Opportunity, value, slope)
}

#[allow(clippy::too_many_arguments)]
fn finish_analytic(
    l: f64,
    lambda: f64,
    u: f64,
    a0: f64,
    a1: f64,
    variant: ValueVariant,
    value: impl Fn(f64) -> Result<f64, ClassicalError>,
    slope: impl Fn(f64) -> Result<f64, ClassicalError>,
) -> Result<ValueFunctionSolution, ClassicalError> {
    let residuals = (
        fabs(value(l)? - l),
        fabs(value(u)? - u),
        fabs(slope(u)? - 1.0),
    );
    if residuals.0 > SMOOTH_PASTING_TOL
        || residuals.1 > SMOOTH_PASTING_TOL
        || residuals.2 > SMOOTH_PASTING_TOL
    {
        return Err(ClassicalError::NoConvergence("smooth pasting residuals"));
    }
    let m = 100usize;
    let mut samples = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let x = l + (u - l) * i as f64 / m as f64;
        samples.push((x, value(x)?));
    }
    Ok(ValueFunctionSolution {
        u_star: u,
        a0,
        a1,
        lambda,
        l,
        samples,
        variant,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discount_smooth_pasting_residuals() {
        let sol = perpetual_value_discount(-2.0, 0.1).unwrap();
        assert!(sol.residuals.0 < 1e-8);
        assert!(sol.residuals.1 < 1e-8);
        assert!(sol.residuals.2 < 1e-8);
        assert!(sol.u_star > 0.0 && sol.u_star < 4.0);
        assert!(sol.l < sol.u_star);
    }

    #[test]
    fn discount_matches_dense_scan_oracle() {
        let (l, lambda) = (-2.0, 0.1);
        let sol = perpetual_value_discount(l, lambda).unwrap();
        // dense 1e-4 scan of the residual for its sign change
        let pieces = DiscountPieces::new(l, lambda).unwrap();
        let mut root = f64::NAN;
        let mut prev = pieces.residual(l, lambda, 1e-4).unwrap();
        let mut u = 2e-4;
        while u <= 4.0 {
            let r = pieces.residual(l, lambda, u).unwrap();
            if prev.signum() != r.signum() {
                root = u - 0.5e-4;
                break;
            }
            prev = r;
            u += 1e-4;
        }
        assert!(root.is_finite(), "dense scan found no sign change");
        assert!(
            (sol.u_star - root).abs() < 1e-4,
            "u* = {} vs scan {}",
            sol.u_star,
            root
        );
    }

    #[test]
    fn discount_boundary_shrinks_with_discounting() {
        let mut last = f64::INFINITY;
        for lambda in [0.05, 0.1, 0.2, 0.5, 1.0] {
            let sol = perpetual_value_discount(-2.0, lambda).unwrap();
            assert!(
                sol.u_star < last,
                "u* not decreasing at lambda={lambda}: {} >= {last}",
                sol.u_star
            );
            last = sol.u_star;
        }
    }

    #[test]
    fn opportunity_smooth_pasting_residuals() {
        let sol = perpetual_value_opportunity(-2.0, 0.1).unwrap();
        assert!(sol.residuals.0 < 1e-8);
        assert!(sol.residuals.1 < 1e-8);
        assert!(sol.residuals.2 < 1e-8);
    }

    #[test]
    fn opportunity_boundary_shrinks_with_cost() {
        let mut last = f64::INFINITY;
        for lambda in [0.1, 0.3, 0.6, 1.0] {
            let sol = perpetual_value_opportunity(-2.0, lambda).unwrap();
            assert!(sol.u_star < last);
            last = sol.u_star;
        }
    }

    #[test]
    fn invalid_arguments_are_rejected() {
        assert!(perpetual_value_discount(0.5, 0.1).is_err());
        assert!(perpetual_value_discount(-1.0, 0.0).is_err());
        assert!(perpetual_value_opportunity(-1.0, -0.2).is_err());
    }
}
