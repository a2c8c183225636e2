//! Ornstein-Uhlenbeck process model: dimensional parameters, OLS
//! calibration from price series, and the nondimensionalization that the
//! solvers work in.
//!
//! The raw process dx' = κ'(θ' - x')dt' + σ'dW is rescaled by
//! t = κ't', x = (√κ'/σ') x', which sends the diffusion to
//! dx = (θ - x)dt + dW with steady-state standard deviation 1/√2. The
//! horizon enters through Υ = (1 - e^{-2T})/2 ∈ (0, 1/2), and the solver
//! evaluation point is ϖ = -√(1-2Υ)·θ. Problems with θ < 0 are reflected
//! (x → -x) onto θ ≥ 0; rules map back by negating and swapping bounds.

use alloc::vec::Vec;

use crate::fmath::{expm1, ln_1p, sqrt};

/// Errors from model construction, calibration, and the horizon maps.
#[derive(Debug, Clone, PartialEq)]
pub enum OuError {
    /// Fewer than two regression rows.
    InsufficientData,
    /// cov[X, X] = 0: the deviation series is constant.
    DegenerateRegressor,
    /// 1 - e^{-2T} rounds to 1 in double precision (T too large for the
    /// Υ parametrization; use the stationary solvers instead).
    HorizonOverflow,
    /// Argument outside the mathematical domain of the map.
    Domain(&'static str),
    /// A structural parameter violates its invariant.
    InvalidParameter(&'static str),
}

impl core::fmt::Display for OuError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::InsufficientData => write!(f, "calibration needs at least two rows"),
            Self::DegenerateRegressor => write!(f, "cov[X,X] = 0: constant deviation series"),
            Self::HorizonOverflow => write!(f, "horizon too large: 1 - exp(-2T) rounds to 1"),
            Self::Domain(msg) => write!(f, "domain error: {msg}"),
            Self::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for OuError {}

// ---------------------------------------------------------------------------
// Dimensional types
// ---------------------------------------------------------------------------

/// Raw (dimensional) OU parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuParams {
    /// Mean-reversion rate κ' (1/time).
    pub kappa_raw: f64,
    /// Equilibrium level θ' (price units).
    pub theta_raw: f64,
    /// Diffusion coefficient σ' (price/√time).
    pub sigma_raw: f64,
    /// Steady-state standard deviation Ω' = σ'/√(2κ') (price units).
    pub omega_raw: f64,
}

impl OuParams {
    pub fn new(kappa_raw: f64, theta_raw: f64, sigma_raw: f64) -> Result<Self, OuError> {
        if !(kappa_raw > 0.0) {
            return Err(OuError::InvalidParameter("kappa_raw must be positive"));
        }
        if !(sigma_raw > 0.0) {
            return Err(OuError::InvalidParameter("sigma_raw must be positive"));
        }
        Ok(Self {
            kappa_raw,
            theta_raw,
            sigma_raw,
            omega_raw: sigma_raw / sqrt(2.0 * kappa_raw),
        })
    }
}

/// Raw (dimensional) trading rule: stop-loss, profit-taking, horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradingRuleRaw {
    pub pi_low_raw: f64,
    pub pi_high_raw: f64,
    pub t_raw: f64,
}

impl TradingRuleRaw {
    pub fn new(pi_low_raw: f64, pi_high_raw: f64, t_raw: f64) -> Result<Self, OuError> {
        if !(pi_low_raw < 0.0 && pi_high_raw > 0.0) {
            return Err(OuError::InvalidParameter("need pi_low_raw < 0 < pi_high_raw"));
        }
        if !(t_raw > 0.0) {
            return Err(OuError::InvalidParameter("t_raw must be positive"));
        }
        Ok(Self {
            pi_low_raw,
            pi_high_raw,
            t_raw,
        })
    }
}

// ---------------------------------------------------------------------------
// Nondimensional problem
// ---------------------------------------------------------------------------

/// Nondimensional problem instance consumed by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledProblem {
    /// Dimensionless equilibrium θ = √κ' θ'/σ'.
    pub theta: f64,
    /// Dimensionless horizon T = κ'T'.
    pub horizon: f64,
    /// Υ = (1 - e^{-2T})/2.
    pub upsilon: f64,
    /// ϖ = -√(1-2Υ)·θ.
    pub varpi: f64,
    /// Dimensionless stop-loss (< 0).
    pub pi_low: f64,
    /// Dimensionless profit-taking level (> 0).
    pub pi_high: f64,
}

impl ScaledProblem {
    /// Build from dimensionless θ, horizon T and bounds.
    pub fn from_horizon(theta: f64, horizon: f64, pi_low: f64, pi_high: f64) -> Result<Self, OuError> {
        let upsilon = upsilon_of_horizon(horizon)?;
        Self::assemble(theta, horizon, upsilon, pi_low, pi_high)
    }

    /// Build from dimensionless θ, Υ and bounds.
    pub fn from_upsilon(theta: f64, upsilon: f64, pi_low: f64, pi_high: f64) -> Result<Self, OuError> {
        let horizon = horizon_of_upsilon(upsilon)?;
        Self::assemble(theta, horizon, upsilon, pi_low, pi_high)
    }

    fn assemble(theta: f64, horizon: f64, upsilon: f64, pi_low: f64, pi_high: f64) -> Result<Self, OuError> {
        if !(pi_low < 0.0 && pi_high > 0.0) {
            return Err(OuError::InvalidParameter("need pi_low < 0 < pi_high"));
        }
        Ok(Self {
            theta,
            horizon,
            upsilon,
            varpi: -sqrt(1.0 - 2.0 * upsilon) * theta,
            pi_low,
            pi_high,
        })
    }

    /// Reflect x → -x so the solver always sees θ ≥ 0. Returns the
    /// equivalent problem and whether a reflection was applied.
    pub fn normalize_theta(&self) -> (Self, bool) {
        if self.theta >= 0.0 {
            return (*self, false);
        }
        let reflected = Self {
            theta: -self.theta,
            horizon: self.horizon,
            upsilon: self.upsilon,
            varpi: -self.varpi,
            pi_low: -self.pi_high,
            pi_high: -self.pi_low,
        };
        (reflected, true)
    }
}

/// Υ = (1 - e^{-2T})/2 for T > 0.
pub fn upsilon_of_horizon(horizon: f64) -> Result<f64, OuError> {
    if !(horizon > 0.0) {
        return Err(OuError::Domain("horizon must be positive"));
    }
    let upsilon = -0.5 * expm1(-2.0 * horizon);
    if upsilon >= 0.5 {
        return Err(OuError::HorizonOverflow);
    }
    Ok(upsilon)
}

/// Inverse map T = -ln(1 - 2Υ)/2 for Υ ∈ (0, 1/2).
pub fn horizon_of_upsilon(upsilon: f64) -> Result<f64, OuError> {
    if !(upsilon > 0.0 && upsilon < 0.5) {
        return Err(OuError::Domain("upsilon must lie in (0, 1/2)"));
    }
    Ok(-0.5 * ln_1p(-2.0 * upsilon))
}

/// Map raw parameters and a raw rule onto a [`ScaledProblem`].
pub fn nondimensionalize(params: &OuParams, rule: &TradingRuleRaw) -> Result<ScaledProblem, OuError> {
    let scale = sqrt(params.kappa_raw) / params.sigma_raw;
    ScaledProblem::from_horizon(
        scale * params.theta_raw,
        params.kappa_raw * rule.t_raw,
        scale * rule.pi_low_raw,
        scale * rule.pi_high_raw,
    )
}

/// Given the optimal rule for -θ (θ < 0), return the rule to use at θ:
/// bounds are negated and swapped. Identity for θ ≥ 0.
pub fn reflect_rule(theta: f64, pi_low: f64, pi_high: f64) -> (f64, f64) {
    if theta >= 0.0 {
        (pi_low, pi_high)
    } else {
        (-pi_high, -pi_low)
    }
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

/// One trading opportunity: the observed price path and the forecast
/// target E₀[P_T] it was entered against.
#[derive(Debug, Clone, PartialEq)]
pub struct Opportunity {
    pub target: f64,
    pub prices: Vec<f64>,
}

/// A set of opportunities stacked into one regression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpportunitySeries {
    pub opportunities: Vec<Opportunity>,
}

impl OpportunitySeries {
    /// Stack the opportunities into regression vectors: each opportunity
    /// with prices P₀..P_T contributes rows X_t = target - P_{t-1} and
    /// Y_t = P_t - target for t = 1..T. Ragged lengths are accepted.
    pub fn regression_vectors(&self) -> (Vec<f64>, Vec<f64>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for opp in &self.opportunities {
            for w in opp.prices.windows(2) {
                x.push(opp.target - w[0]);
                y.push(w[1] - opp.target);
            }
        }
        (x, y)
    }
}

/// OLS estimates of the discrete OU recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    /// κ per observation step.
    pub kappa_hat: f64,
    /// σ per observation step.
    pub sigma_hat: f64,
    pub residuals: Vec<f64>,
}

impl CalibrationResult {
    /// Rescale the per-step estimates to per-unit-time, given the number
    /// of observations per unit of time.
    pub fn rescaled(&self, obs_per_unit: f64) -> (f64, f64) {
        (self.kappa_hat * obs_per_unit, self.sigma_hat * sqrt(obs_per_unit))
    }
}

/// Population covariance (divisor n) with mean subtraction.
fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    a.iter().zip(b).map(|(&x, &y)| (x - ma) * (y - mb)).sum::<f64>() / n
}

/// OLS estimation κ̂ = cov[Y,X]/cov[X,X], ξ̂ = Y - κ̂X, σ̂ = √cov[ξ̂,ξ̂].
///
/// All three covariances use the same population normalization (divisor
/// n); κ̂ is invariant to the choice, σ̂ is not.
pub fn calibrate(series: &OpportunitySeries) -> Result<CalibrationResult, OuError> {
    let (x, y) = series.regression_vectors();
    if x.len() < 2 {
        return Err(OuError::InsufficientData);
    }
    let cov_xx = covariance(&x, &x);
    if cov_xx == 0.0 {
        return Err(OuError::DegenerateRegressor);
    }
    let kappa_hat = covariance(&y, &x) / cov_xx;
    let residuals: Vec<f64> = y.iter().zip(&x).map(|(&yi, &xi)| yi - kappa_hat * xi).collect();
    let sigma_hat = sqrt(covariance(&residuals, &residuals).max(0.0));
    Ok(CalibrationResult {
        kappa_hat,
        sigma_hat,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn recursion_series(kappa: f64, sigma: f64, steps: usize, seed: u64) -> OpportunitySeries {
        let target = 10.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut prices = alloc::vec![8.0];
        for _ in 0..steps {
            let eps: f64 = rng.sample(StandardNormal);
            let prev = *prices.last().unwrap();
            prices.push(target + kappa * (target - prev) + sigma * eps);
        }
        OpportunitySeries {
            opportunities: alloc::vec![Opportunity { target, prices }],
        }
    }

    #[test]
    fn noiseless_recursion_is_fit_exactly() {
        let series = recursion_series(0.5, 0.0, 50, 0);
        let fit = calibrate(&series).unwrap();
        assert_eq!(fit.kappa_hat, 0.5);
        assert_eq!(fit.sigma_hat, 0.0);
    }

    /// Straight-line least-squares oracle on the same stacked vectors,
    /// via the normal-equation form rather than covariances.
    fn ols_slope_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    #[test]
    fn simulated_recursion_recovers_parameters() {
        let series = recursion_series(0.3, 0.02, 100_000, 42);
        let fit = calibrate(&series).unwrap();
        assert!((fit.kappa_hat - 0.3).abs() < 0.02, "kappa_hat = {}", fit.kappa_hat);
        assert!((fit.sigma_hat - 0.02).abs() < 0.001, "sigma_hat = {}", fit.sigma_hat);

        let (x, y) = series.regression_vectors();
        let oracle = ols_slope_oracle(&x, &y);
        assert_abs_diff_eq!(fit.kappa_hat, oracle, epsilon = 1e-10);
    }

    #[test]
    fn ragged_opportunities_stack() {
        let series = OpportunitySeries {
            opportunities: alloc::vec![
                Opportunity { target: 1.0, prices: alloc::vec![0.0, 0.5, 0.75] },
                Opportunity { target: 2.0, prices: alloc::vec![1.0, 1.5] },
            ],
        };
        let (x, y) = series.regression_vectors();
        assert_eq!(x.len(), 3);
        assert_eq!(y.len(), 3);
        assert_eq!(x, alloc::vec![1.0, 0.5, 1.0]);
        assert_eq!(y, alloc::vec![-0.5, -0.25, -0.5]);
    }

    #[test]
    fn constant_prices_are_degenerate() {
        let series = OpportunitySeries {
            opportunities: alloc::vec![Opportunity {
                target: 5.0,
                prices: alloc::vec![5.0; 20],
            }],
        };
        assert!(matches!(calibrate(&series), Err(OuError::DegenerateRegressor)));
    }

    #[test]
    fn too_few_rows() {
        let series = OpportunitySeries {
            opportunities: alloc::vec![Opportunity {
                target: 5.0,
                prices: alloc::vec![4.0, 4.5],
            }],
        };
        assert!(matches!(calibrate(&series), Err(OuError::InsufficientData)));
    }

    #[test]
    fn horizon_map_reference_points() {
        let u = upsilon_of_horizon(1.96).unwrap();
        assert!((0.4899..=0.4901).contains(&u), "upsilon = {u}");
        let t1 = horizon_of_upsilon(0.4999).unwrap();
        assert!((4.25..=4.27).contains(&t1), "T = {t1}");
        let t2 = horizon_of_upsilon(0.499999).unwrap();
        assert!((6.55..=6.57).contains(&t2), "T = {t2}");
    }

    #[test]
    fn small_horizon_limit() {
        let u = upsilon_of_horizon(1e-9).unwrap();
        assert!(u > 0.0 && u < 1.1e-9);
    }

    #[test]
    fn horizon_overflow_guard() {
        assert!(upsilon_of_horizon(19.0).is_err());
        assert!(upsilon_of_horizon(17.0).is_ok());
        assert!(horizon_of_upsilon(0.5).is_err());
        assert!(horizon_of_upsilon(0.6).is_err());
        assert!(horizon_of_upsilon(0.0).is_err());
    }

    #[test]
    fn paper_scaling_example() {
        let params = OuParams::new(1.0, 1.0, 1.0).unwrap();
        let rule = TradingRuleRaw::new(-2.0, 1.0, 1.96).unwrap();
        let p = nondimensionalize(&params, &rule).unwrap();
        assert_abs_diff_eq!(p.theta, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.horizon, 1.96, epsilon = 1e-15);
        assert!((p.upsilon - 0.49).abs() < 1e-4);
        assert_abs_diff_eq!(p.pi_low, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.pi_high, 1.0, epsilon = 1e-15);

        let params = OuParams::new(4.0, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(
            nondimensionalize(&params, &rule).unwrap().theta,
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(params.omega_raw, 2.0 / sqrt(8.0), epsilon = 1e-15);
    }

    #[test]
    fn reflection_examples() {
        // symmetric pair is self-reflective
        assert_eq!(reflect_rule(-1.0, -4.0, 4.0), (-4.0, 4.0));
        // asymmetric pair is negated and swapped
        assert_eq!(reflect_rule(-0.5, -4.0, 0.9), (-0.9, 4.0));
        // identity at theta = 0 and theta > 0
        assert_eq!(reflect_rule(0.0, -1.0, 2.0), (-1.0, 2.0));
        assert_eq!(reflect_rule(0.7, -1.0, 2.0), (-1.0, 2.0));
    }

    #[test]
    fn normalize_theta_reflects_problem() {
        let p = ScaledProblem::from_horizon(-0.5, 1.96, -4.0, 0.9).unwrap();
        let (q, reflected) = p.normalize_theta();
        assert!(reflected);
        assert_eq!(q.theta, 0.5);
        assert_eq!((q.pi_low, q.pi_high), (-0.9, 4.0));
        assert_eq!(q.varpi, -p.varpi);
        let (r, again) = q.normalize_theta();
        assert!(!again);
        assert_eq!(r, q);
    }

    proptest! {
        #[test]
        fn scaling_invariance(
            kappa in 0.05f64..5.0,
            sigma in 0.05f64..5.0,
            theta in -3.0f64..3.0,
            lo in -5.0f64..-0.05,
            hi in 0.05f64..5.0,
            t in 0.05f64..3.0,
            c in 0.1f64..10.0,
        ) {
            let a = nondimensionalize(
                &OuParams::new(kappa, theta, sigma).unwrap(),
                &TradingRuleRaw::new(lo, hi, t).unwrap(),
            ).unwrap();
            let b = nondimensionalize(
                &OuParams::new(kappa, c * theta, c * sigma).unwrap(),
                &TradingRuleRaw::new(c * lo, c * hi, t).unwrap(),
            ).unwrap();
            prop_assert!((a.theta - b.theta).abs() <= 1e-12 * a.theta.abs().max(1.0));
            prop_assert!((a.pi_low - b.pi_low).abs() <= 1e-12 * a.pi_low.abs().max(1.0));
            prop_assert!((a.pi_high - b.pi_high).abs() <= 1e-12 * a.pi_high.abs().max(1.0));
            prop_assert_eq!(a.horizon, b.horizon);
        }

        #[test]
        fn horizon_round_trip(t in 1e-4f64..17.0) {
            let u = upsilon_of_horizon(t).unwrap();
            let back = horizon_of_upsilon(u).unwrap();
            // Υ itself can only hold T to within its own ulp: an absolute
            // error of ulp(1/2)/2 in Υ maps to e^{2T}·ulp(1/2) in T, which
            // passes 1e-12·T near T ≈ 5.7. Below that the round trip is
            // required at 1e-12 relative; above, at the ulp-scale bound.
            let ulp_bound = 2.0 * f64::EPSILON * crate::fmath::exp(2.0 * t) / 2.0;
            let tol = (1e-12 * t).max(ulp_bound);
            prop_assert!((back - t).abs() <= tol, "t={t} back={back}");
        }

        #[test]
        fn horizon_round_trip_well_conditioned_range(t in 1e-4f64..5.0) {
            let u = upsilon_of_horizon(t).unwrap();
            let back = horizon_of_upsilon(u).unwrap();
            prop_assert!((back - t).abs() <= 1e-12 * t);
        }

        #[test]
        fn reflection_involution(
            lo in -5.0f64..-0.05,
            hi in 0.05f64..5.0,
        ) {
            let once = reflect_rule(-1.0, lo, hi);
            let twice = reflect_rule(-1.0, once.0, once.1);
            prop_assert_eq!(twice, (lo, hi));
        }
    }
}
