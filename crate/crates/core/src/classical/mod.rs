//! Stationary and perpetual counterparts of the finite-horizon solver:
//! passage-time duration moments, renewal-theory round-trip statistics
//! with the asymptotic Sharpe ratio, perpetual value functions with free
//! boundaries (discounting, opportunity-cost, and jump-diffusion
//! variants), and the Fredholm no-trade-zone solver under linear
//! transaction costs.
//!
//! These methods all assume the trade runs to its natural exit (T = ∞);
//! they serve as independent cross-checks of the heat-potential solver
//! in the long-horizon limit and as solvers of interest in their own
//! right.

mod duration;
mod fredholm;
mod jump;
mod ode;
mod renewal;
mod value;

pub use duration::{duration_mean, duration_variance, greens_function, DurationMoments};
pub use fredholm::{critical_boundary_curve, fredholm_transaction, FredholmSolution, RootClass};
pub use jump::{jump_value_at, jump_value_shooting};
pub use renewal::{bertram_sr, renewal_stats, BertramResult, RenewalStats};
pub use value::{
    perpetual_value_discount, perpetual_value_opportunity, ValueFunctionSolution, ValueVariant,
};

use crate::quad::QuadratureFailure;
use crate::specfun::SpecFunError;

/// Errors from the stationary solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassicalError {
    /// Propagated special-function error (argument left the operating
    /// envelope, a series failed, or a pole was hit).
    SpecFun(SpecFunError),
    /// A quadrature failed to meet its tolerance.
    Quadrature(QuadratureFailure),
    /// Argument ordering or sign constraint violated.
    Domain(&'static str),
    /// Newton/secant iteration failed to converge.
    NoConvergence(&'static str),
    /// The adaptive ODE integrator could not meet its local tolerance.
    IntegratorFailure,
    /// Θ² - 1 underflows (Δ too small for the Fredholm kernel).
    SingularDelta,
    /// The Nyström linear system was numerically singular.
    LinearSolveFailure,
}

impl core::fmt::Display for ClassicalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::SpecFun(e) => write!(f, "{e}"),
            Self::Quadrature(e) => write!(f, "{e}"),
            Self::Domain(msg) => write!(f, "domain error: {msg}"),
            Self::NoConvergence(what) => write!(f, "no convergence: {what}"),
            Self::IntegratorFailure => write!(f, "ODE integrator failed"),
            Self::SingularDelta => write!(f, "theta^2 - 1 underflows: delta too small"),
            Self::LinearSolveFailure => write!(f, "linear system is singular"),
        }
    }
}

impl core::error::Error for ClassicalError {}

impl From<SpecFunError> for ClassicalError {
    fn from(e: SpecFunError) -> Self {
        Self::SpecFun(e)
    }
}

impl From<QuadratureFailure> for ClassicalError {
    fn from(e: QuadratureFailure) -> Self {
        Self::Quadrature(e)
    }
}
