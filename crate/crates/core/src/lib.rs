//! Optimal stop-loss/take-profit analysis for Ornstein-Uhlenbeck trading
//! strategies.
//!
//! A mean-reverting position is exited at the first of three events: the
//! P&L hits a profit-taking level, it hits a stop-loss level, or a maximum
//! holding horizon expires. This crate computes the Sharpe ratio and the
//! expected duration of such a rule for a finite horizon by reducing the
//! associated parabolic boundary-value problems to coupled Volterra
//! integral equations of the second kind (the method of heat potentials),
//! and maximizes the Sharpe ratio over the exit corridor.
//!
//! Alongside the finite-horizon solver it provides the classical
//! stationary machinery used for cross-validation: first-passage duration
//! moments, renewal-theory round-trip statistics, perpetual value
//! functions with free boundaries (including a jump-diffusion variant
//! solved by shooting), a Fredholm solver for the no-trade zone under
//! linear transaction costs, and a Monte Carlo simulator.
//!
//! The crate is `no_std`-compatible (requires `alloc`); all floating-point
//! math is routed through `libm` so results are identical with and without
//! the `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod classical;
pub mod heat;
pub mod montecarlo;
pub mod optimizer;
pub mod ou;
pub mod quad;
pub mod specfun;

mod fmath;
