//! Sharpe-ratio maximization over the exit corridor (π_low, π_high),
//! optionally over the horizon as well.
//!
//! The surfaces are flat near their optima, so the search is an
//! exhaustive scan over a step-aligned rule grid rather than gradient
//! ascent. Cells are independent solver calls; a parallel driver can
//! evaluate them in any order via [`evaluate_cell`] and reassemble the
//! surface with [`SrSurface::from_cells`] — the reduction to the optimum
//! is an ordered scan applied after the fact, so the reported rule does
//! not depend on evaluation order.

use alloc::vec::Vec;

use crate::fmath::fabs;
use crate::heat::{sharpe_and_duration_with, HeatError, HeatOptions, SrResult};
use crate::ou::{horizon_of_upsilon, ScaledProblem};

/// Ties within this Sharpe-ratio distance of the maximum are broken by
/// the least extreme rule (smallest |π_low| + |π_high|).
pub const TIE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum OptError {
    /// The rule grid has no cells.
    EmptyGrid,
    /// Every cell failed or was non-finite; no maximum exists.
    NoUsableCells,
    /// Grid specification violates an invariant.
    Domain(&'static str),
}

impl core::fmt::Display for OptError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::EmptyGrid => write!(f, "empty rule grid"),
            Self::NoUsableCells => write!(f, "no cell produced a finite Sharpe ratio"),
            Self::Domain(msg) => write!(f, "domain error: {msg}"),
        }
    }
}

impl core::error::Error for OptError {}

// ---------------------------------------------------------------------------
// Rule grid
// ---------------------------------------------------------------------------

/// Cartesian grid of candidate rules: π_low values (all < 0) times
/// π_high values (all > 0).
#[derive(Debug, Clone, PartialEq)]
pub struct RuleGrid {
    pi_low: Vec<f64>,
    pi_high: Vec<f64>,
}

impl RuleGrid {
    /// Step-aligned grid over closed ranges: values lo, lo+step, …, hi.
    /// Each value is computed as (round(lo/step) + i)·step so the grid
    /// lands exactly on step multiples.
    pub fn from_ranges(
        low_range: (f64, f64),
        high_range: (f64, f64),
        step: f64,
    ) -> Result<Self, OptError> {
        if !(step > 0.0) {
            return Err(OptError::Domain("step must be positive"));
        }
        let axis = |range: (f64, f64)| -> Vec<f64> {
            let (a, b) = range;
            let i0 = libm::round(a / step) as i64;
            let i1 = libm::round(b / step) as i64;
            (i0..=i1).map(|i| i as f64 * step).collect()
        };
        Self::from_values(axis(low_range), axis(high_range))
    }

    pub fn from_values(pi_low: Vec<f64>, pi_high: Vec<f64>) -> Result<Self, OptError> {
        if pi_low.is_empty() || pi_high.is_empty() {
            return Err(OptError::EmptyGrid);
        }
        if pi_low.iter().any(|&v| v >= 0.0) || pi_high.iter().any(|&v| v <= 0.0) {
            return Err(OptError::Domain("need pi_low < 0 < pi_high throughout"));
        }
        if pi_low.windows(2).any(|w| w[1] <= w[0]) || pi_high.windows(2).any(|w| w[1] <= w[0]) {
            return Err(OptError::Domain("grid axes must be strictly increasing"));
        }
        Ok(Self { pi_low, pi_high })
    }

    /// The default search box: π_low ∈ [-4, -0.1], π_high ∈ [0.1, 4],
    /// step 0.1.
    pub fn default_box() -> Self {
        Self::from_ranges((-4.0, -0.1), (0.1, 4.0), 0.1).unwrap()
    }

    pub fn pi_low(&self) -> &[f64] {
        &self.pi_low
    }

    pub fn pi_high(&self) -> &[f64] {
        &self.pi_high
    }

    pub fn len(&self) -> usize {
        self.pi_low.len() * self.pi_high.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major cell coordinates: π_low outer, π_high inner.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &lo in &self.pi_low {
            for &hi in &self.pi_high {
                out.push((lo, hi));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Surface
// ---------------------------------------------------------------------------

/// Solver outcome over a rule grid; failed cells stay flagged in place.
#[derive(Debug, Clone)]
pub struct SrSurface {
    pub theta: f64,
    pub upsilon: f64,
    pub grid: RuleGrid,
    /// Row-major over [`RuleGrid::pairs`].
    pub cells: Vec<Result<SrResult, HeatError>>,
}

impl SrSurface {
    pub fn from_cells(
        theta: f64,
        upsilon: f64,
        grid: RuleGrid,
        cells: Vec<Result<SrResult, HeatError>>,
    ) -> Result<Self, OptError> {
        if cells.len() != grid.len() {
            return Err(OptError::Domain("cell count does not match grid"));
        }
        Ok(Self {
            theta,
            upsilon,
            grid,
            cells,
        })
    }

    pub fn cell(&self, i_low: usize, i_high: usize) -> &Result<SrResult, HeatError> {
        &self.cells[i_low * self.grid.pi_high().len() + i_high]
    }

    /// The maximizing rule: exhaustive scan, ties within [`TIE_TOLERANCE`]
    /// broken by the least extreme rule (then by smaller π_high, then by
    /// larger π_low for full determinism). Cells with non-finite or
    /// clipped-variance Sharpe ratios are excluded.
    pub fn best(&self) -> Result<OptimalRule, OptError> {
        let pairs = self.grid.pairs();
        let mut sr_star = f64::NEG_INFINITY;
        for cell in &self.cells {
            if let Ok(r) = cell {
                if r.sharpe.is_finite() && !r.variance_clipped && r.sharpe > sr_star {
                    sr_star = r.sharpe;
                }
            }
        }
        if sr_star == f64::NEG_INFINITY {
            return Err(OptError::NoUsableCells);
        }

        let mut tie_count = 0usize;
        let mut best: Option<((f64, f64, f64), usize)> = None;
        for (idx, cell) in self.cells.iter().enumerate() {
            let Ok(r) = cell else { continue };
            if !r.sharpe.is_finite() || r.variance_clipped {
                continue;
            }
            if sr_star - r.sharpe <= TIE_TOLERANCE {
                tie_count += 1;
                let (lo, hi) = pairs[idx];
                let key = (fabs(lo) + fabs(hi), hi, -lo);
                if best.map_or(true, |(k, _)| key < k) {
                    best = Some((key, idx));
                }
            }
        }
        let (_, idx) = best.expect("at least the maximum itself ties");
        let (pi_low_star, pi_high_star) = pairs[idx];
        let chosen = self.cells[idx].as_ref().expect("tie candidates are Ok");
        Ok(OptimalRule {
            pi_low_star,
            pi_high_star,
            sr_star: chosen.sharpe,
            duration: chosen.duration,
            upsilon: self.upsilon,
            horizon: horizon_of_upsilon(self.upsilon).unwrap_or(f64::NAN),
            tie_count,
        })
    }
}

/// The maximizer of a surface (or of a family of surfaces over Υ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalRule {
    pub pi_low_star: f64,
    pub pi_high_star: f64,
    pub sr_star: f64,
    /// Expected duration at the optimal rule.
    pub duration: f64,
    pub upsilon: f64,
    pub horizon: f64,
    /// Number of grid cells within [`TIE_TOLERANCE`] of the maximum.
    pub tie_count: usize,
}

// ---------------------------------------------------------------------------
// Evaluation and maximization
// ---------------------------------------------------------------------------

/// Solve one cell. Reentrant; any number of cells may run concurrently.
pub fn evaluate_cell(
    theta: f64,
    upsilon: f64,
    pi_low: f64,
    pi_high: f64,
    options: &HeatOptions,
) -> Result<SrResult, HeatError> {
    let problem = ScaledProblem::from_upsilon(theta, upsilon, pi_low, pi_high)
        .map_err(|_| HeatError::Domain("invalid cell parameters"))?;
    sharpe_and_duration_with(&problem, options)
}

/// Evaluate the whole surface sequentially (one solver call per cell;
/// failures are flagged per cell, not propagated).
pub fn sr_surface(
    theta: f64,
    upsilon: f64,
    grid: &RuleGrid,
    n: usize,
) -> Result<SrSurface, OptError> {
    sr_surface_with(theta, upsilon, grid, &HeatOptions::with_n(n))
}

pub fn sr_surface_with(
    theta: f64,
    upsilon: f64,
    grid: &RuleGrid,
    options: &HeatOptions,
) -> Result<SrSurface, OptError> {
    if theta < 0.0 {
        return Err(OptError::Domain("theta < 0: reflect the problem upstream"));
    }
    if grid.is_empty() {
        return Err(OptError::EmptyGrid);
    }
    let cells = grid
        .pairs()
        .into_iter()
        .map(|(lo, hi)| evaluate_cell(theta, upsilon, lo, hi, options))
        .collect();
    SrSurface::from_cells(theta, upsilon, grid.clone(), cells)
}

/// Exhaustive maximization over the grid at fixed Υ.
pub fn maximize_sr(
    theta: f64,
    upsilon: f64,
    grid: &RuleGrid,
    n: usize,
) -> Result<OptimalRule, OptError> {
    sr_surface(theta, upsilon, grid, n)?.best()
}

/// Maximize over (π_low, π_high, Υ): outer loop over the Υ candidates,
/// returning the global best (earlier candidate wins exact ties).
pub fn maximize_sr_over_horizon(
    theta: f64,
    upsilon_candidates: &[f64],
    grid: &RuleGrid,
    n: usize,
) -> Result<OptimalRule, OptError> {
    if upsilon_candidates.is_empty() {
        return Err(OptError::EmptyGrid);
    }
    let mut best: Option<OptimalRule> = None;
    for &upsilon in upsilon_candidates {
        let rule = maximize_sr(theta, upsilon, grid, n)?;
        if best.as_ref().map_or(true, |b| rule.sr_star > b.sr_star) {
            best = Some(rule);
        }
    }
    Ok(best.unwrap())
}
