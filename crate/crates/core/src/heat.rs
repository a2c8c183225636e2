//! Finite-horizon Sharpe ratio and expected duration by the method of
//! heat potentials.
//!
//! After nondimensionalization, the three boundary-value problems behind
//! the trade statistics (mean return rate, its second moment, and the
//! duration) become pure heat equations on the strip between two moving
//! boundaries
//!
//! ```text
//!   Π_low(υ)  = √(1-2υ) (π_low  - θ),
//!   Π_high(υ) = √(1-2υ) (π_high - θ),      0 ≤ υ ≤ Υ < 1/2,
//! ```
//!
//! and their solutions are represented as boundary-layer potentials whose
//! densities solve a coupled pair of Volterra equations of the second
//! kind with weakly singular kernels. The singular part is absorbed by
//! rewriting the integrals in d√(υ-s) (Stieltjes form) and applying the
//! trapezoidal rule, which yields an explicit forward recursion: each new
//! density value requires one scalar solve per boundary. Convergence is
//! first order in the largest grid spacing on uniform grids.
//!
//! The boundary data of the mean and second-moment problems blow up at
//! the final time υ = Υ, so the grid must concentrate near the right
//! endpoint (power-law clustering, exponent `p`), and the final node is
//! excluded from the evaluation sums through its zero weight; its stored
//! density value is 0 and is never read.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath::{exp, fabs, ln_1p, sqrt, SQRT_2PI};
use crate::ou::ScaledProblem;

/// Below this Υ, no dynamics can unfold: SR = 0 and DUR = T are returned
/// without solving (avoids a 0/0 assembly).
pub const DEGENERATE_UPSILON: f64 = 1e-6;

/// Variance expressions above this (negative) floor are treated as
/// roundoff and clipped to zero; anything below it is an error.
pub const VARIANCE_FLOOR: f64 = -1e-10;

/// Errors from grid construction and the Volterra solve.
#[derive(Debug, Clone, PartialEq)]
pub enum HeatError {
    /// Grid parameters violate n ≥ 8, Υ ∈ (0, 1/2), p ≥ 1, or the nodes
    /// failed to be strictly increasing.
    BadGridSpec(&'static str),
    /// Boundary data requested at the singular endpoint υ = Υ.
    SingularBoundary,
    /// Argument ordering violated (e.g. kernel with s > υ, or θ < 0
    /// reaching the solver unreflected).
    Domain(&'static str),
    /// A diagonal solve factor fell below 1e-12 in magnitude; the grid is
    /// too coarse near a steep boundary.
    PivotBreakdown { node: usize },
    /// The variance expression under the Sharpe-ratio square root fell
    /// below the clipping floor; the grid is too coarse.
    NonpositiveVariance { value: f64 },
}

impl core::fmt::Display for HeatError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::BadGridSpec(msg) => write!(f, "bad grid spec: {msg}"),
            Self::SingularBoundary => write!(f, "boundary data is singular at the final time"),
            Self::Domain(msg) => write!(f, "domain error: {msg}"),
            Self::PivotBreakdown { node } => write!(f, "pivot breakdown at node {node}"),
            Self::NonpositiveVariance { value } => {
                write!(f, "variance expression {value:.3e} below the clipping floor")
            }
        }
    }
}

impl core::error::Error for HeatError {}

/// The three boundary-value problems solved by the same kernel machinery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// Mean of the return rate x_ι/ι.
    MeanReturn,
    /// Second moment of the return rate.
    SecondMoment,
    /// Expected duration of the trade.
    Duration,
}

/// Solver options: grid size/concentration and the lower-boundary
/// convention of the second-moment data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatOptions {
    /// Number of grid intervals.
    pub n: usize,
    /// Power-law concentration exponent (1 = uniform).
    pub p: f64,
    /// Use the literal printed lower-boundary factor (π_low², not
    /// 4π_low²) in the second-moment data. The corrected factor 4 is the
    /// default; it is what the change of variables from t to υ produces
    /// on both boundaries.
    pub literal_f_lower: bool,
}

impl Default for HeatOptions {
    fn default() -> Self {
        Self {
            n: 400,
            p: 4.0,
            literal_f_lower: false,
        }
    }
}

impl HeatOptions {
    pub fn with_n(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }
}

// ---------------------------------------------------------------------------
// Grid and moving boundaries
// ---------------------------------------------------------------------------

/// Time grid 0 = υ₀ < υ₁ < … < υ_n = Υ, concentrated near Υ.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatGrid {
    nodes: Vec<f64>,
    upsilon: f64,
    p: f64,
}

impl HeatGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of intervals (nodes() has n + 1 entries).
    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn upsilon(&self) -> f64 {
        self.upsilon
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Build the power-law grid υ_k = Υ·(1 - (1 - k/n)^p).
///
/// p = 1 gives a uniform grid; larger p concentrates nodes near the
/// right endpoint where the boundary densities are singular.
pub fn build_grid(n: usize, upsilon: f64, p: f64) -> Result<HeatGrid, HeatError> {
    if n < 8 {
        return Err(HeatError::BadGridSpec("need n >= 8"));
    }
    if !(upsilon > 0.0 && upsilon < 0.5) {
        return Err(HeatError::BadGridSpec("need upsilon in (0, 1/2)"));
    }
    if !(p >= 1.0) {
        return Err(HeatError::BadGridSpec("need p >= 1"));
    }
    let mut nodes = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let frac = 1.0 - k as f64 / n as f64;
        nodes.push(upsilon * (1.0 - crate::fmath::powf(frac, p)));
    }
    nodes[0] = 0.0;
    nodes[n] = upsilon;
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HeatError::BadGridSpec("nodes not strictly increasing"));
    }
    Ok(HeatGrid {
        nodes,
        upsilon,
        p,
    })
}

/// The two moving boundaries of the heat-potential representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingBoundaries {
    pub theta: f64,
    pub pi_low: f64,
    pub pi_high: f64,
}

impl MovingBoundaries {
    pub fn new(theta: f64, pi_low: f64, pi_high: f64) -> Result<Self, HeatError> {
        if !(pi_low < 0.0 && pi_high > 0.0) {
            return Err(HeatError::Domain("need pi_low < 0 < pi_high"));
        }
        Ok(Self {
            theta,
            pi_low,
            pi_high,
        })
    }

    /// Π_low(υ) = √(1-2υ)(π_low - θ).
    pub fn lower(&self, upsilon: f64) -> f64 {
        sqrt(1.0 - 2.0 * upsilon) * (self.pi_low - self.theta)
    }

    /// Π_high(υ) = √(1-2υ)(π_high - θ).
    pub fn upper(&self, upsilon: f64) -> f64 {
        sqrt(1.0 - 2.0 * upsilon) * (self.pi_high - self.theta)
    }
}

// ---------------------------------------------------------------------------
// Boundary data
// ---------------------------------------------------------------------------

/// ln((1-2υ)/(1-2Υ)) evaluated as ln1p(2(Υ-υ)/(1-2Υ)) to stay accurate
/// as υ approaches Υ.
fn log_ratio(upsilon: f64, cap: f64) -> f64 {
    ln_1p(2.0 * (cap - upsilon) / (1.0 - 2.0 * cap))
}

fn chi(
    problem: Problem,
    upsilon: f64,
    b: &MovingBoundaries,
    cap: f64,
    literal_f_lower: bool,
) -> (f64, f64) {
    match problem {
        Problem::MeanReturn => {
            let lr = log_ratio(upsilon, cap);
            let cap_log = ln_1p(-2.0 * cap);
            let low = 2.0 * b.pi_low / lr + 2.0 * (b.lower(upsilon) + b.theta) / cap_log;
            let high = 2.0 * b.pi_high / lr + 2.0 * (b.upper(upsilon) + b.theta) / cap_log;
            (low, high)
        }
        Problem::SecondMoment => {
            let lr = log_ratio(upsilon, cap);
            let cap_log = ln_1p(-2.0 * cap);
            let lower_factor = if literal_f_lower { 1.0 } else { 4.0 };
            let pl = b.lower(upsilon) + b.theta;
            let ph = b.upper(upsilon) + b.theta;
            let low = lower_factor * b.pi_low * b.pi_low / (lr * lr)
                - 4.0 * (upsilon + pl * pl) / (cap_log * cap_log);
            let high = 4.0 * b.pi_high * b.pi_high / (lr * lr)
                - 4.0 * (upsilon + ph * ph) / (cap_log * cap_log);
            (low, high)
        }
        Problem::Duration => {
            let g = 0.5 * ln_1p(-2.0 * upsilon);
            (g, g)
        }
    }
}

/// Boundary data (lower, upper) of the shifted problem at time υ < Υ.
pub fn boundary_data(
    problem: Problem,
    upsilon: f64,
    boundaries: &MovingBoundaries,
    cap: f64,
) -> Result<(f64, f64), HeatError> {
    if !(0.0..=cap).contains(&upsilon) {
        return Err(HeatError::Domain("need 0 <= upsilon <= cap"));
    }
    if upsilon == cap {
        return Err(HeatError::SingularBoundary);
    }
    Ok(chi(problem, upsilon, boundaries, cap, false))
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// All four kernel values at a pair of times, sharing the Π evaluations.
/// `pi_k` / `pi_i` hold (Π_low, Π_high) at υ and s respectively.
#[derive(Debug, Clone, Copy)]
struct KernelRow {
    k11: f64,
    k12: f64,
    k21: f64,
    k22: f64,
}

fn kernels_off_diagonal(pi_k: (f64, f64), pi_i: (f64, f64), du: f64) -> KernelRow {
    let inv = 1.0 / du;
    let pow32 = inv / sqrt(du);
    let d_ll = pi_k.0 - pi_i.0;
    let d_lh = pi_k.0 - pi_i.1;
    let d_hl = pi_k.1 - pi_i.0;
    let d_hh = pi_k.1 - pi_i.1;
    KernelRow {
        k11: d_ll * inv * exp(-d_ll * d_ll * (0.5 * inv)) / SQRT_2PI,
        k12: d_lh * pow32 * exp(-d_lh * d_lh * (0.5 * inv)) / SQRT_2PI,
        k21: d_hl * pow32 * exp(-d_hl * d_hl * (0.5 * inv)) / SQRT_2PI,
        k22: d_hh * inv * exp(-d_hh * d_hh * (0.5 * inv)) / SQRT_2PI,
    }
}

fn kernels_diagonal(b: &MovingBoundaries, upsilon: f64) -> KernelRow {
    let scale = 1.0 / (SQRT_2PI * sqrt(1.0 - 2.0 * upsilon));
    KernelRow {
        k11: (b.theta - b.pi_low) * scale,
        k12: 0.0,
        k21: 0.0,
        k22: (b.theta - b.pi_high) * scale,
    }
}

/// Single kernel value K^{α,β}(υ, s); the α=β kernels exclude the
/// 1/√(υ-s) singularity (it is handled by the Stieltjes quadrature),
/// the cross kernels carry their full (υ-s)^{-3/2} factor.
pub fn kernel(
    alpha: u8,
    beta: u8,
    upsilon: f64,
    s: f64,
    boundaries: &MovingBoundaries,
) -> Result<f64, HeatError> {
    if !(matches!(alpha, 1 | 2) && matches!(beta, 1 | 2)) {
        return Err(HeatError::Domain("kernel indices must be 1 or 2"));
    }
    if !(0.0 <= s && s <= upsilon && upsilon < 0.5) {
        return Err(HeatError::Domain("need 0 <= s <= upsilon < 1/2"));
    }
    let row = if s == upsilon {
        kernels_diagonal(boundaries, upsilon)
    } else {
        let pi_k = (boundaries.lower(upsilon), boundaries.upper(upsilon));
        let pi_i = (boundaries.lower(s), boundaries.upper(s));
        kernels_off_diagonal(pi_k, pi_i, upsilon - s)
    };
    Ok(match (alpha, beta) {
        (1, 1) => row.k11,
        (1, 2) => row.k12,
        (2, 1) => row.k21,
        (2, 2) => row.k22,
        _ => unreachable!(),
    })
}

// ---------------------------------------------------------------------------
// Volterra solve
// ---------------------------------------------------------------------------

/// Densities on the two boundaries for one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPair {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

/// Densities for all three problems on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDensities {
    pub eps: DensityPair,
    pub phi: DensityPair,
    pub gam: DensityPair,
}

/// Solve the coupled Volterra systems for all three problems in one pass
/// (they share the kernels; only the boundary data differs).
///
/// The recursion follows the Stieltjes trapezoidal discretization: with
/// Δ_{k,l} = υ_k - υ_l, the new values at node k are
///
/// ```text
///   ν¹_k = (1 + K¹¹_{k,k} √Δ_{k,k-1})⁻¹ (χ¹_k - …),
///   ν²_k = (-1 + K²²_{k,k} √Δ_{k,k-1})⁻¹ (χ²_k - …),
/// ```
///
/// seeded with (ν¹₀, ν²₀) = (χ¹₀, -χ²₀). The final node's data is
/// singular for the mean and second-moment problems; its density slot is
/// set to 0 and carries zero weight in every evaluation.
pub fn solve_all(
    grid: &HeatGrid,
    boundaries: &MovingBoundaries,
    options: &HeatOptions,
) -> Result<BoundaryDensities, HeatError> {
    let solved = solve_multi(
        grid,
        boundaries,
        &[Problem::MeanReturn, Problem::SecondMoment, Problem::Duration],
        options.literal_f_lower,
    )?;
    let mut it = solved.into_iter();
    Ok(BoundaryDensities {
        eps: it.next().unwrap(),
        phi: it.next().unwrap(),
        gam: it.next().unwrap(),
    })
}

/// Solve the Volterra system for a single problem.
pub fn solve_volterra(
    problem: Problem,
    grid: &HeatGrid,
    boundaries: &MovingBoundaries,
) -> Result<DensityPair, HeatError> {
    let mut solved = solve_multi(grid, boundaries, &[problem], false)?;
    Ok(solved.pop().unwrap())
}

fn solve_multi(
    grid: &HeatGrid,
    boundaries: &MovingBoundaries,
    problems: &[Problem],
    literal_f_lower: bool,
) -> Result<Vec<DensityPair>, HeatError> {
    let n = grid.n();
    let nodes = grid.nodes();
    let cap = grid.upsilon();
    let m = problems.len();

    let pi_low: Vec<f64> = nodes.iter().map(|&u| boundaries.lower(u)).collect();
    let pi_high: Vec<f64> = nodes.iter().map(|&u| boundaries.upper(u)).collect();

    let mut low = vec![vec![0.0f64; n + 1]; m];
    let mut high = vec![vec![0.0f64; n + 1]; m];

    // Seeds: the data vanishes identically at υ = 0 for all three
    // problems, but the general form is kept.
    for (p, &problem) in problems.iter().enumerate() {
        let (c1, c2) = chi(problem, nodes[0], boundaries, cap, literal_f_lower);
        low[p][0] = c1;
        high[p][0] = -c2;
    }

    let mut row = vec![
        KernelRow {
            k11: 0.0,
            k12: 0.0,
            k21: 0.0,
            k22: 0.0
        };
        n + 1
    ];

    for k in 1..n {
        let uk = nodes[k];
        let pi_k = (pi_low[k], pi_high[k]);
        for i in 0..k {
            row[i] = kernels_off_diagonal(pi_k, (pi_low[i], pi_high[i]), uk - nodes[i]);
        }
        row[k] = kernels_diagonal(boundaries, uk);

        let sqrt_dk = sqrt(uk - nodes[k - 1]);
        let delta_k = uk - nodes[k - 1];
        let pivot1 = 1.0 + row[k].k11 * sqrt_dk;
        let pivot2 = -1.0 + row[k].k22 * sqrt_dk;
        if fabs(pivot1) < 1e-12 || fabs(pivot2) < 1e-12 {
            return Err(HeatError::PivotBreakdown { node: k });
        }

        for (p, &problem) in problems.iter().enumerate() {
            let (chi1, chi2) = chi(problem, uk, boundaries, cap, literal_f_lower);
            let nu1 = &low[p];
            let nu2 = &high[p];

            // history segments i = 1..k-1
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for i in 1..k {
                let step = nodes[i] - nodes[i - 1];
                let denom = sqrt(uk - nodes[i]) + sqrt(uk - nodes[i - 1]);
                s1 += ((row[i].k11 * nu1[i] + row[i - 1].k11 * nu1[i - 1]) / denom
                    + 0.5 * (row[i].k12 * nu2[i] + row[i - 1].k12 * nu2[i - 1]))
                    * step;
                s2 += (0.5 * (row[i].k21 * nu1[i] + row[i - 1].k21 * nu1[i - 1])
                    + (row[i].k22 * nu2[i] + row[i - 1].k22 * nu2[i - 1]) / denom)
                    * step;
            }

            let rhs1 = chi1
                - row[k - 1].k11 * nu1[k - 1] * sqrt_dk
                - 0.5 * row[k - 1].k12 * nu2[k - 1] * delta_k
                - s1;
            let rhs2 = chi2
                - 0.5 * row[k - 1].k21 * nu1[k - 1] * delta_k
                - row[k - 1].k22 * nu2[k - 1] * sqrt_dk
                - s2;
            low[p][k] = rhs1 / pivot1;
            high[p][k] = rhs2 / pivot2;
        }
    }

    // nodes[n]: data singular for MeanReturn/SecondMoment; density slot
    // stays 0 for every problem and is excluded by the zero weight.

    Ok(problems
        .iter()
        .enumerate()
        .map(|(p, _)| DensityPair {
            low: core::mem::take(&mut low[p]),
            high: core::mem::take(&mut high[p]),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Evaluation at (Υ, ϖ)
// ---------------------------------------------------------------------------

/// Evaluate the hat-shifted solution at the point (Υ, ϖ) from solved
/// densities: a trapezoidal sum with heat-kernel weights that vanish at
/// the singular final node.
pub fn evaluate_hat(
    densities: &DensityPair,
    grid: &HeatGrid,
    boundaries: &MovingBoundaries,
    varpi: f64,
) -> f64 {
    let n = grid.n();
    let nodes = grid.nodes();
    let cap = grid.upsilon();

    let weight = |pi_i: f64, i: usize| -> f64 {
        if i == n {
            return 0.0;
        }
        let d = cap - nodes[i];
        let a = varpi - pi_i;
        a * exp(-a * a / (2.0 * d)) / (SQRT_2PI * d * sqrt(d))
    };

    let mut w_low = Vec::with_capacity(n + 1);
    let mut w_high = Vec::with_capacity(n + 1);
    for (i, &u) in nodes.iter().enumerate() {
        w_low.push(weight(boundaries.lower(u), i));
        w_high.push(weight(boundaries.upper(u), i));
    }

    let mut sum = 0.0;
    for i in 1..=n {
        let step = nodes[i] - nodes[i - 1];
        sum += (w_low[i] * densities.low[i]
            + w_low[i - 1] * densities.low[i - 1]
            + w_high[i] * densities.high[i]
            + w_high[i - 1] * densities.high[i - 1])
            * step;
    }
    0.5 * sum
}

// ---------------------------------------------------------------------------
// Sharpe ratio and duration assembly
// ---------------------------------------------------------------------------

/// Solver output at one rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrResult {
    /// Hat-shifted mean-return solution Ê(Υ, ϖ).
    pub e_hat: f64,
    /// Hat-shifted second-moment solution F̂(Υ, ϖ).
    pub f_hat: f64,
    /// Hat-shifted duration solution Ĝ(Υ, ϖ).
    pub g_hat: f64,
    /// Sharpe ratio of the rule.
    pub sharpe: f64,
    /// Expected duration (dimensionless time, in (0, T]).
    pub duration: f64,
    /// Variance expression under the square root (clipped at 0).
    pub variance_term: f64,
    /// True when the variance expression fell in [-1e-10, 0] and was
    /// clipped; the Sharpe ratio is then ±∞.
    pub variance_clipped: bool,
}

/// Compute SR and DUR for a scaled problem (θ must be ≥ 0; reflect
/// first otherwise) with default options at grid size `n`.
pub fn sharpe_and_duration(problem: &ScaledProblem, n: usize) -> Result<SrResult, HeatError> {
    sharpe_and_duration_with(problem, &HeatOptions::with_n(n))
}

/// Full pipeline: build the grid, solve the three Volterra systems,
/// evaluate Ê, F̂, Ĝ at (Υ, ϖ), and assemble
///
/// ```text
///   SR  = (Ê - 2(ϖ+θ)/L) / √(F̂ - Ê² + 4(Υ + L(ϖ+θ)Ê)/L²),
///   DUR = Ĝ - L/2,            L = ln(1-2Υ).
/// ```
pub fn sharpe_and_duration_with(
    problem: &ScaledProblem,
    options: &HeatOptions,
) -> Result<SrResult, HeatError> {
    if problem.theta < 0.0 {
        return Err(HeatError::Domain("theta < 0: reflect the problem first"));
    }
    if problem.upsilon < DEGENERATE_UPSILON {
        return Ok(SrResult {
            e_hat: 0.0,
            f_hat: 0.0,
            g_hat: 0.0,
            sharpe: 0.0,
            duration: problem.horizon,
            variance_term: 0.0,
            variance_clipped: false,
        });
    }

    let grid = build_grid(options.n, problem.upsilon, options.p)?;
    let boundaries = MovingBoundaries::new(problem.theta, problem.pi_low, problem.pi_high)?;
    let densities = solve_all(&grid, &boundaries, options)?;

    let e_hat = evaluate_hat(&densities.eps, &grid, &boundaries, problem.varpi);
    let f_hat = evaluate_hat(&densities.phi, &grid, &boundaries, problem.varpi);
    let g_hat = evaluate_hat(&densities.gam, &grid, &boundaries, problem.varpi);

    assemble(problem, e_hat, f_hat, g_hat)
}

fn assemble(problem: &ScaledProblem, e_hat: f64, f_hat: f64, g_hat: f64) -> Result<SrResult, HeatError> {
    let cap_log = ln_1p(-2.0 * problem.upsilon);
    let shift = problem.varpi + problem.theta;
    let mean = e_hat - 2.0 * shift / cap_log;
    let variance = f_hat - e_hat * e_hat
        + 4.0 * (problem.upsilon + cap_log * shift * e_hat) / (cap_log * cap_log);

    let (variance, clipped) = if variance < VARIANCE_FLOOR {
        return Err(HeatError::NonpositiveVariance { value: variance });
    } else if variance < 0.0 {
        (0.0, true)
    } else {
        (variance, false)
    };

    let sharpe = if clipped {
        if mean == 0.0 {
            0.0
        } else if mean > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        mean / sqrt(variance)
    };

    let mut duration = g_hat - 0.5 * cap_log;
    if duration > problem.horizon {
        // any overshoot of the horizon is discretization noise
        duration = problem.horizon;
    }

    Ok(SrResult {
        e_hat,
        f_hat,
        g_hat,
        sharpe,
        duration,
        variance_term: variance,
        variance_clipped: clipped,
    })
}
