//! No-trade zone under linear transaction costs: a Fredholm integral
//! equation of the second kind on [-q, q], discretized by Nyström with
//! Gauss-Legendre quadrature, with an outer iteration on the zone
//! half-width q until the matching condition g(q) = Γ holds.
//!
//! The kernel and data are
//!
//! ```text
//!   K(x,y) = Θ exp(-(Θy - x)²/(Θ² - 1)) / √(π(Θ² - 1)),   Θ = e^Δ,
//!   f(x)   = x + Γ(N(-√2(Θq - x)/s) - N(-√2(Θq + x)/s)),  s = √(Θ² - 1).
//! ```
//!
//! K is even under (x,y) → (-x,-y) and f is odd, so the solution g is
//! odd. The equations admit multiple critical q; the number of roots of
//! g classifies the branch, and the single-root branch is the one of
//! practical interest.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath::{cos, exp, expm1, fabs, sqrt, SQRT_PI};
use crate::specfun::norm_cdf;

use super::ClassicalError;

/// Number of Gauss-Legendre nodes for the Nyström discretization.
pub const NYSTROM_NODES: usize = 201;

/// How many roots the solved g(x) has on (-q, q).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootClass {
    /// A single root at x = 0 (the branch of practical interest).
    SingleRoot,
    /// Three roots.
    TripleRoot,
    /// Any other count (grid artifacts or exotic branches).
    Other(usize),
}

/// A solved no-trade-zone problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FredholmSolution {
    /// Critical half-width q*.
    pub q_star: f64,
    /// Quadrature nodes in [-q*, q*].
    pub nodes: Vec<f64>,
    /// g at the nodes.
    pub g: Vec<f64>,
    /// Transaction cost Γ.
    pub gamma: f64,
    /// Predictability horizon Δ.
    pub delta: f64,
    /// Θ = e^Δ.
    pub theta_cap: f64,
    pub root_class: RootClass,
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes and dense LU
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], by
/// Newton iteration on the Legendre recurrence.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if fabs(dx) < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Solve A x = b in place by LU with partial pivoting (A row-major).
pub(crate) fn lu_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Result<(), ClassicalError> {
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = fabs(a[col * n + col]);
        for row in col + 1..n {
            let v = fabs(a[row * n + col]);
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val < 1e-300 {
            return Err(ClassicalError::LinearSolveFailure);
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for k in col + 1..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for row in (0..n).rev() {
        let mut sum = b[row];
        for k in row + 1..n {
            sum -= a[row * n + k] * b[k];
        }
        b[row] = sum / a[row * n + row];
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Nyström solve
// ---------------------------------------------------------------------------

struct Discretization {
    xi: Vec<f64>,
    wi: Vec<f64>,
}

impl Discretization {
    fn new(n: usize) -> Self {
        let (xi, wi) = gauss_legendre(n);
        Self { xi, wi }
    }
}

fn kernel(theta_cap: f64, s2: f64, x: f64, y: f64) -> f64 {
    let d = theta_cap * y - x;
    theta_cap * exp(-d * d / s2) / (SQRT_PI * sqrt(s2))
}

fn data(gamma: f64, theta_cap: f64, s: f64, q: f64, x: f64) -> f64 {
    let sqrt2 = core::f64::consts::SQRT_2;
    x + gamma * (norm_cdf(-sqrt2 * (theta_cap * q - x) / s) - norm_cdf(-sqrt2 * (theta_cap * q + x) / s))
}

/// Solve the fixed-q problem; returns (scaled nodes, g at nodes, g(q)).
fn solve_fixed_q(
    disc: &Discretization,
    gamma: f64,
    theta_cap: f64,
    s2: f64,
    q: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64), ClassicalError> {
    let n = disc.xi.len();
    let s = sqrt(s2);
    let nodes: Vec<f64> = disc.xi.iter().map(|&t| q * t).collect();
    let weights: Vec<f64> = disc.wi.iter().map(|&w| q * w).collect();

    let mut a = vec![0.0f64; n * n];
    let mut g: Vec<f64> = nodes.iter().map(|&x| data(gamma, theta_cap, s, q, x)).collect();
    for i in 0..n {
        for j in 0..n {
            let k = kernel(theta_cap, s2, nodes[i], nodes[j]) * weights[j];
            a[i * n + j] = if i == j { 1.0 - k } else { -k };
        }
    }
    lu_solve(&mut a, &mut g, n)?;

    // Nyström interpolation at the endpoint
    let mut g_at_q = data(gamma, theta_cap, s, q, q);
    for j in 0..n {
        g_at_q += kernel(theta_cap, s2, q, nodes[j]) * weights[j] * g[j];
    }
    Ok((nodes, g, g_at_q))
}

fn classify_roots(g: &[f64]) -> RootClass {
    let gmax = g.iter().fold(0.0f64, |m, &v| m.max(fabs(v)));
    if gmax == 0.0 {
        return RootClass::Other(0);
    }
    let mut count = 0usize;
    let mut last_sign = 0i8;
    for &v in g {
        if fabs(v) <= 1e-8 * gmax {
            continue;
        }
        let sign = if v > 0.0 { 1 } else { -1 };
        if last_sign != 0 && sign != last_sign {
            count += 1;
        }
        last_sign = sign;
    }
    match count {
        1 => RootClass::SingleRoot,
        3 => RootClass::TripleRoot,
        k => RootClass::Other(k),
    }
}

fn fredholm_with_nodes(
    gamma: f64,
    delta: f64,
    q_init: f64,
    n_nodes: usize,
) -> Result<FredholmSolution, ClassicalError> {
    if !(gamma > 0.0) {
        return Err(ClassicalError::Domain("need gamma > 0"));
    }
    if !(delta > 0.0) {
        return Err(ClassicalError::Domain("need delta > 0"));
    }
    if !(q_init > 0.0) {
        return Err(ClassicalError::Domain("need q_init > 0"));
    }
    let s2 = expm1(2.0 * delta); // Θ² - 1 without cancellation
    if s2 < 1e-300 {
        return Err(ClassicalError::SingularDelta);
    }
    let theta_cap = exp(delta);
    let disc = Discretization::new(n_nodes);

    let matching = |q: f64| -> Result<f64, ClassicalError> {
        let (_, _, g_at_q) = solve_fixed_q(&disc, gamma, theta_cap, s2, q)?;
        Ok(g_at_q - gamma)
    };

    // Newton on q with finite differences, keeping q positive
    let mut q = q_init;
    let mut converged = false;
    for _ in 0..80 {
        let r = matching(q)?;
        if fabs(r) < 1e-9 {
            converged = true;
            break;
        }
        let h = (1e-7 * q).max(1e-9);
        let d = (matching(q + h)? - matching(q - h)?) / (2.0 * h);
        if d == 0.0 || !d.is_finite() {
            return Err(ClassicalError::NoConvergence("fredholm matching derivative"));
        }
        let mut next = q - r / d;
        if !next.is_finite() {
            return Err(ClassicalError::NoConvergence("fredholm matching step"));
        }
        if next <= 0.0 {
            next = 0.5 * q;
        }
        q = next;
    }
    if !converged {
        return Err(ClassicalError::NoConvergence("fredholm matching"));
    }

    let (nodes, g, _) = solve_fixed_q(&disc, gamma, theta_cap, s2, q)?;
    let root_class = classify_roots(&g);
    Ok(FredholmSolution {
        q_star: q,
        nodes,
        g,
        gamma,
        delta,
        theta_cap,
        root_class,
    })
}

/// Solve for the critical half-width q* from the starting guess
/// `q_init`; different guesses can land on different branches.
pub fn fredholm_transaction(
    gamma: f64,
    delta: f64,
    q_init: f64,
) -> Result<FredholmSolution, ClassicalError> {
    fredholm_with_nodes(gamma, delta, q_init, NYSTROM_NODES)
}

/// Continuation of the single-root branch over ascending Δ values: each
/// solve starts from the previous q*.
pub fn critical_boundary_curve(
    gamma: f64,
    deltas: &[f64],
    q_init: f64,
) -> Result<Vec<(f64, f64)>, ClassicalError> {
    if deltas.is_empty() {
        return Err(ClassicalError::Domain("need at least one delta"));
    }
    if deltas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ClassicalError::Domain("deltas must be ascending"));
    }
    let mut out = Vec::with_capacity(deltas.len());
    let mut q = q_init;
    for &delta in deltas {
        let mut sol = fredholm_transaction(gamma, delta, q)?;
        if sol.root_class != RootClass::SingleRoot {
            // fell onto another branch; restart from a small width
            sol = fredholm_transaction(gamma, delta, q_init.min(0.05))?;
        }
        q = sol.q_star;
        out.push((delta, q));
    }
    Ok(out)
}
