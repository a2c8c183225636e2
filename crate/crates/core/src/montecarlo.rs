//! Monte Carlo oracle for the trading rule: simulates the scaled process
//! dx = (θ - x)dt + dW from x(0) = 0 and estimates E{x_ι/ι},
//! E{x_ι²/ι²}, E{ι}, and the assembled Sharpe ratio, with standard
//! errors (delta method for the derived σ and SR).
//!
//! Paths are driven by per-path ChaCha streams keyed on the global path
//! index, so results are independent of execution order and chunk
//! scheduling: a parallel driver maps [`simulate_chunk`] over chunk
//! indices and folds the sums in index order, reproducing the sequential
//! result bit for bit.
//!
//! Barrier monitoring is discrete by default (an exit is declared when a
//! sampled point sits at or beyond a bound, matching the discrete rule
//! semantics). The `BridgeCorrected` mode additionally accounts for
//! crossings between samples with the Brownian-bridge probability
//! exp(-2(u-a)(u-b)/dt); use it when comparing against continuous-time
//! solutions, where the O(√dt) discrete-monitoring bias would otherwise
//! dwarf the Monte Carlo noise at large path counts.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::fmath::{exp, expm1, sqrt};
use crate::ou::ScaledProblem;

/// Paths per aggregation chunk; fixed so that the reduction order (and
/// therefore the result) does not depend on the execution schedule.
pub const PATHS_PER_CHUNK: usize = 4096;

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Sample the exact OU transition x' ~ N(θ + (x-θ)e^{-dt}, (1-e^{-2dt})/2).
    ExactTransition,
    /// Euler-Maruyama step (biased; retained as a cross-check).
    Euler,
}

/// Barrier monitoring mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monitoring {
    /// Exit only when a sampled point reaches a bound.
    Discrete,
    /// Also detect intra-step crossings via the Brownian-bridge
    /// crossing probability.
    BridgeCorrected,
}

/// Simulation configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub scheme: Scheme,
    pub monitoring: Monitoring,
}

impl McConfig {
    pub fn new(n_paths: usize, dt: f64, seed: u64) -> Self {
        Self {
            n_paths,
            dt,
            seed,
            scheme: Scheme::ExactTransition,
            monitoring: Monitoring::Discrete,
        }
    }

    pub fn with_bridge(mut self) -> Self {
        self.monitoring = Monitoring::BridgeCorrected;
        self
    }

    fn validate(&self) -> Result<(), McError> {
        if self.n_paths < 1_000 {
            return Err(McError::Config("n_paths must be at least 1000"));
        }
        if !(self.dt > 0.0 && self.dt <= 1e-2) {
            return Err(McError::Config("dt must lie in (0, 1e-2]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum McError {
    Config(&'static str),
}

impl core::fmt::Display for McError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "invalid Monte Carlo config: {msg}"),
        }
    }
}

impl core::error::Error for McError {}

/// Estimates with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McStats {
    /// E{x_ι/ι}.
    pub mean_ratio: f64,
    /// E{x_ι²/ι²}.
    pub mean_ratio_sq: f64,
    /// E{ι}.
    pub mean_duration: f64,
    /// √(E{r²} - E{r}²).
    pub sigma: f64,
    /// mean_ratio / sigma.
    pub sr: f64,
    pub se_mean_ratio: f64,
    pub se_mean_ratio_sq: f64,
    pub se_mean_duration: f64,
    pub se_sigma: f64,
    pub se_sr: f64,
    pub n_paths: usize,
}

/// Raw per-chunk accumulator: power sums of the return rate r = x_ι/ι
/// and of the duration ι.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChunkSums {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub t1: f64,
    pub t2: f64,
    pub n: usize,
}

impl ChunkSums {
    fn absorb(&mut self, r: f64, t: f64) {
        let r2 = r * r;
        self.r1 += r;
        self.r2 += r2;
        self.r3 += r2 * r;
        self.r4 += r2 * r2;
        self.t1 += t;
        self.t2 += t * t;
        self.n += 1;
    }

    fn merge(&mut self, other: &ChunkSums) {
        self.r1 += other.r1;
        self.r2 += other.r2;
        self.r3 += other.r3;
        self.r4 += other.r4;
        self.t1 += other.t1;
        self.t2 += other.t2;
        self.n += other.n;
    }
}

/// Number of chunks for a given path count.
pub fn chunk_count(n_paths: usize) -> usize {
    n_paths.div_ceil(PATHS_PER_CHUNK)
}

struct StepParams {
    theta: f64,
    pi_low: f64,
    pi_high: f64,
    n_steps: usize,
    dt: f64,
    decay: f64,
    noise: f64,
    sqrt_dt: f64,
    scheme: Scheme,
    bridge: bool,
}

impl StepParams {
    fn new(problem: &ScaledProblem, config: &McConfig) -> Self {
        let n_steps = (problem.horizon / config.dt - 1e-9) as usize + 1;
        let dt = problem.horizon / n_steps as f64;
        Self {
            theta: problem.theta,
            pi_low: problem.pi_low,
            pi_high: problem.pi_high,
            n_steps,
            dt,
            decay: exp(-dt),
            noise: sqrt(-0.5 * expm1(-2.0 * dt)),
            sqrt_dt: sqrt(dt),
            scheme: config.scheme,
            bridge: config.monitoring == Monitoring::BridgeCorrected,
        }
    }
}

/// One path; returns (exit value recorded at the bound or x_T, exit time).
fn simulate_path(p: &StepParams, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut x = 0.0f64;
    for k in 1..=p.n_steps {
        let z: f64 = rng.sample(StandardNormal);
        let prev = x;
        x = match p.scheme {
            Scheme::ExactTransition => p.theta + (x - p.theta) * p.decay + p.noise * z,
            Scheme::Euler => x + (p.theta - x) * p.dt + p.sqrt_dt * z,
        };
        if x >= p.pi_high {
            return (p.pi_high, k as f64 * p.dt);
        }
        if x <= p.pi_low {
            return (p.pi_low, k as f64 * p.dt);
        }
        if p.bridge {
            // crossing probabilities of the bridge between samples;
            // skipped when beyond double-precision relevance
            let up = (p.pi_high - prev) * (p.pi_high - x);
            if up < 18.0 * p.dt {
                let u: f64 = rng.gen();
                if u < exp(-2.0 * up / p.dt) {
                    return (p.pi_high, k as f64 * p.dt);
                }
            }
            let down = (prev - p.pi_low) * (x - p.pi_low);
            if down < 18.0 * p.dt {
                let u: f64 = rng.gen();
                if u < exp(-2.0 * down / p.dt) {
                    return (p.pi_low, k as f64 * p.dt);
                }
            }
        }
    }
    (x, p.n_steps as f64 * p.dt)
}

fn path_rng(seed: u64, path_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index as u64);
    rng
}

/// Simulate the paths of one chunk and return their raw sums.
pub fn simulate_chunk(problem: &ScaledProblem, config: &McConfig, chunk_index: usize) -> ChunkSums {
    let p = StepParams::new(problem, config);
    let start = chunk_index * PATHS_PER_CHUNK;
    let end = (start + PATHS_PER_CHUNK).min(config.n_paths);
    let mut sums = ChunkSums::default();
    for path in start..end {
        let mut rng = path_rng(config.seed, path);
        let (value, time) = simulate_path(&p, &mut rng);
        sums.absorb(value / time, time);
    }
    sums
}

/// Fold chunk sums (in chunk order) into the final statistics.
pub fn collect_stats(chunks: impl IntoIterator<Item = ChunkSums>) -> McStats {
    let mut total = ChunkSums::default();
    for c in chunks {
        total.merge(&c);
    }
    let n = total.n as f64;
    let m1 = total.r1 / n;
    let m2 = total.r2 / n;
    let m3 = total.r3 / n;
    let m4 = total.r4 / n;
    let mean_duration = total.t1 / n;
    let var_dur = (total.t2 / n - mean_duration * mean_duration).max(0.0);

    let var_r = (m2 - m1 * m1).max(0.0);
    let var_r2 = (m4 - m2 * m2).max(0.0);
    let cov_r_r2 = m3 - m1 * m2;
    let sigma = sqrt(var_r);
    let sr = m1 / sigma;

    // delta method: σ = √(m2 - m1²) has gradient (-m1/σ, 1/(2σ));
    // SR = m1/σ has gradient (m2/σ³, -m1/(2σ³)).
    let s2 = var_r;
    let var_sigma = (m1 * m1 * var_r - m1 * cov_r_r2 + 0.25 * var_r2) / (s2 * n);
    let g1 = m2 / (sigma * s2);
    let g2 = -m1 / (2.0 * sigma * s2);
    let var_sr = (g1 * g1 * var_r + 2.0 * g1 * g2 * cov_r_r2 + g2 * g2 * var_r2) / n;

    McStats {
        mean_ratio: m1,
        mean_ratio_sq: m2,
        mean_duration,
        sigma,
        sr,
        se_mean_ratio: sqrt(var_r / n),
        se_mean_ratio_sq: sqrt(var_r2 / n),
        se_mean_duration: sqrt(var_dur / n),
        se_sigma: sqrt(var_sigma.max(0.0)),
        se_sr: sqrt(var_sr.max(0.0)),
        n_paths: total.n,
    }
}

/// Simulate the trading rule and aggregate (sequential driver).
pub fn simulate_trade(problem: &ScaledProblem, config: &McConfig) -> Result<McStats, McError> {
    config.validate()?;
    if problem.theta < 0.0 {
        return Err(McError::Config("theta < 0: reflect the problem first"));
    }
    let chunks = (0..chunk_count(config.n_paths)).map(|c| simulate_chunk(problem, config, c));
    let chunk_values: Vec<ChunkSums> = chunks.collect();
    Ok(collect_stats(chunk_values))
}

// ---------------------------------------------------------------------------
// First-passage oracle
// ---------------------------------------------------------------------------

/// Sample moments of a one-barrier first-passage time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageStats {
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    /// Paths that hit the time cap instead of the barrier (their time is
    /// recorded at the cap, biasing the moments low; keep this at 0 by
    /// choosing a generous cap).
    pub capped: usize,
    pub n_paths: usize,
}

/// Estimate first-passage-time moments from `start` to `barrier` for the
/// scaled process; the barrier may lie on either side of the start (the
/// downward problem is reflected onto the upward one).
pub fn simulate_passage(
    theta: f64,
    start: f64,
    barrier: f64,
    config: &McConfig,
    t_cap: f64,
) -> Result<PassageStats, McError> {
    config.validate()?;
    if barrier == start {
        return Err(McError::Config("barrier must differ from start"));
    }
    if barrier < start {
        return simulate_passage(-theta, -start, -barrier, config, t_cap);
    }
    let n_steps = (t_cap / config.dt - 1e-9) as usize + 1;
    let dt = t_cap / n_steps as f64;
    let decay = exp(-dt);
    let noise = sqrt(-0.5 * expm1(-2.0 * dt));
    let sqrt_dt = sqrt(dt);
    let bridge = config.monitoring == Monitoring::BridgeCorrected;

    let (mut s1, mut s2, mut s3, mut s4) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut capped = 0usize;
    for path in 0..config.n_paths {
        let mut rng = path_rng(config.seed, path);
        let mut x = start;
        let mut time = t_cap;
        let mut hit = false;
        for k in 1..=n_steps {
            let z: f64 = rng.sample(StandardNormal);
            let prev = x;
            x = match config.scheme {
                Scheme::ExactTransition => theta + (x - theta) * decay + noise * z,
                Scheme::Euler => x + (theta - x) * dt + sqrt_dt * z,
            };
            if x >= barrier {
                time = k as f64 * dt;
                hit = true;
                break;
            }
            if bridge {
                let up = (barrier - prev) * (barrier - x);
                if up < 18.0 * dt {
                    let u: f64 = rng.gen();
                    if u < exp(-2.0 * up / dt) {
                        time = k as f64 * dt;
                        hit = true;
                        break;
                    }
                }
            }
        }
        if !hit {
            capped += 1;
        }
        let t2 = time * time;
        s1 += time;
        s2 += t2;
        s3 += t2 * time;
        s4 += t2 * t2;
    }

    let n = config.n_paths as f64;
    let m1 = s1 / n;
    let m2 = s2 / n;
    let m3 = s3 / n;
    let m4 = s4 / n;
    let mu2 = (m2 - m1 * m1).max(0.0);
    let mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
    Ok(PassageStats {
        mean: m1,
        variance: mu2,
        se_mean: sqrt(mu2 / n),
        se_variance: sqrt((mu4 - mu2 * mu2).max(0.0) / n),
        capped,
        n_paths: config.n_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ou::ScaledProblem;

    fn problem(theta: f64, horizon: f64, lo: f64, hi: f64) -> ScaledProblem {
        ScaledProblem::from_horizon(theta, horizon, lo, hi).unwrap()
    }

    #[test]
    fn config_validation() {
        let p = problem(1.0, 1.96, -2.0, 1.0);
        assert!(simulate_trade(&p, &McConfig::new(100, 1e-3, 1)).is_err());
        assert!(simulate_trade(&p, &McConfig::new(2000, 0.05, 1)).is_err());
        assert!(simulate_trade(&p, &McConfig::new(2000, 1e-2, 1)).is_ok());
    }

    #[test]
    fn seed_determinism() {
        let p = problem(1.0, 1.0, -2.0, 1.0);
        let cfg = McConfig::new(5000, 1e-2, 7);
        let a = simulate_trade(&p, &cfg).unwrap();
        let b = simulate_trade(&p, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_trade(&p, &McConfig::new(5000, 1e-2, 8)).unwrap();
        assert_ne!(a.mean_ratio, c.mean_ratio);
    }

    #[test]
    fn symmetric_rule_sharpe_consistent_with_zero() {
        let p = problem(0.0, 1.0, -1.0, 1.0);
        let stats = simulate_trade(&p, &McConfig::new(50_000, 5e-3, 11)).unwrap();
        assert!(
            stats.sr.abs() <= 3.0 * stats.se_sr,
            "sr = {} +- {}",
            stats.sr,
            stats.se_sr
        );
        assert!(stats.mean_duration > 0.0 && stats.mean_duration <= p.horizon);
        assert!(stats.mean_ratio_sq >= stats.mean_ratio * stats.mean_ratio);
    }

    #[test]
    fn exact_transition_marginal_without_barriers() {
        // barriers far out of reach: ι = T on every path, so the ratio
        // moments are x_T moments divided by T
        let t = 1.0;
        let p = problem(0.8, t, -50.0, 50.0);
        let stats = simulate_trade(&p, &McConfig::new(100_000, 1e-2, 3)).unwrap();
        let mean_xt = stats.mean_ratio * t;
        let expected_mean = 0.8 * (1.0 - exp(-t));
        assert!(
            (mean_xt - expected_mean).abs() <= 3.0 * stats.se_mean_ratio * t,
            "mean {mean_xt} vs {expected_mean}"
        );
        let var_xt = (stats.mean_ratio_sq - stats.mean_ratio * stats.mean_ratio) * t * t;
        let expected_var = -0.5 * expm1(-2.0 * t);
        // rough 3-sigma band for a variance estimate of a Gaussian sample
        let se_var = expected_var * sqrt(2.0 / stats.n_paths as f64);
        assert!(
            (var_xt - expected_var).abs() <= 3.0 * se_var,
            "var {var_xt} vs {expected_var}"
        );
        assert_eq!(stats.mean_duration, t);
    }

    #[test]
    fn tiny_profit_taking_level_shrinks_duration() {
        let cfg = McConfig::new(20_000, 1e-3, 5);
        let mut last = f64::INFINITY;
        for hi in [0.5, 0.1, 0.01] {
            let p = problem(1.0, 2.0, -10.0, hi);
            let stats = simulate_trade(&p, &cfg).unwrap();
            assert!(stats.mean_duration < last, "duration not shrinking at hi={hi}");
            last = stats.mean_duration;
        }
        assert!(last < 0.05, "duration {last} should be near zero");
    }

    #[test]
    fn euler_and_exact_agree_within_noise() {
        let p = problem(1.0, 1.96, -2.0, 1.0);
        let exact = simulate_trade(&p, &McConfig::new(40_000, 2e-3, 13)).unwrap();
        let euler = simulate_trade(
            &p,
            &McConfig {
                scheme: Scheme::Euler,
                ..McConfig::new(40_000, 2e-3, 13)
            },
        )
        .unwrap();
        assert!(
            (exact.sr - euler.sr).abs() <= 3.0 * (exact.se_sr + euler.se_sr),
            "exact {} vs euler {}",
            exact.sr,
            euler.sr
        );
    }

    #[test]
    fn passage_reflection_symmetry() {
        // downward passage at θ=0 equals upward passage of the mirrored
        // levels with the same seed
        let cfg = McConfig::new(5_000, 5e-3, 21);
        let down = simulate_passage(0.0, 0.5, -0.5, &cfg, 50.0).unwrap();
        let up = simulate_passage(0.0, -0.5, 0.5, &cfg, 50.0).unwrap();
        assert_eq!(down, up);
        assert_eq!(down.capped, 0);
    }
}
