//! Renewal-theory statistics of the perpetually repeated round trip
//! l → u → l (θ = 0 throughout): passage-time means and variances from
//! the G and J functions, and the asymptotic return and Sharpe ratio per
//! unit time.

use crate::fmath::SQRT_PI;
use crate::specfun::{g_script, int_exp_sq, j_script};

use super::ClassicalError;

/// Passage-time statistics of the two legs and the round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenewalStats {
    /// E(T) for l → u.
    pub eps_up: f64,
    /// E(T) for u → l.
    pub eps_down: f64,
    /// E(T) for the round trip (sum of the legs).
    pub eps_round: f64,
    /// V(T) for l → u.
    pub var_up: f64,
    /// V(T) for u → l.
    pub var_down: f64,
    /// V(T) for the round trip (sum of the legs).
    pub var_round: f64,
}

/// ε and ϑ for the legs and the round trip:
/// ε(l→u) = 2(G(u) - G(l)), ϑ(l→u) = 4((G²-2J)(u) - (G²-2J)(l)),
/// with the downward leg obtained by reflection. J enters through
/// differences only, so its normalization is immaterial.
pub fn renewal_stats(l: f64, u: f64) -> Result<RenewalStats, ClassicalError> {
    if l > u {
        return Err(ClassicalError::Domain("need l <= u"));
    }
    if l == u {
        return Ok(RenewalStats {
            eps_up: 0.0,
            eps_down: 0.0,
            eps_round: 0.0,
            var_up: 0.0,
            var_down: 0.0,
            var_round: 0.0,
        });
    }
    let phi = |x: f64| -> Result<f64, ClassicalError> {
        let g = g_script(x)?;
        Ok(g * g - 2.0 * j_script(x)?)
    };
    let eps_up = 2.0 * (g_script(u)? - g_script(l)?);
    let eps_down = 2.0 * (g_script(-l)? - g_script(-u)?);
    let var_up = 4.0 * (phi(u)? - phi(l)?);
    let var_down = 4.0 * (phi(-l)? - phi(-u)?);
    Ok(RenewalStats {
        eps_up,
        eps_down,
        eps_round: eps_up + eps_down,
        var_up,
        var_down,
        var_round: var_up + var_down,
    })
}

/// Asymptotic per-unit-time return and Sharpe ratio of the repeated
/// round trip with transaction fee `c` and risk-free rate `r_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BertramResult {
    /// r = (u - l - c)/ε(l→u→l).
    pub r: f64,
    /// √(ε/ϑ)·(u-l-c-r_f)/(u-l-c); `None` when fees absorb the whole
    /// spread (u - l - c = 0) and the ratio is undefined.
    pub sr: Option<f64>,
    pub c: f64,
    pub r_f: f64,
}

pub fn bertram_sr(l: f64, u: f64, c: f64, r_f: f64) -> Result<BertramResult, ClassicalError> {
    if l >= u {
        return Err(ClassicalError::Domain("need l < u"));
    }
    let stats = renewal_stats(l, u)?;
    let spread = u - l - c;
    let r = spread / stats.eps_round;
    let sr = if spread == 0.0 {
        None
    } else {
        Some(crate::fmath::sqrt(stats.eps_round / stats.var_round) * (spread - r_f) / spread)
    };
    Ok(BertramResult { r, sr, c, r_f })
}

/// Closed-form shortcut for the round-trip expectation:
/// ε(l→u→l) = 2√π (I(u) - I(l)).
pub fn eps_round_closed_form(l: f64, u: f64) -> Result<f64, ClassicalError> {
    Ok(2.0 * SQRT_PI * (int_exp_sq(u)? - int_exp_sq(l)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{g_script_even, g_script_odd, j_script_odd};
    use approx::assert_abs_diff_eq;

    #[test]
    fn degenerate_interval_is_all_zeros() {
        let s = renewal_stats(0.7, 0.7).unwrap();
        assert_eq!(s.eps_round, 0.0);
        assert_eq!(s.var_round, 0.0);
        assert!(renewal_stats(0.8, 0.7).is_err());
    }

    #[test]
    fn symmetric_round_trip_shortcut() {
        // l = -u: ε(l→u→l) = 4√π I(u) by oddness of I
        let u = 0.9;
        let s = renewal_stats(-u, u).unwrap();
        assert_abs_diff_eq!(
            s.eps_round,
            4.0 * SQRT_PI * int_exp_sq(u).unwrap(),
            epsilon = 1e-12
        );
        // legs are equal by symmetry
        assert_abs_diff_eq!(s.eps_up, s.eps_down, epsilon = 1e-12);
        assert_abs_diff_eq!(s.var_up, s.var_down, epsilon = 1e-10);
    }

    #[test]
    fn round_trip_closed_form_identity() {
        // deterministic pseudo-random (l, u) pairs in [-2, 2]
        let mut state = 0x51a3u64;
        for _ in 0..20 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = -2.0 + 4.0 * ((state >> 11) as f64 / (1u64 << 53) as f64);
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = -2.0 + 4.0 * ((state >> 11) as f64 / (1u64 << 53) as f64);
            let (l, u) = if a < b { (a, b) } else { (b, a) };
            let s = renewal_stats(l, u).unwrap();
            let shortcut = eps_round_closed_form(l, u).unwrap();
            assert_abs_diff_eq!(s.eps_round, shortcut, epsilon = 1e-10 * (1.0 + shortcut.abs()));
        }
    }

    #[test]
    fn additivity_is_exact_by_construction() {
        let s = renewal_stats(-0.5, 1.2).unwrap();
        assert_eq!(s.eps_round, s.eps_up + s.eps_down);
        assert_eq!(s.var_round, s.var_up + s.var_down);
        assert!(s.eps_up > 0.0 && s.eps_down > 0.0);
        assert!(s.var_up > 0.0 && s.var_down > 0.0);
    }

    #[test]
    fn round_trip_variance_via_parity_parts() {
        // ϑ(l→u→l) = 16((G⁽ᵉ⁾G⁽ᵒ⁾ - J⁽ᵒ⁾)(u) - (G⁽ᵉ⁾G⁽ᵒ⁾ - J⁽ᵒ⁾)(l))
        let (l, u) = (-0.8, 1.1);
        let s = renewal_stats(l, u).unwrap();
        let combo = |x: f64| {
            g_script_even(x).unwrap() * g_script_odd(x).unwrap() - j_script_odd(x).unwrap()
        };
        let alt = 16.0 * (combo(u) - combo(l));
        assert_abs_diff_eq!(s.var_round, alt, epsilon = 1e-9 * (1.0 + alt.abs()));
    }

    #[test]
    fn bertram_degenerate_fee() {
        let (l, u) = (-0.7, 0.7);
        let b = bertram_sr(l, u, u - l, 0.0).unwrap();
        assert_eq!(b.r, 0.0);
        assert!(b.sr.is_none());
    }

    #[test]
    fn bertram_costless_ratio() {
        // c = 0, r_f = 0 collapses SR to √(ε/ϑ)
        let (l, u) = (-0.7071, 0.7071);
        let s = renewal_stats(l, u).unwrap();
        let b = bertram_sr(l, u, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(
            b.sr.unwrap(),
            crate::fmath::sqrt(s.eps_round / s.var_round),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(b.r, (u - l) / s.eps_round, epsilon = 1e-14);
    }
}
