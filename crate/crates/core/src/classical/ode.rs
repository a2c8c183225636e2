//! Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.

use super::ClassicalError;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, pairs: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in pairs {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate y' = f(x, y) from x0 to x1 (x1 > x0) with local tolerance
/// `tol`, returning y(x1).
pub(crate) fn integrate<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    f: &F,
    x0: f64,
    x1: f64,
    y0: [f64; N],
    tol: f64,
) -> Result<[f64; N], ClassicalError> {
    debug_assert!(x1 >= x0);
    if x1 == x0 {
        return Ok(y0);
    }
    let mut x = x0;
    let mut y = y0;
    let mut h = ((x1 - x0) / 16.0).min(0.1);
    let mut steps = 0usize;
    while x < x1 {
        if steps > 1_000_000 {
            return Err(ClassicalError::IntegratorFailure);
        }
        steps += 1;
        if x + h > x1 {
            h = x1 - x;
        }
        let k1 = f(x, &y);
        let k2 = f(x + 0.2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(x + 0.3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(x + 0.8 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            x + 8.0 / 9.0 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            x + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y5 = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(x + h, &y5);
        let y4 = axpy(
            &y,
            h,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );

        let mut err = 0.0f64;
        for i in 0..N {
            let scale = 1.0 + y[i].abs().max(y5[i].abs());
            err = err.max((y5[i] - y4[i]).abs() / scale);
        }

        if err <= tol {
            x += h;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * libm::pow(tol / err, 0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < 1e-14 {
            return Err(ClassicalError::IntegratorFailure);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_growth() {
        let y = integrate(&|_, y: &[f64; 1]| [y[0]], 0.0, 1.0, [1.0], 1e-12).unwrap();
        assert_abs_diff_eq!(y[0], libm::exp(1.0), epsilon = 1e-10);
    }

    #[test]
    fn harmonic_oscillator() {
        let y = integrate(
            &|_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            core::f64::consts::PI,
            [1.0, 0.0],
            1e-12,
        )
        .unwrap();
        assert_abs_diff_eq!(y[0], -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(y[1], 0.0, epsilon = 1e-9);
    }
}
