//! Dormand–Prince 5(4) integrator for autonomous complex systems confined
//! to the unit disk.

use crate::error::{Error, Result};
use num_complex::Complex64;

pub(crate) const MAX_STEPS: usize = 1_000_000;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights are the last row of A; these are fifth minus fourth
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Outcome of an integration on `[0, t_end]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct OdeOutcome<const N: usize> {
    pub y: [Complex64; N],
    pub steps: usize,
    /// Sum of the accepted local error estimates on the first component.
    pub local_error: f64,
}

/// Integrates `y' = rhs(y)` from `y0` up to `t_end`.
///
/// The first component must stay in the open disk: any stage leaving it
/// rejects the step. `tol` is both the absolute and relative tolerance.
pub(crate) fn dopri5<const N: usize, F>(rhs: F, y0: [Complex64; N], t_end: f64, tol: f64) -> Result<OdeOutcome<N>>
where
    F: Fn(&[Complex64; N]) -> [Complex64; N],
{
    let mut y = y0;
    if t_end == 0.0 {
        return Ok(OdeOutcome { y, steps: 0, local_error: 0.0 });
    }
    let inside = |v: &[Complex64; N]| v[0].norm_sqr() < 1.0 && v.iter().all(|c| c.re.is_finite() && c.im.is_finite());
    let mut t = 0.0;
    let mut k1 = rhs(&y);
    let scale0 = y[0].norm().max(1e-3);
    let mut h = (0.01 * scale0 / k1[0].norm().max(1e-12)).min(t_end).min(0.1);
    let mut steps = 0;
    let mut local_error = 0.0;

    while t < t_end {
        if steps >= MAX_STEPS {
            return Err(Error::StepBudget { t, x: y[0] });
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            return Err(Error::StepUnderflow { t, x: y[0] });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let mut k = [[Complex64::new(0.0, 0.0); N]; 7];
        k[0] = k1;
        let mut ok = true;
        let mut y_new = y;
        for s in 1..7 {
            let mut ys = y;
            for (i, v) in ys.iter_mut().enumerate() {
                for j in 0..s {
                    *v += h * A[s][j] * k[j][i];
                }
            }
            if !inside(&ys) {
                ok = false;
                break;
            }
            k[s] = rhs(&ys);
            if s == 6 {
                y_new = ys;
            }
        }
        if !ok {
            h *= 0.25;
            continue;
        }

        let mut err: f64 = 0.0;
        let mut err0 = 0.0;
        for i in 0..N {
            let mut e = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                e += h * E[s] * k[s][i];
            }
            let sc = tol * (1.0 + y[i].norm().max(y_new[i].norm()));
            err = err.max(e.norm() / sc);
            if i == 0 {
                err0 = e.norm();
            }
        }

        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y = y_new;
            k1 = k[6];
            steps += 1;
            local_error += err0;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= if err <= 1.0 { fac } else { fac.min(1.0) };
    }
    Ok(OdeOutcome { y, steps, local_error })
}
