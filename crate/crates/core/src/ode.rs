// SPDX-License-Identifier: Apache-2.0

//! Dormand–Prince 5(4) integrator for the two complex amplitudes.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) type State = [Complex64; 2];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (coef, k) in terms {
        out[0] += k[0] * (h * coef);
        out[1] += k[1] * (h * coef);
    }
    out
}

/// Integrate `y' = f(t, y)` from `t0` to `t1`, stopping exactly at `t1`.
///
/// `h` is the initial step suggestion and is updated to the last accepted
/// step so consecutive calls continue smoothly.
pub(crate) fn integrate<F>(
    f: F,
    t0: f64,
    y0: State,
    t1: f64,
    h: &mut f64,
    tol: Tolerance,
    stats: &mut Stats,
) -> Result<State>
where
    F: Fn(f64, &State) -> State,
{
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(y0);
    }
    let h_min = 1e-14 * t1.abs().max(1.0);
    let mut t = t0;
    let mut y = y0;
    let mut step = h.min(span).max(h_min);
    let mut k1 = f(t, &y);

    while t < t1 {
        let last = t + step >= t1;
        let hh = if last { t1 - t } else { step };

        let k2 = f(t + C2 * hh, &axpy(&y, &[(A21, &k1)], hh));
        let k3 = f(t + C3 * hh, &axpy(&y, &[(A31, &k1), (A32, &k2)], hh));
        let k4 = f(
            t + C4 * hh,
            &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hh),
        );
        let k5 = f(
            t + C5 * hh,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hh),
        );
        let k6 = f(
            t + hh,
            &axpy(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                hh,
            ),
        );
        let y_new = axpy(
            &y,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            hh,
        );
        let k7 = f(t + hh, &y_new);

        let mut err_sq = 0.0;
        for i in 0..2 {
            let e =
                (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hh;
            let scale = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            err_sq += (e.re / scale).powi(2) + (e.im / scale).powi(2);
        }
        let err = (err_sq / 4.0).sqrt();

        if err <= 1.0 {
            t = if last { t1 } else { t + hh };
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !last {
                step = hh * factor;
            }
            *h = step;
        } else {
            stats.rejected += 1;
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            step = hh * factor;
            if step < h_min {
                return Err(Error::Numeric(format!(
                    "step size underflow at t = {t} (h = {step:e})"
                )));
            }
        }
    }
    Ok(y)
}
