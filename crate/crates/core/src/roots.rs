// SPDX-License-Identifier: Apache-2.0

//! Scalar root finding and bracketed minimization.
//!
//! The root finder is a bracketed secant/bisection hybrid: a secant
//! (regula-falsi) step is taken when it lands strictly inside the bracket and
//! the bracket keeps shrinking fast enough, otherwise the bracket is bisected.

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Find a root of `f` in `[a, b]`, which must bracket a sign change.
///
/// Stops when `|f(x)| ≤ residual_tol` or the bracket has collapsed to
/// floating-point resolution.
pub fn find_root<F>(mut f: F, a: f64, b: f64, residual_tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            residual: 0.0,
            iterations: 0,
        });
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::Numeric(format!(
            "interval [{lo}, {hi}] does not bracket a root (f = {f_lo:e}, {f_hi:e})"
        )));
    }

    let mut best = if f_lo.abs() < f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    // Width of the bracket two iterations ago; the secant must at least halve it.
    let mut checkpoint_width = hi - lo;
    for iter in 1..=MAX_ITERATIONS {
        let width = hi - lo;
        let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let stalled = iter % 2 == 0 && width > 0.5 * checkpoint_width;
        let x = if !stalled && secant > lo && secant < hi {
            secant
        } else {
            0.5 * (lo + hi)
        };
        if iter % 2 == 0 {
            checkpoint_width = width;
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite function value at x = {x}"
            )));
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= residual_tol {
            return Ok(Root {
                x,
                residual: fx.abs(),
                iterations: iter,
            });
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        if hi - lo <= f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) * 2.0 {
            return Ok(Root {
                x: best.0,
                residual: best.1.abs(),
                iterations: iter,
            });
        }
    }
    Ok(Root {
        x: best.0,
        residual: best.1.abs(),
        iterations: MAX_ITERATIONS,
    })
}

/// Golden-section search for a local minimum of `f` on `[a, b]`.
/// Returns `(x_min, f(x_min))`.
pub fn minimize_bracketed<F>(mut f: F, a: f64, b: f64, x_tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..MAX_ITERATIONS {
        if hi - lo <= x_tol {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Vertex of the parabola through three points `(x0,y0)`, `(x1,y1)`, `(x2,y2)`.
/// Returns `None` when the points are collinear.
pub fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d12 - d01) / (x[2] - x[0]);
    if !curvature.is_finite() || curvature.abs() < f64::MIN_POSITIVE {
        return None;
    }
    // Newton form: y = y0 + d01 (x − x0) + c (x − x0)(x − x1)
    let b = d01 - curvature * (x[0] + x[1]);
    let xv = -b / (2.0 * curvature);
    let yv = y[0] + d01 * (xv - x[0]) + curvature * (xv - x[0]) * (xv - x[1]);
    Some((xv, yv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn finds_simple_roots() {
        let r = find_root(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert_abs_diff_eq!(r.x, 2f64.sqrt(), epsilon = 1e-13);
        let r = find_root(|x| x.cos() - x, 0.0, 1.0, RESIDUAL_TOL).unwrap();
        assert!(r.residual <= RESIDUAL_TOL);
        assert_abs_diff_eq!(r.x, 0.739_085_133_215_160_6, epsilon = 1e-11);
    }

    #[test]
    fn converges_on_flat_steep_function() {
        // Pure secant stalls here; the bisection fallback must rescue it.
        let r = find_root(|x: f64| x.powi(9) - 1e-3, -1.0, 2.0, 1e-15).unwrap();
        assert_abs_diff_eq!(r.x, 1e-3f64.powf(1.0 / 9.0), epsilon = 1e-10);
        assert!(r.iterations < MAX_ITERATIONS);
    }

    #[test]
    fn rejects_non_bracket() {
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn endpoint_root() {
        let r = find_root(|x| x - 1.0, 1.0, 3.0, 1e-12).unwrap();
        assert_eq!(r.x, 1.0);
    }

    #[test]
    fn golden_section_minimum() {
        let (x, fx) = minimize_bracketed(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-10);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(fx, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn parabola_vertex_exact_for_quadratics() {
        let f = |x: f64| 3.0 * (x - 1.25).powi(2) - 0.5;
        let xs = [0.9, 1.1, 1.6];
        let (xv, yv) = parabola_vertex(xs, xs.map(f)).unwrap();
        assert_abs_diff_eq!(xv, 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(yv, -0.5, epsilon = 1e-12);
        assert!(parabola_vertex([0.0, 1.0, 2.0], [1.0, 2.0, 3.0]).is_none());
    }
}
