// SPDX-License-Identifier: Apache-2.0

//! Logarithmic-error landscapes over one or two control parameters, and
//! detection of the resonance dips they contain.
//!
//! Every value is `log₁₀|b_y|²`, evaluated in closed form or by the exact
//! SU(2) product; no ODE integration happens here.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonance::BoundaryAngles;
use crate::roots::parabola_vertex;
use crate::su2::{sequence_propagator_unchecked, RescaledHamiltonianParams};
use crate::synthesis::{ay_closed_form, PulseSequence};
use crate::timemap::segment_time_map;

/// Errors below `10^LOG_FLOOR` are reported as `LOG_FLOOR` and flagged as exact zeros.
pub const LOG_FLOOR: f64 = -30.0;

/// Default length of a 1-D grid.
pub const DEFAULT_1D_POINTS: usize = 2000;
/// Default side length of a 2-D grid.
pub const DEFAULT_2D_POINTS: usize = 400;

/// `(log₁₀ p, exact_zero)` with the floor applied.
pub fn log10_error(p: f64) -> (f64, bool) {
    if p < 10f64.powf(LOG_FLOOR) {
        (LOG_FLOOR, true)
    } else {
        (p.log10().min(0.0), false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("grid must contain at least one point"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::validation(format!("grid value {v} is not finite")));
        }
        Ok(Self {
            name: name.into(),
            values,
        })
    }

    /// `n` evenly spaced points from `start` to `stop` inclusive.
    pub fn linspace(name: impl Into<String>, start: f64, stop: f64, n: usize) -> Result<Self> {
        Self::new(name, linspace(start, stop, n)?)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn linspace(start: f64, stop: f64, n: usize) -> Result<Vec<f64>> {
    if !start.is_finite() || !stop.is_finite() {
        return Err(Error::validation("grid bounds must be finite"));
    }
    match n {
        0 => Err(Error::validation("grid must contain at least one point")),
        1 => Ok(vec![start]),
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            Ok((0..n)
                .map(|i| {
                    if i + 1 == n {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect())
        }
    }
}

/// One grid evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Masked,
    Value { log_error: f64, exact_zero: bool },
}

impl Cell {
    fn from_error(p: f64) -> Self {
        let (log_error, exact_zero) = log10_error(p);
        Cell::Value {
            log_error,
            exact_zero,
        }
    }

    pub fn log_error(&self) -> Option<f64> {
        match *self {
            Cell::Masked => None,
            Cell::Value { log_error, .. } => Some(log_error),
        }
    }
}

/// Log-error values over one axis, or two axes stored row-major
/// (`axis1` indexes rows, `axis2` columns).
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorLandscape {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub cells: Vec<Cell>,
}

impl ErrorLandscape {
    fn from_cells(axis1: Axis, axis2: Option<Axis>, cells: Vec<Cell>) -> Self {
        debug_assert_eq!(
            cells.len(),
            axis1.len() * axis2.as_ref().map_or(1, Axis::len)
        );
        Self {
            axis1,
            axis2,
            cells,
        }
    }

    pub fn is_one_dimensional(&self) -> bool {
        self.axis2.is_none()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.len(), self.axis2.as_ref().map_or(1, Axis::len))
    }

    pub fn cell(&self, i: usize, j: usize) -> Cell {
        self.cells[i * self.shape().1 + j]
    }

    /// `None` for masked points.
    pub fn log_error(&self, i: usize, j: usize) -> Option<f64> {
        self.cell(i, j).log_error()
    }

    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.cell(i, j) == Cell::Masked
    }

    /// Number of unmasked points with `log_error ≤ threshold`.
    pub fn count_below(&self, threshold: f64) -> usize {
        self.cells
            .iter()
            .filter(|c| c.log_error().is_some_and(|v| v <= threshold))
            .count()
    }

    /// Row-major `(axis1, axis2, cell)` triples.
    pub fn iter(&self) -> impl Iterator<Item = (f64, Option<f64>, Cell)> + '_ {
        let (_, n2) = self.shape();
        self.cells.iter().enumerate().map(move |(k, c)| {
            let (i, j) = (k / n2, k % n2);
            (
                self.axis1.values[i],
                self.axis2.as_ref().map(|a| a.values[j]),
                *c,
            )
        })
    }
}

/// `n_y² sin²(ωT'/2)`, the terminal error of a constant pulse.
fn constant_pulse_error(u: f64, t_prime: f64) -> f64 {
    let p = RescaledHamiltonianParams::new(u);
    let s = (0.5 * p.omega * t_prime).sin();
    p.ny * p.ny * s * s
}

/// Terminal error of a constant pulse as a function of its original-time duration.
///
/// A constant pulse in `τ` sweeping `θ_i → θ_f` over original time `T` has
/// `u = (cos θ_f − cos θ_i)/T` and `T' = (θ_i − θ_f)/u`.
pub fn constant_pulse_error_vs_duration(
    angles: &BoundaryAngles,
    t_grid: &[f64],
) -> Result<ErrorLandscape> {
    let axis = Axis::new("T", t_grid.to_vec())?;
    let cells = t_grid
        .iter()
        .map(|&t| {
            if !(t > 0.0) {
                return Cell::Masked;
            }
            if angles.is_degenerate() {
                return Cell::from_error(0.0);
            }
            let u = angles.cos_gap() / t;
            Cell::from_error(constant_pulse_error(u, angles.sweep() / u))
        })
        .collect();
    Ok(ErrorLandscape::from_cells(axis, None, cells))
}

/// The parameter varied by [`sequence_error_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanParameter {
    U,
    Tau1,
}

impl ScanParameter {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScanParameter::U => "u",
            ScanParameter::Tau1 => "tau1",
        }
    }
}

/// Terminal error of the sequence family of `template` as one parameter varies.
///
/// `T'`, `m` and the angles are fixed by the template. Varying `u` keeps `τ1`
/// (for `m = 1`, `τ1 = (θ_i − θ_f)/2u` instead); varying `τ1` keeps `u`. The
/// remaining durations follow from the two sequence relations; grid points
/// that make any duration negative are masked.
pub fn sequence_error_scan(
    template: &PulseSequence,
    parameter: ScanParameter,
    grid: &[f64],
) -> Result<ErrorLandscape> {
    template.validate()?;
    if parameter == ScanParameter::Tau1 && template.m == 1 {
        return Err(Error::validation(
            "tau1 is fixed by u when m = 1; scan u instead",
        ));
    }
    let axis = Axis::new(parameter.as_str(), grid.to_vec())?;
    let angles = template.angles;
    let t_prime = template.t_prime;
    let m = template.m;
    let mf = f64::from(m);
    let cells = grid
        .iter()
        .map(|&x| {
            let (u, tau1) = match parameter {
                ScanParameter::U if m == 1 => (x, 0.5 * angles.sweep() / x),
                ScanParameter::U => (x, template.tau1),
                ScanParameter::Tau1 => (template.u, x),
            };
            if !(u > 0.0) || !(tau1 > 0.0) || !tau1.is_finite() {
                return Cell::Masked;
            }
            let on_time = angles.sweep() / u;
            let tau2 = (t_prime - on_time) / mf;
            let tau3 = if m == 1 {
                0.0
            } else {
                (on_time - 2.0 * tau1) / (mf - 1.0)
            };
            if tau2 < 0.0 || tau3 < 0.0 {
                return Cell::Masked;
            }
            let seq = PulseSequence::assemble(angles, u, tau1, tau2, tau3, m);
            let by = sequence_propagator_unchecked(&seq).by;
            Cell::from_error(by * by)
        })
        .collect();
    Ok(ErrorLandscape::from_cells(axis, None, cells))
}

/// Terminal error of the on-off-on family over amplitude `u` and original-time
/// duration `T`.
///
/// Each on-pulse sweeps half the angle range, so the on-times are fixed by `u`
/// and the off-pulse takes up the rest of `T`. Points with `T` shorter than
/// the two on-pulses (below the boundary hyperbola) are masked.
pub fn on_off_on_landscape(
    angles: &BoundaryAngles,
    u_grid: &[f64],
    t_grid: &[f64],
) -> Result<ErrorLandscape> {
    if angles.is_degenerate() {
        return Err(Error::validation(
            "the angle range is empty; there is nothing to sweep",
        ));
    }
    let axis1 = Axis::new("u", u_grid.to_vec())?;
    let axis2 = Axis::new("T", t_grid.to_vec())?;
    let half = 0.5 * angles.sweep();
    let mid = angles.midpoint();
    let cells: Vec<Cell> = u_grid
        .par_iter()
        .flat_map_iter(|&u| {
            let on = if u > 0.0 {
                let tau1 = half / u;
                segment_time_map(angles.theta_i(), u, tau1)
                    .and_then(|t1| Ok((tau1, t1 + segment_time_map(mid, u, tau1)?)))
                    .ok()
            } else {
                None
            };
            t_grid.iter().map(move |&t| {
                let Some((tau1, t_on)) = on else {
                    return Cell::Masked;
                };
                let t_off = t - t_on;
                if t_off < 0.0 {
                    return Cell::Masked;
                }
                let seq = PulseSequence::assemble(*angles, u, tau1, t_off / mid.sin(), 0.0, 1);
                let by = ay_closed_form(&seq).expect("closed form exists for m = 1");
                Cell::from_error(by * by)
            })
        })
        .collect();
    Ok(ErrorLandscape::from_cells(axis1, Some(axis2), cells))
}

/// Default `(u, T)` grids of the on-off-on landscape.
pub fn default_landscape_grids() -> (Vec<f64>, Vec<f64>) {
    use std::f64::consts::PI;
    (
        linspace(0.15, 1.0, DEFAULT_2D_POINTS).expect("valid grid"),
        linspace(0.5 * PI, 5.0 * PI, DEFAULT_2D_POINTS).expect("valid grid"),
    )
}

/// Default `T` grid for the constant-pulse scan.
pub fn default_duration_grid() -> Vec<f64> {
    use std::f64::consts::PI;
    linspace(0.1 * PI, 8.0 * PI, DEFAULT_1D_POINTS).expect("valid grid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchStructure {
    /// Amplitude of the vertical low-error line.
    pub vertical_u: f64,
    /// Duration where the lower horizontal branch crosses the vertical line.
    pub intersection_t: f64,
}

fn linear(cell: Cell) -> Option<f64> {
    cell.log_error().map(|v| 10f64.powf(v))
}

/// Locate the vertical line and its crossing with the lower horizontal branch
/// in an on-off-on landscape (`axis1 = u`, `axis2 = T`).
///
/// The vertical line is the column of smallest mean error over its feasible
/// durations, refined by a parabola through the neighbouring columns. The
/// crossing is found from the first dip in `T` of the two columns that
/// bracket the line, interpolated to the line's position.
pub fn analyze_branches(landscape: &ErrorLandscape) -> Result<BranchStructure> {
    let Some(t_axis) = landscape.axis2.as_ref() else {
        return Err(Error::validation("branch analysis needs a 2-D landscape"));
    };
    let u = &landscape.axis1.values;
    let (n1, n2) = landscape.shape();
    if n1 < 3 || n2 < 3 {
        return Err(Error::validation(
            "branch analysis needs at least 3×3 points",
        ));
    }
    let column_mean = |i: usize| {
        let vals: Vec<f64> = (0..n2)
            .filter_map(|j| linear(landscape.cell(i, j)))
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let means: Vec<Option<f64>> = (0..n1).map(column_mean).collect();
    let best = (1..n1 - 1)
        .filter(|&i| means[i - 1].is_some() && means[i].is_some() && means[i + 1].is_some())
        .min_by(|&a, &b| means[a].partial_cmp(&means[b]).expect("finite means"))
        .ok_or_else(|| Error::Numeric("no feasible interior column".into()))?;
    let vertical_u = parabola_vertex(
        [u[best - 1], u[best], u[best + 1]],
        [
            means[best - 1].unwrap(),
            means[best].unwrap(),
            means[best + 1].unwrap(),
        ],
    )
    .map(|(x, _)| x)
    .filter(|x| (u[best - 1]..=u[best + 1]).contains(x))
    .unwrap_or(u[best]);

    // The column on the line itself is flat; use its two neighbours.
    let (lo, hi) = (best - 1, best + 1);
    let dip = |i: usize| first_dip(&t_axis.values, |j| landscape.cell(i, j));
    let (t_lo, t_hi) = match (dip(lo), dip(hi)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Numeric(
                "no horizontal branch found next to the vertical line".into(),
            ))
        }
    };
    let w = (vertical_u - u[lo]) / (u[hi] - u[lo]);
    Ok(BranchStructure {
        vertical_u,
        intersection_t: t_lo + w * (t_hi - t_lo),
    })
}

/// First strict interior local minimum along a line of cells, refined by a
/// parabola on the linear error.
fn first_dip(x: &[f64], cell: impl Fn(usize) -> Cell) -> Option<f64> {
    let y: Vec<Option<f64>> = (0..x.len()).map(|j| linear(cell(j))).collect();
    (1..x.len().saturating_sub(1)).find_map(|j| match (y[j - 1], y[j], y[j + 1]) {
        (Some(a), Some(b), Some(c)) if b < a && b <= c => Some(
            parabola_vertex([x[j - 1], x[j], x[j + 1]], [a, b, c])
                .map(|(v, _)| v)
                .unwrap_or(x[j]),
        ),
        _ => None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectedResonance {
    /// Grid index of the local minimum.
    pub index: usize,
    /// Refined axis position.
    pub location: f64,
    /// Refined log-error at `location`.
    pub log_error: f64,
}

/// Local minima of a 1-D landscape whose parabola-refined log-error is at or
/// below `threshold`, sorted by position.
pub fn detect_resonances(
    landscape: &ErrorLandscape,
    threshold: f64,
) -> Result<Vec<DetectedResonance>> {
    if !landscape.is_one_dimensional() {
        return Err(Error::validation(
            "resonance detection needs a 1-D landscape",
        ));
    }
    let x = &landscape.axis1.values;
    let y: Vec<Option<f64>> = landscape.cells.iter().map(|&c| linear(c)).collect();
    let mut found = Vec::new();
    let mut j = 1;
    while j + 1 < x.len() {
        let (Some(a), Some(b)) = (y[j - 1], y[j]) else {
            j += 1;
            continue;
        };
        if !(b < a) {
            j += 1;
            continue;
        }
        // Walk across a plateau of equal values (floored zeros).
        let mut k = j;
        while k + 1 < x.len() && y[k + 1] == Some(b) {
            k += 1;
        }
        let Some(c) = y.get(k + 1).copied().flatten() else {
            j = k + 1;
            continue;
        };
        if b < c {
            let center = (j + k) / 2;
            let (location, value) = if j == k {
                parabola_vertex([x[j - 1], x[j], x[j + 1]], [a, b, c])
                    .filter(|(v, _)| {
                        (x[j - 1]..=x[j + 1]).contains(v) || (x[j + 1]..=x[j - 1]).contains(v)
                    })
                    .map(|(v, w)| (v, w.max(0.0)))
                    .unwrap_or((x[j], b))
            } else {
                (0.5 * (x[j] + x[k]), b)
            };
            let log_error = log10_error(value).0;
            if log_error <= threshold {
                found.push(DetectedResonance {
                    index: center,
                    location,
                    log_error,
                });
            }
        }
        j = k + 1;
    }
    found.sort_by(|p, q| p.location.total_cmp(&q.location));
    Ok(found)
}
