// SPDX-License-Identifier: Apache-2.0

//! State propagation in the adiabatic frame (exact, piecewise) and in the
//! original frame (adaptive Runge–Kutta), plus Bloch-vector trajectories.
//!
//! Amplitudes in the two frames are related by the real symmetric involution
//!
//! ```text
//!   b = R(θ) a,   R(θ) = [[cos θ/2,  sin θ/2],
//!                         [sin θ/2, −cos θ/2]]
//! ```
//!
//! whose rows are the instantaneous eigenvectors `|φ+⟩`, `|φ−⟩`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Stats, Tolerance};
use crate::scan::log10_error;
use crate::su2::{off_unchecked, on_unchecked, RescaledHamiltonianParams};
use crate::synthesis::{PulseSequence, SegmentKind};
use crate::timemap::{segment_spans, ControlWaveform, SegmentSpan};

/// Normalization tolerance of a [`StateVector`].
pub const NORM_TOL: f64 = 1e-10;

/// Default number of samples per segment in the adiabatic frame.
pub const DEFAULT_POINTS_PER_SEGMENT: usize = 64;
/// Default number of uniformly spaced output points in the original frame.
pub const DEFAULT_ORIGINAL_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub amp0: Complex64,
    pub amp1: Complex64,
}

impl StateVector {
    pub fn new(amp0: Complex64, amp1: Complex64) -> Result<Self> {
        let s = Self { amp0, amp1 };
        s.validate()?;
        Ok(s)
    }

    /// `(1, 0)ᵀ`: `|0⟩` in the original frame, `|φ+⟩` in the adiabatic frame.
    pub fn first() -> Self {
        Self {
            amp0: Complex64::new(1.0, 0.0),
            amp1: Complex64::new(0.0, 0.0),
        }
    }

    /// `|φ+(θ)⟩ = (cos θ/2, sin θ/2)ᵀ` in the original basis.
    pub fn eigenstate_plus(theta: f64) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Self {
            amp0: Complex64::new(c, 0.0),
            amp1: Complex64::new(s, 0.0),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.norm_sq();
        if !((n - 1.0).abs() <= NORM_TOL) {
            return Err(Error::validation(format!(
                "state is not normalized: |amp0|² + |amp1|² = {n}"
            )));
        }
        Ok(())
    }

    fn as_array(&self) -> [Complex64; 2] {
        [self.amp0, self.amp1]
    }

    fn from_array(a: [Complex64; 2]) -> Self {
        Self {
            amp0: a[0],
            amp1: a[1],
        }
    }

    /// Apply `R(θ)`: original-frame amplitudes → adiabatic-frame amplitudes.
    /// `R` is its own inverse, so the same call maps back.
    pub fn rotate_frame(&self, theta: f64) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Self {
            amp0: self.amp0 * c + self.amp1 * s,
            amp1: self.amp0 * s - self.amp1 * c,
        }
    }
}

/// `(x, y, z) = (2 Re(a0* a1), 2 Im(a0* a1), |a0|² − |a1|²)`.
pub fn bloch_vector(state: &StateVector) -> [f64; 3] {
    let cross = state.amp0.conj() * state.amp1;
    [
        2.0 * cross.re,
        2.0 * cross.im,
        state.amp0.norm_sqr() - state.amp1.norm_sqr(),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Original,
    Adiabatic,
}

impl Frame {
    pub fn as_str(&self) -> &'static str {
        match self {
            Frame::Original => "original",
            Frame::Adiabatic => "adiabatic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    /// Original time, units `1/Ω`.
    pub t: f64,
    pub tau: f64,
    pub theta: f64,
    pub bloch: [f64; 3],
    pub state: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub frame: Frame,
    pub points: Vec<TrajectoryPoint>,
    /// `|b₂(T')|²`, the population left outside `|φ+⟩`.
    pub terminal_error: f64,
    /// `log₁₀` of the terminal error, floored at [`crate::scan::LOG_FLOOR`].
    pub log_error: f64,
    /// Final state expressed in the adiabatic basis.
    pub final_adiabatic: StateVector,
}

impl TrajectoryRecord {
    fn new(frame: Frame, points: Vec<TrajectoryPoint>, final_adiabatic: StateVector) -> Self {
        let terminal_error = final_adiabatic.amp1.norm_sqr();
        Self {
            frame,
            points,
            terminal_error,
            log_error: log10_error(terminal_error).0,
            final_adiabatic,
        }
    }
}

fn point(t: f64, tau: f64, theta: f64, state: StateVector) -> TrajectoryPoint {
    TrajectoryPoint {
        t,
        tau,
        theta,
        bloch: bloch_vector(&state),
        state,
    }
}

fn segment_propagator(span: &SegmentSpan, dtau: f64) -> crate::su2::PauliDecomposition {
    match span.kind {
        SegmentKind::On => on_unchecked(&RescaledHamiltonianParams::new(span.u), dtau),
        SegmentKind::Off => off_unchecked(dtau),
    }
}

/// Exact adiabatic-frame propagation with the default sampling density.
pub fn propagate_adiabatic(seq: &PulseSequence, start: &StateVector) -> Result<TrajectoryRecord> {
    propagate_adiabatic_with(seq, start, DEFAULT_POINTS_PER_SEGMENT)
}

/// Exact adiabatic-frame propagation, `points_per_segment` sub-steps per segment.
///
/// `start` is given in the adiabatic basis.
pub fn propagate_adiabatic_with(
    seq: &PulseSequence,
    start: &StateVector,
    points_per_segment: usize,
) -> Result<TrajectoryRecord> {
    start.validate()?;
    let spans = segment_spans(seq)?;
    let n = points_per_segment.max(1);
    let mut state = *start;
    let mut points = vec![point(0.0, 0.0, seq.angles.theta_i(), state)];
    for span in &spans {
        let length = span.tau_end - span.tau_start;
        if length == 0.0 {
            continue;
        }
        let origin = state;
        for j in 1..=n {
            let dtau = length * j as f64 / n as f64;
            let local =
                StateVector::from_array(segment_propagator(span, dtau).apply(origin.as_array()));
            let tau = span.tau_start + dtau;
            let (t, theta) = if j == n {
                (span.t_end, span.theta_end)
            } else {
                (span.t_at_tau(tau), span.theta_at_tau(tau))
            };
            points.push(point(t, tau, theta, local));
            if j == n {
                state = local;
            }
        }
    }
    Ok(TrajectoryRecord::new(Frame::Adiabatic, points, state))
}

/// Exact adiabatic-frame state at rescaled time `tau`.
pub fn adiabatic_state_at(
    seq: &PulseSequence,
    start: &StateVector,
    tau: f64,
) -> Result<StateVector> {
    start.validate()?;
    let spans = segment_spans(seq)?;
    let mut state = start.as_array();
    for span in &spans {
        if tau <= span.tau_start {
            break;
        }
        let dtau = tau.min(span.tau_end) - span.tau_start;
        state = segment_propagator(span, dtau).apply(state);
    }
    Ok(StateVector::from_array(state))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginalFrameOptions {
    /// Local error tolerance (used as both relative and absolute tolerance).
    pub tol: f64,
    /// Number of uniformly spaced output times; switch times are always added.
    pub output_points: usize,
}

impl Default for OriginalFrameOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            output_points: DEFAULT_ORIGINAL_POINTS,
        }
    }
}

/// Integrate `i ȧ = H a` along a control waveform. `start` is in the original basis.
pub fn propagate_original(
    waveform: &ControlWaveform,
    start: &StateVector,
    tol: f64,
) -> Result<TrajectoryRecord> {
    propagate_original_with(
        waveform,
        start,
        &OriginalFrameOptions {
            tol,
            ..OriginalFrameOptions::default()
        },
    )
}

pub fn propagate_original_with(
    waveform: &ControlWaveform,
    start: &StateVector,
    opts: &OriginalFrameOptions,
) -> Result<TrajectoryRecord> {
    if !(opts.tol > 0.0) {
        return Err(Error::validation(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    start.validate()?;
    if waveform.spans.is_empty() {
        return Err(Error::validation("waveform has no segments"));
    }
    let total = waveform.total_t;
    let n_out = opts.output_points.max(2);
    let tol = Tolerance {
        rtol: opts.tol,
        atol: opts.tol,
    };

    let mut state = start.as_array();
    let mut points = vec![point(0.0, 0.0, waveform.theta_i(), *start)];
    let mut h = 1e-2;
    let mut stats = Stats::default();
    for span in &waveform.spans {
        if span.t_end <= span.t_start {
            continue;
        }
        let span = *span;
        let rhs = move |t: f64, a: &ode::State| {
            let delta = detuning_in_span(&span, t);
            let half_i = Complex64::new(0.0, -0.5);
            [
                half_i * (a[0] * delta + a[1]),
                half_i * (a[0] - a[1] * delta),
            ]
        };
        // Output times strictly inside the span, then the span end.
        let first = ((span.t_start / total) * (n_out - 1) as f64).floor() as usize + 1;
        let mut t_prev = span.t_start;
        let mut j = first;
        loop {
            let t_uniform = total * j as f64 / (n_out - 1) as f64;
            let (t_next, at_end) = if t_uniform < span.t_end - 1e-12 * total.max(1.0) {
                (t_uniform, false)
            } else {
                (span.t_end, true)
            };
            state = ode::integrate(rhs, t_prev, state, t_next, &mut h, tol, &mut stats)?;
            let theta = if at_end {
                span.theta_end
            } else {
                span.theta_at_t(t_next)
            };
            let tau = if at_end {
                span.tau_end
            } else {
                span.tau_at_t(t_next)
            };
            points.push(point(t_next, tau, theta, StateVector::from_array(state)));
            t_prev = t_next;
            if at_end {
                break;
            }
            j += 1;
        }
    }
    let final_original = StateVector::from_array(state);
    let final_adiabatic = final_original.rotate_frame(waveform.theta_f());
    Ok(TrajectoryRecord::new(
        Frame::Original,
        points,
        final_adiabatic,
    ))
}

/// `Δ(t)/Ω = cot θ(t)` inside a span, from the closed-form angle.
fn detuning_in_span(span: &SegmentSpan, t: f64) -> f64 {
    if span.u == 0.0 {
        return crate::resonance::cot(span.theta_start);
    }
    let c = (span.theta_start.cos() + span.u * (t - span.t_start)).clamp(-1.0, 1.0);
    c / (1.0 - c * c).sqrt()
}

/// Map every point of an original-frame trajectory to the adiabatic frame.
pub fn to_adiabatic_frame(record: &TrajectoryRecord) -> TrajectoryRecord {
    if record.frame == Frame::Adiabatic {
        return record.clone();
    }
    let points = record
        .points
        .iter()
        .map(|p| point(p.t, p.tau, p.theta, p.state.rotate_frame(p.theta)))
        .collect();
    TrajectoryRecord {
        frame: Frame::Adiabatic,
        points,
        ..record.clone()
    }
}
