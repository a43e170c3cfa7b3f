// SPDX-License-Identifier: Apache-2.0

//! Rescaled time `τ` ↔ original time `t` via `dτ = Ω dt / sin θ`.
//!
//! On a segment where `θ(τ) = θ_s − uτ` the map integrates in closed form:
//! `t = (cos(θ_s − uτ) − cos θ_s)/u`, and for `u = 0` simply `t = τ sin θ_s`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonance::cot;
use crate::synthesis::{PulseSequence, SegmentKind};

fn check_angle(theta: f64, what: &str) -> Result<()> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::domain(format!("{what} θ = {theta} leaves (0, π)")));
    }
    Ok(())
}

/// Original-time duration of a segment starting at angle `theta_start`.
pub fn segment_time_map(theta_start: f64, u: f64, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::domain(format!(
            "segment duration must be non-negative, got {tau}"
        )));
    }
    check_angle(theta_start, "segment start")?;
    let theta_end = theta_start - u * tau;
    check_angle(theta_end, "segment end")?;
    if u == 0.0 {
        return Ok(tau * theta_start.sin());
    }
    // cos(θ_s − uτ) − cos θ_s = 2 sin(θ_s − uτ/2) sin(uτ/2)
    let half = 0.5 * u * tau;
    Ok(2.0 * (theta_start - half).sin() * half.sin() / u)
}

/// Inverse of [`segment_time_map`]: rescaled duration of a segment lasting `t`.
pub fn segment_rescaled_duration(theta_start: f64, u: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "segment duration must be non-negative, got {t}"
        )));
    }
    check_angle(theta_start, "segment start")?;
    if u == 0.0 {
        return Ok(t / theta_start.sin());
    }
    let c = theta_start.cos() + u * t;
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::domain(format!(
            "t = {t} runs past the end of the angle range (cos θ = {c})"
        )));
    }
    let theta_end = c.acos();
    check_angle(theta_end, "segment end")?;
    Ok((theta_start - theta_end) / u)
}

/// One segment of a sequence placed on both time axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpan {
    pub kind: SegmentKind,
    pub u: f64,
    pub tau_start: f64,
    pub tau_end: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub theta_start: f64,
    pub theta_end: f64,
}

impl SegmentSpan {
    /// `θ` at original time `t` inside the segment.
    pub fn theta_at_t(&self, t: f64) -> f64 {
        if self.u == 0.0 {
            return self.theta_start;
        }
        let c = (self.theta_start.cos() + self.u * (t - self.t_start)).clamp(-1.0, 1.0);
        c.acos()
    }

    /// `θ` at rescaled time `tau` inside the segment.
    pub fn theta_at_tau(&self, tau: f64) -> f64 {
        self.theta_start - self.u * (tau - self.tau_start)
    }

    /// Rescaled time corresponding to original time `t` inside the segment.
    pub fn tau_at_t(&self, t: f64) -> f64 {
        if self.u == 0.0 {
            return self.tau_start + (t - self.t_start) / self.theta_start.sin();
        }
        self.tau_start + (self.theta_start - self.theta_at_t(t)) / self.u
    }

    /// Original time corresponding to rescaled time `tau` inside the segment.
    pub fn t_at_tau(&self, tau: f64) -> f64 {
        let dtau = tau - self.tau_start;
        if self.u == 0.0 {
            return self.t_start + dtau * self.theta_start.sin();
        }
        let half = 0.5 * self.u * dtau;
        self.t_start + 2.0 * (self.theta_start - half).sin() * half.sin() / self.u
    }
}

/// Place every segment of `seq` on both time axes.
pub fn segment_spans(seq: &PulseSequence) -> Result<Vec<SegmentSpan>> {
    seq.validate()?;
    let mut spans = Vec::with_capacity(2 * seq.m as usize + 1);
    let (mut tau, mut t, mut theta) = (0.0, 0.0, seq.angles.theta_i());
    for seg in seq.segments() {
        let dt = segment_time_map(theta, seg.u, seg.tau)?;
        let theta_end = theta - seg.u * seg.tau;
        spans.push(SegmentSpan {
            kind: seg.kind,
            u: seg.u,
            tau_start: tau,
            tau_end: tau + seg.tau,
            t_start: t,
            t_end: t + dt,
            theta_start: theta,
            theta_end,
        });
        tau += seg.tau;
        t += dt;
        theta = theta_end;
    }
    Ok(spans)
}

/// Total duration of the sequence in original time (units `1/Ω`).
pub fn total_original_duration(seq: &PulseSequence) -> Result<f64> {
    Ok(segment_spans(seq)?.last().map_or(0.0, |s| s.t_end))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformSample {
    pub t: f64,
    pub tau: f64,
    pub theta: f64,
    pub delta_over_omega: f64,
}

/// `θ(t)` and `Δ(t)/Ω` of a sequence sampled in original time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlWaveform {
    pub samples: Vec<WaveformSample>,
    /// `(t, τ)` at the start of the sequence, every switch, and the end.
    pub segment_boundaries: Vec<(f64, f64)>,
    pub total_t: f64,
    pub total_tau: f64,
    pub spans: Vec<SegmentSpan>,
}

impl ControlWaveform {
    /// Span containing original time `t` (the later one at a switch).
    pub fn span_at(&self, t: f64) -> &SegmentSpan {
        let idx = self.spans.partition_point(|s| s.t_end <= t);
        &self.spans[idx.min(self.spans.len() - 1)]
    }

    pub fn theta_at(&self, t: f64) -> f64 {
        self.span_at(t).theta_at_t(t)
    }

    pub fn tau_at(&self, t: f64) -> f64 {
        self.span_at(t).tau_at_t(t)
    }

    pub fn delta_at(&self, t: f64) -> f64 {
        cot(self.theta_at(t))
    }

    pub fn theta_i(&self) -> f64 {
        self.spans[0].theta_start
    }

    pub fn theta_f(&self) -> f64 {
        self.spans[self.spans.len() - 1].theta_end
    }
}

/// Sample a sequence uniformly in original time, with every switch time inserted.
pub fn waveform(seq: &PulseSequence, n_samples: usize) -> Result<ControlWaveform> {
    if n_samples < 2 {
        return Err(Error::validation(format!(
            "a waveform needs at least 2 samples, got {n_samples}"
        )));
    }
    let spans = segment_spans(seq)?;
    let total_t = spans.last().map_or(0.0, |s| s.t_end);
    let total_tau = spans.last().map_or(0.0, |s| s.tau_end);

    let mut boundaries = vec![(0.0, 0.0)];
    for s in &spans {
        if s.t_end > boundaries.last().unwrap().0 {
            boundaries.push((s.t_end, s.tau_end));
        }
    }

    let mut times: Vec<f64> = (0..n_samples)
        .map(|j| total_t * j as f64 / (n_samples - 1) as f64)
        .chain(boundaries.iter().map(|b| b.0))
        .collect();
    times.sort_by(f64::total_cmp);
    let resolution = 1e-12 * total_t.max(1.0);
    times.dedup_by(|a, b| (*a - *b).abs() <= resolution);
    if let Some(last) = times.last_mut() {
        *last = total_t;
    }

    let mut wf = ControlWaveform {
        samples: Vec::with_capacity(times.len()),
        segment_boundaries: boundaries,
        total_t,
        total_tau,
        spans,
    };
    for &t in &times {
        let span = *wf.span_at(t);
        let (theta, tau) = if t >= total_t {
            (span.theta_end, span.tau_end)
        } else {
            (span.theta_at_t(t), span.tau_at_t(t))
        };
        wf.samples.push(WaveformSample {
            t,
            tau,
            theta,
            delta_over_omega: cot(theta),
        });
    }
    Ok(wf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::{constant_resonance, BoundaryAngles};
    use crate::synthesis::synthesize;
    use approx::assert_abs_diff_eq;

    #[test]
    fn off_segment_at_equator() {
        let t = segment_time_map(PI / 2.0, 0.0, 0.908243).unwrap();
        assert_abs_diff_eq!(t, 0.908243, epsilon = 1e-15);
        assert_eq!(segment_time_map(1.0, 0.4, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn first_on_segment_of_reference_sequence() {
        let a = BoundaryAngles::reference();
        let t1 = segment_time_map(a.theta_i(), 0.773436, 1.902070).unwrap();
        // Closed form −cos θ_i/u with cos θ_i = −10/√101.
        let expected = 10.0 / 101f64.sqrt() / 0.773436;
        assert_abs_diff_eq!(t1, expected, epsilon = 1e-5);
        assert_abs_diff_eq!(t1, 1.28652, epsilon = 1e-5);
    }

    #[test]
    fn leaving_the_angle_range_is_an_error() {
        assert!(segment_time_map(0.5, 1.0, 1.0).is_err());
        assert!(segment_time_map(1.0, 0.1, -1.0).is_err());
        assert!(segment_rescaled_duration(0.5, 1.0, 10.0).is_err());
    }

    #[test]
    fn round_trip() {
        for &(th, u, tau) in &[
            (3.0, 0.77, 1.9),
            (2.0, 0.0, 3.3),
            (1.5, 0.2, 4.0),
            (2.9, 2.0, 1.3),
        ] {
            let t = segment_time_map(th, u, tau).unwrap();
            let back = segment_rescaled_duration(th, u, t).unwrap();
            assert_abs_diff_eq!(back, tau, epsilon = 1e-12);
        }
    }

    #[test]
    fn reference_total_durations() {
        let a = BoundaryAngles::reference();
        for &(tp, want) in &[(1.5, 1.108), (3.0, 1.943), (4.5, 2.952)] {
            let seq = synthesize(&a, tp * PI).unwrap();
            let t = total_original_duration(&seq).unwrap();
            assert!((t / PI - want).abs() < 0.002, "T'={tp}π → T = {}π", t / PI);
            assert!(t <= seq.t_prime);
        }
    }

    #[test]
    fn on_off_on_matches_symmetric_closed_form() {
        let a = BoundaryAngles::reference();
        let seq = synthesize(&a, 1.5 * PI).unwrap();
        let t1 = -a.theta_i().cos() / seq.u;
        let t2 = seq.tau2;
        assert_abs_diff_eq!(
            total_original_duration(&seq).unwrap(),
            2.0 * t1 + t2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn constant_pulse_duration_matches_resonance() {
        let a = BoundaryAngles::reference();
        let r = constant_resonance(&a, 1).unwrap();
        let seq = PulseSequence::constant(a, r.u, r.t_prime).unwrap();
        assert_abs_diff_eq!(
            total_original_duration(&seq).unwrap(),
            r.t_original,
            epsilon = 1e-12
        );
    }

    #[test]
    fn waveform_shape() {
        let a = BoundaryAngles::reference();
        let seq = synthesize(&a, 1.5 * PI).unwrap();
        let wf = waveform(&seq, 200).unwrap();
        assert_abs_diff_eq!(wf.samples[0].theta, a.theta_i(), epsilon = 1e-10);
        assert_abs_diff_eq!(
            wf.samples.last().unwrap().theta,
            a.theta_f(),
            epsilon = 1e-10
        );
        assert_eq!(wf.segment_boundaries.len(), 4);
        for w in wf.samples.windows(2) {
            assert!(w[1].t > w[0].t);
            assert!(w[1].tau > w[0].tau);
            assert!(w[1].theta <= w[0].theta + 1e-15);
        }
        for s in &wf.samples {
            assert_abs_diff_eq!(s.delta_over_omega, cot(s.theta), epsilon = 1e-12);
        }
        let off = wf.spans[1];
        assert_eq!(off.kind, SegmentKind::Off);
        for s in wf
            .samples
            .iter()
            .filter(|s| s.t > off.t_start && s.t < off.t_end)
        {
            assert_abs_diff_eq!(s.theta, PI / 2.0, epsilon = 1e-12);
        }
        assert!(waveform(&seq, 1).is_err());
    }

    #[test]
    fn middle_off_pulse_is_longest_in_original_time() {
        let a = BoundaryAngles::reference();
        let seq = synthesize(&a, 4.5 * PI).unwrap();
        let wf = waveform(&seq, 100).unwrap();
        let offs: Vec<f64> = wf
            .spans
            .iter()
            .filter(|s| s.kind == SegmentKind::Off)
            .map(|s| s.t_end - s.t_start)
            .collect();
        assert_eq!(offs.len(), 3);
        assert!(offs[1] > offs[0] && offs[1] > offs[2]);
    }
}
