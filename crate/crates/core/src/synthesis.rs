// SPDX-License-Identifier: Apache-2.0

//! Generalized resonant shortcuts: symmetric "on-off-on-…-off-on" sequences.
//!
//! A sequence has `m` off-pulses of rescaled duration `τ2`, two outer on-pulses
//! of duration `τ1`, and `m − 1` inner on-pulses of duration `τ3`, all on-pulses
//! sharing the amplitude `u`. For fixed `(θ_i, θ_f, T')` the durations obey
//!
//! ```text
//!   T'              = 2τ1 + mτ2 + (m − 1)τ3
//!   θ_i − θ_f       = u (2τ1 + (m − 1)τ3)
//!   b_y(u, τ1)      = 0          (total propagator diagonal)
//! ```
//!
//! and the solver picks the smallest amplitude `u` for which the last equation
//! has a solution with `τ1 > 0`, `τ3 ≥ 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonance::{constant_resonance, BoundaryAngles};
use crate::roots::{find_root, minimize_bracketed};
use crate::su2::{sequence_propagator_unchecked, RescaledHamiltonianParams};

/// Tolerance on the duration and angle relations of a sequence.
pub const RELATION_TOL: f64 = 1e-10;
/// A synthesized sequence is accepted only if `|b_y|` is below this.
pub const ACCEPT_RESIDUAL: f64 = 1e-9;
/// `T'` within this distance of a constant-pulse resonance `T'_k` is treated as exact.
pub const RESONANCE_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    /// Amplitude `u` (zero while off).
    pub u: f64,
    /// Rescaled duration.
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub angles: BoundaryAngles,
    pub u: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub m: u32,
    pub t_prime: f64,
}

impl PulseSequence {
    /// Build and validate a sequence; `t_prime` is computed from the durations.
    pub fn new(
        angles: BoundaryAngles,
        u: f64,
        tau1: f64,
        tau2: f64,
        tau3: f64,
        m: u32,
    ) -> Result<Self> {
        let seq = Self::assemble(angles, u, tau1, tau2, tau3, m);
        seq.validate()?;
        Ok(seq)
    }

    pub(crate) fn assemble(
        angles: BoundaryAngles,
        u: f64,
        tau1: f64,
        tau2: f64,
        tau3: f64,
        m: u32,
    ) -> Self {
        let mf = f64::from(m);
        Self {
            angles,
            u,
            tau1,
            tau2,
            tau3,
            m,
            t_prime: 2.0 * tau1 + mf * tau2 + (mf - 1.0) * tau3,
        }
    }

    /// A single constant pulse of rescaled duration `t_prime`, written as a
    /// degenerate on-off-on sequence with `τ2 = 0`.
    pub fn constant(angles: BoundaryAngles, u: f64, t_prime: f64) -> Result<Self> {
        Self::new(angles, u, 0.5 * t_prime, 0.0, 0.0, 1)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("u", self.u),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
            ("tau3", self.tau3),
            ("t_prime", self.t_prime),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::validation(format!("{name} must be finite, got {v}")));
            }
        }
        if self.m == 0 {
            return Err(Error::validation("m must be a positive integer"));
        }
        if self.u < 0.0 {
            return Err(Error::validation(format!(
                "u = {} must be non-negative",
                self.u
            )));
        }
        if !(self.tau1 > 0.0) {
            return Err(Error::validation(format!(
                "tau1 = {} must be positive",
                self.tau1
            )));
        }
        if self.tau2 < 0.0 || self.tau3 < 0.0 {
            return Err(Error::validation(format!(
                "tau2 = {} and tau3 = {} must be non-negative",
                self.tau2, self.tau3
            )));
        }
        if self.m == 1 && self.tau3 != 0.0 {
            return Err(Error::validation("tau3 must be 0 when m = 1"));
        }
        let mf = f64::from(self.m);
        let total = 2.0 * self.tau1 + mf * self.tau2 + (mf - 1.0) * self.tau3;
        if (total - self.t_prime).abs() > RELATION_TOL * self.t_prime.max(1.0) {
            return Err(Error::validation(format!(
                "t_prime = {} does not equal 2τ1 + mτ2 + (m−1)τ3 = {total}",
                self.t_prime
            )));
        }
        let swept = self.u * (2.0 * self.tau1 + (mf - 1.0) * self.tau3);
        if (swept - self.angles.sweep()).abs() > RELATION_TOL * self.angles.sweep().max(1.0) {
            return Err(Error::validation(format!(
                "on-pulses sweep u(2τ1 + (m−1)τ3) = {swept}, expected θ_i − θ_f = {}",
                self.angles.sweep()
            )));
        }
        Ok(())
    }

    /// Segments in time order: on τ1, (off τ2, on τ3)×(m−1), off τ2, on τ1.
    pub fn segments(&self) -> Vec<Segment> {
        let on = |tau| Segment {
            kind: SegmentKind::On,
            u: self.u,
            tau,
        };
        let off = Segment {
            kind: SegmentKind::Off,
            u: 0.0,
            tau: self.tau2,
        };
        let mut out = Vec::with_capacity(2 * self.m as usize + 1);
        out.push(on(self.tau1));
        for j in 0..self.m {
            out.push(off);
            if j + 1 < self.m {
                out.push(on(self.tau3));
            }
        }
        out.push(on(self.tau1));
        out
    }

    /// Human-readable shape, e.g. `on-off-on-off-on`.
    pub fn pattern(&self) -> String {
        self.segments()
            .iter()
            .map(|s| match s.kind {
                SegmentKind::On => "on",
                SegmentKind::Off => "off",
            })
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// How many off-pulses the selection rule assigns to a duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MSelection {
    /// `T'_{m−1} < T' < T'_m` with `T'_0 = π`.
    Composite { m: u32 },
    /// `T' = T'_k`: a single constant pulse already solves the problem.
    ConstantPulse { k: u32 },
}

impl MSelection {
    pub fn m(&self) -> u32 {
        match *self {
            MSelection::Composite { m } => m,
            MSelection::ConstantPulse { .. } => 1,
        }
    }
}

/// Selection rule for the number of off-pulses: `m = k + 1` for `T'_k < T' < T'_{k+1}`.
pub fn select_m(angles: &BoundaryAngles, t_prime: f64) -> Result<MSelection> {
    if !(t_prime > PI) || !t_prime.is_finite() {
        return Err(Error::InfeasibleDuration { t_prime });
    }
    let mut k = 1u32;
    loop {
        let resonance = constant_resonance(angles, k)?;
        if (t_prime - resonance.t_prime).abs() <= RESONANCE_MATCH_TOL {
            return Ok(MSelection::ConstantPulse { k });
        }
        if t_prime < resonance.t_prime {
            return Ok(MSelection::Composite { m: k });
        }
        k += 1;
    }
}

/// Off-pulse duration `τ2 = (T' − (θ_i − θ_f)/u)/m`.
pub fn off_duration(angles: &BoundaryAngles, u: f64, t_prime: f64, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("m must be a positive integer"));
    }
    let on_time = on_time(angles, u)?;
    let tau2 = (t_prime - on_time) / f64::from(m);
    if tau2 < 0.0 {
        return Err(Error::domain(format!(
            "u = {u} is below the feasibility bound (θ_i − θ_f)/T' = {}: τ2 would be {tau2}",
            angles.sweep() / t_prime
        )));
    }
    Ok(tau2)
}

/// Total on-time `(θ_i − θ_f)/u`.
fn on_time(angles: &BoundaryAngles, u: f64) -> Result<f64> {
    if angles.is_degenerate() {
        return Ok(0.0);
    }
    if !(u > 0.0) {
        return Err(Error::domain(format!(
            "u = {u} cannot sweep θ from θ_i to θ_f"
        )));
    }
    Ok(angles.sweep() / u)
}

/// `b_y` of the total propagator; in the `a_y` notation, `a_y = i·b_y`.
pub fn ay_coefficient(seq: &PulseSequence) -> f64 {
    sequence_propagator_unchecked(seq).by
}

/// Closed-form `b_y` for `m ∈ {1, 2, 3}`; `None` otherwise.
pub fn ay_closed_form(seq: &PulseSequence) -> Option<f64> {
    let p = RescaledHamiltonianParams::new(seq.u);
    let (ny, nz, w) = (p.ny, p.nz, p.omega);
    let (t1, t2, t3) = (seq.tau1, seq.tau2, seq.tau3);
    match seq.m {
        1 => {
            let (s, c) = (0.5 * w * t1).sin_cos();
            let (s2, c2) = (0.5 * t2).sin_cos();
            Some(2.0 * ny * s * (c * c2 - nz * s * s2))
        }
        2 => {
            let (s1, c1) = (w * t1).sin_cos();
            let (s2, c2) = t2.sin_cos();
            let (s3h, c3h) = (0.5 * w * t3).sin_cos();
            Some(
                ny * c3h * (s1 * c2 - nz * s2 * (1.0 - c1))
                    + ny * s3h * (c1 + nz * (-s1 * s2 + nz * (1.0 - c1) * (1.0 - c2))),
            )
        }
        3 => {
            let (s1, c1) = (w * t1).sin_cos();
            let (s2, c2) = t2.sin_cos();
            let (s2h, c2h) = (0.5 * t2).sin_cos();
            let (s3, c3) = (w * t3).sin_cos();
            Some(
                ny * (c2h * c3 - nz * s2h * s3) * (s1 * c2 - nz * s2 * (1.0 - c1))
                    + ny * (nz * c2h * s3 + s2h * (ny * ny + nz * nz * c3))
                        * (-s1 * s2 + nz * (1.0 - c1) * (1.0 - c2))
                    + ny * (c1 * c2h * s3 - nz * s2h * (1.0 - c1 * c3)),
            )
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOptions {
    /// Force the number of off-pulses instead of applying the selection rule.
    pub m_override: Option<u32>,
    /// Step of the outer upward sweep in `u`.
    pub u_step: f64,
    /// Number of `τ1` grid points used to detect roots at fixed `u`.
    pub tau1_grid: usize,
    /// Largest amplitude searched before giving up.
    pub u_ceiling: f64,
    /// Largest number of off-pulses attempted.
    pub max_m: u32,
    /// Target `|b_y|` of the final polish.
    pub residual_tol: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            m_override: None,
            u_step: 1e-3,
            tau1_grid: 2000,
            u_ceiling: 50.0,
            max_m: 64,
            residual_tol: crate::roots::RESIDUAL_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisReport {
    pub sequence: PulseSequence,
    /// `|b_y|` of the total propagator of the returned sequence.
    pub residual: f64,
    pub selection: MSelection,
    /// `(θ_i − θ_f)/T'`, the smallest amplitude keeping `τ2 ≥ 0`.
    pub u_lower_bound: f64,
    /// Final bracket `[u_lo, u_hi]` around the minimal amplitude.
    pub u_bracket: (f64, f64),
    /// Number of outer sweep steps taken.
    pub sweep_steps: usize,
    pub warnings: Vec<String>,
}

/// Minimal-amplitude sequence for the given angles and rescaled duration.
pub fn synthesize(angles: &BoundaryAngles, t_prime: f64) -> Result<PulseSequence> {
    synthesize_with(angles, t_prime, &SynthesisOptions::default()).map(|r| r.sequence)
}

pub fn synthesize_with(
    angles: &BoundaryAngles,
    t_prime: f64,
    opts: &SynthesisOptions,
) -> Result<SynthesisReport> {
    let rule = select_m(angles, t_prime)?;
    let u_lo = angles.sweep() / t_prime;
    let mut warnings = Vec::new();

    if angles.is_degenerate() {
        let sequence = PulseSequence::constant(*angles, 0.0, t_prime)?;
        warnings.push("θ_i = θ_f: the control is identically zero".to_owned());
        return Ok(SynthesisReport {
            sequence,
            residual: 0.0,
            selection: rule,
            u_lower_bound: 0.0,
            u_bracket: (0.0, 0.0),
            sweep_steps: 0,
            warnings,
        });
    }

    let m = match (opts.m_override, rule) {
        (Some(m), _) => {
            if m == 0 {
                return Err(Error::validation("m override must be a positive integer"));
            }
            if m != rule.m() {
                warnings.push(format!(
                    "m = {m} overrides the selection rule (m = {}); the equation may have no \
                     solution or only solutions at larger u",
                    rule.m()
                ));
            }
            m
        }
        (None, MSelection::ConstantPulse { k }) => {
            let resonance = constant_resonance(angles, k)?;
            let sequence = PulseSequence::constant(*angles, resonance.u, t_prime)?;
            let residual = ay_coefficient(&sequence).abs();
            return Ok(SynthesisReport {
                sequence,
                residual,
                selection: rule,
                u_lower_bound: u_lo,
                u_bracket: (resonance.u, resonance.u),
                sweep_steps: 0,
                warnings,
            });
        }
        (None, MSelection::Composite { m }) => m,
    };
    if m > opts.max_m {
        return Err(Error::NoSolution {
            m,
            u_lo,
            u_hi: u_lo,
            reason: format!("m exceeds the supported maximum of {}", opts.max_m),
        });
    }

    let family = Family {
        angles: *angles,
        t_prime,
        m,
    };
    let solved = family.solve(u_lo, opts)?;
    let sequence = PulseSequence::new(
        *angles,
        solved.u,
        solved.tau1,
        family.tau2(solved.u),
        family.tau3(solved.u, solved.tau1),
        m,
    )?;
    let residual = ay_coefficient(&sequence).abs();
    if residual >= ACCEPT_RESIDUAL {
        return Err(Error::Numeric(format!(
            "root polish stalled at |b_y| = {residual:e} (u = {}, τ1 = {})",
            solved.u, solved.tau1
        )));
    }
    Ok(SynthesisReport {
        sequence,
        residual,
        selection: rule,
        u_lower_bound: u_lo,
        u_bracket: solved.bracket,
        sweep_steps: solved.steps,
        warnings,
    })
}

/// Sequences of fixed `(θ_i, θ_f, T', m)`, parameterized by `(u, τ1)`.
#[derive(Debug, Clone, Copy)]
struct Family {
    angles: BoundaryAngles,
    t_prime: f64,
    m: u32,
}

struct Solved {
    u: f64,
    tau1: f64,
    bracket: (f64, f64),
    steps: usize,
}

impl Family {
    fn tau2(&self, u: f64) -> f64 {
        ((self.t_prime - self.angles.sweep() / u) / f64::from(self.m)).max(0.0)
    }

    /// Largest admissible `τ1` (all on-time in the outer pulses, `τ3 = 0`).
    fn tau1_max(&self, u: f64) -> f64 {
        0.5 * self.angles.sweep() / u
    }

    fn tau3(&self, u: f64, tau1: f64) -> f64 {
        if self.m == 1 {
            0.0
        } else {
            ((self.angles.sweep() / u - 2.0 * tau1) / f64::from(self.m - 1)).max(0.0)
        }
    }

    fn by(&self, u: f64, tau1: f64) -> f64 {
        let seq = PulseSequence::assemble(
            self.angles,
            u,
            tau1,
            self.tau2(u),
            self.tau3(u, tau1),
            self.m,
        );
        ay_coefficient(&seq)
    }

    /// For `m = 1`, `τ1` is pinned by the angle relation.
    fn by_on_off_on(&self, u: f64) -> f64 {
        self.by(u, self.tau1_max(u))
    }

    /// First bracket in `τ1` containing a root at amplitude `u`, if any.
    fn tau1_bracket(&self, u: f64, n: usize) -> Option<(f64, f64)> {
        let top = self.tau1_max(u);
        let grid: Vec<f64> = (1..=n).map(|j| top * j as f64 / n as f64).collect();
        first_zero_bracket(|t| self.by(u, t), &grid)
    }

    fn solve(&self, u_lo: f64, opts: &SynthesisOptions) -> Result<Solved> {
        let n = opts.tau1_grid.max(8);
        let no_solution = |reason: &str| Error::NoSolution {
            m: self.m,
            u_lo,
            u_hi: opts.u_ceiling,
            reason: reason.to_owned(),
        };

        if self.m == 1 {
            // Single unknown: sweep u upward until b_y changes sign (or touches zero).
            let steps = ((opts.u_ceiling - u_lo) / opts.u_step).ceil() as usize;
            let mut chunk_start = 0usize;
            // Evaluate in chunks so the common case stops early.
            while chunk_start < steps {
                let chunk_end = (chunk_start + 512).min(steps);
                let grid: Vec<f64> = (chunk_start..=chunk_end)
                    .map(|j| u_lo + j as f64 * opts.u_step)
                    .filter(|&u| u > 0.0)
                    .collect();
                if let Some((a, b)) = first_zero_bracket(|u| self.by_on_off_on(u), &grid) {
                    let root = find_root(|u| self.by_on_off_on(u), a, b, opts.residual_tol)?;
                    return Ok(Solved {
                        u: root.x,
                        tau1: self.tau1_max(root.x),
                        bracket: (a, b),
                        steps: ((b - u_lo) / opts.u_step).round() as usize,
                    });
                }
                chunk_start = chunk_end;
            }
            return Err(no_solution(
                "b_y(u) has no root below the amplitude ceiling",
            ));
        }

        // Outer sweep: the first u on the grid with a τ1 root.
        let mut prev = u_lo;
        let mut step = 0usize;
        let found = loop {
            step += 1;
            let u = u_lo + step as f64 * opts.u_step;
            if u > opts.u_ceiling {
                return Err(no_solution(
                    "no τ1 root for any amplitude below the ceiling",
                ));
            }
            if self.tau1_bracket(u, n).is_some() {
                break u;
            }
            prev = u;
        };

        // Bisection on root existence.
        let (mut lo, mut hi) = (prev, found);
        for _ in 0..200 {
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid > 0.0 && self.tau1_bracket(mid, n).is_some() {
                hi = mid;
            } else {
                lo = mid;
            }
        }

        let (a, b) = self
            .tau1_bracket(hi, n)
            .ok_or_else(|| Error::Numeric("lost the τ1 root after bisection".to_owned()))?;
        let root = find_root(|t| self.by(hi, t), a, b, opts.residual_tol)?;
        Ok(Solved {
            u: hi,
            tau1: root.x,
            bracket: (lo, hi),
            steps: step,
        })
    }
}

/// First sub-interval of `grid` on which `f` has a root.
///
/// Sign changes between neighbours are detected directly. A run of values
/// approaching zero without crossing it (a grid-local extremum of `|f|`) is
/// refined by a bracketed minimization of `sign·f`; if the refined extremum
/// reaches zero the roots on its left flank are returned.
pub(crate) fn first_zero_bracket<F>(f: F, grid: &[f64]) -> Option<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    if grid.len() < 2 {
        return None;
    }
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    if values[0] == 0.0 {
        return Some((grid[0], grid[0]));
    }
    for j in 1..values.len() {
        let (prev, cur) = (values[j - 1], values[j]);
        if cur == 0.0 || prev.signum() != cur.signum() {
            return Some((grid[j - 1], grid[j]));
        }
        if j >= 2 {
            let before = values[j - 2];
            if prev.abs() < before.abs() && prev.abs() <= cur.abs() {
                let sign = prev.signum();
                let (x_min, f_min) =
                    minimize_bracketed(|x| sign * f(x), grid[j - 2], grid[j], 1e-14);
                if f_min <= 0.0 {
                    return Some((grid[j - 2], x_min));
                }
            }
        }
    }
    None
}
