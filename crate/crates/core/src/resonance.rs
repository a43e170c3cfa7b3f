// SPDX-License-Identifier: Apache-2.0

//! Constant-pulse resonant shortcuts.
//!
//! A constant control `u = −dθ/dτ` held for a rescaled duration `T'` produces
//! the propagator `e^{−iωT'(n_z σz − n_y σy)/2}`, which is `±I` exactly when
//! `ωT' = 2kπ`. Together with `uT' = θ_i − θ_f` this fixes a discrete family
//! `(u_k, T'_k)` of perfect transfers. In original time the same control is the
//! Roland–Cerf sweep evaluated at the special durations `T_k`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Initial and final polar angles of the total field, `0 < θ_f ≤ θ_i < π`.
///
/// `θ_f = θ_i` is accepted as the degenerate "no sweep" case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAngles", into = "RawAngles")]
pub struct BoundaryAngles {
    theta_i: f64,
    theta_f: f64,
}

#[derive(Serialize, Deserialize)]
struct RawAngles {
    theta_i: f64,
    theta_f: f64,
}

impl TryFrom<RawAngles> for BoundaryAngles {
    type Error = Error;

    fn try_from(raw: RawAngles) -> Result<Self> {
        BoundaryAngles::new(raw.theta_i, raw.theta_f)
    }
}

impl From<BoundaryAngles> for RawAngles {
    fn from(a: BoundaryAngles) -> Self {
        RawAngles {
            theta_i: a.theta_i,
            theta_f: a.theta_f,
        }
    }
}

impl BoundaryAngles {
    pub fn new(theta_i: f64, theta_f: f64) -> Result<Self> {
        for (name, v) in [("theta_i", theta_i), ("theta_f", theta_f)] {
            if !(v > 0.0 && v < PI) {
                return Err(Error::validation(format!(
                    "{name} = {v} must lie strictly inside (0, π)"
                )));
            }
        }
        if theta_f > theta_i {
            return Err(Error::validation(format!(
                "theta_f = {theta_f} must not exceed theta_i = {theta_i} (the field angle decreases)"
            )));
        }
        Ok(Self { theta_i, theta_f })
    }

    /// Angles from initial and final detunings in units of `Ω`, via `cot θ = Δ/Ω`.
    pub fn from_detunings(delta_start: f64, delta_end: f64) -> Result<Self> {
        if !(delta_start.is_finite() && delta_end.is_finite()) {
            return Err(Error::validation("detunings must be finite"));
        }
        Self::new(arccot(delta_start), arccot(delta_end))
    }

    /// The worked example: `Δ` swept from `−10Ω` to `10Ω`.
    pub fn reference() -> Self {
        Self::from_detunings(-10.0, 10.0).expect("finite detunings")
    }

    pub fn theta_i(&self) -> f64 {
        self.theta_i
    }

    pub fn theta_f(&self) -> f64 {
        self.theta_f
    }

    /// Total angle swept, `θ_i − θ_f ≥ 0`.
    pub fn sweep(&self) -> f64 {
        self.theta_i - self.theta_f
    }

    /// `(θ_i + θ_f)/2`
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.theta_i + self.theta_f)
    }

    pub fn is_degenerate(&self) -> bool {
        self.theta_i == self.theta_f
    }

    /// `θ_f = π − θ_i` within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.theta_i + self.theta_f - PI).abs() <= tol
    }

    /// `cos θ_f − cos θ_i`, evaluated without cancellation.
    pub fn cos_gap(&self) -> f64 {
        2.0 * self.midpoint().sin() * (0.5 * self.sweep()).sin()
    }

    pub fn delta_start(&self) -> f64 {
        cot(self.theta_i)
    }

    pub fn delta_end(&self) -> f64 {
        cot(self.theta_f)
    }
}

/// `arccot` onto `(0, π)`.
pub fn arccot(x: f64) -> f64 {
    1.0_f64.atan2(x)
}

pub fn cot(theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    c / s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantResonance {
    pub k: u32,
    pub u: f64,
    /// Rescaled duration `T'_k`.
    pub t_prime: f64,
    /// Original duration `T_k` in units of `1/Ω`.
    pub t_original: f64,
}

/// The `k`-th constant-pulse resonance.
pub fn constant_resonance(angles: &BoundaryAngles, k: u32) -> Result<ConstantResonance> {
    if k == 0 {
        return Err(Error::domain(
            "resonance index k must be a positive integer",
        ));
    }
    let period = 2.0 * PI * f64::from(k);
    let x = angles.sweep() / period;
    let root = (1.0 - x * x).sqrt();
    let u = x / root;
    let t_prime = period * root;
    let t_original = if u > 0.0 {
        angles.cos_gap() / u
    } else {
        // Frozen angle: dt = sin θ dτ.
        t_prime * angles.theta_i.sin()
    };
    Ok(ConstantResonance {
        k,
        u,
        t_prime,
        t_original,
    })
}

/// Resonances `k = 1..=k_max`.
pub fn resonance_table(angles: &BoundaryAngles, k_max: u32) -> Result<Vec<ConstantResonance>> {
    (1..=k_max).map(|k| constant_resonance(angles, k)).collect()
}

/// `θ(τ) = θ_i − uτ` during a constant pulse.
pub fn angle_of_rescaled_time(angles: &BoundaryAngles, u: f64, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::domain(format!(
            "rescaled time must be non-negative, got {tau}"
        )));
    }
    let theta = angles.theta_i - u * tau;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::domain(format!(
            "θ(τ = {tau}) = {theta} leaves (0, π)"
        )));
    }
    Ok(theta)
}

/// `θ(t) = arccos(cos θ_i + uΩt)` during a constant pulse.
pub fn angle_of_original_time(angles: &BoundaryAngles, u: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!(
            "original time must be non-negative, got {t}"
        )));
    }
    let c = angles.theta_i.cos() + u * t;
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::domain(format!(
            "t = {t} lies beyond the end of the sweep (cos θ would be {c})"
        )));
    }
    Ok(c.acos())
}

/// Roland–Cerf detuning `Δ(t_s)/Ω = uΩt_s / √(1 − (uΩt_s)²)` for symmetric
/// angles, with `t_s` measured from the midpoint of the sweep.
pub fn roland_cerf_detuning(u: f64, t_shifted: f64) -> Result<f64> {
    let v = u * t_shifted;
    if !(v.abs() < 1.0) {
        return Err(Error::domain(format!(
            "|u·t_s| = {} must be below 1",
            v.abs()
        )));
    }
    Ok(v / (1.0 - v * v).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    /// Always `π`.
    pub t_prime: f64,
    /// `sin((θ_i + θ_f)/2)·π`, units of `1/Ω`.
    pub t_original: f64,
}

/// Infimum of achievable durations with a monotone, finite-detuning sweep.
pub fn lower_bound_durations(angles: &BoundaryAngles) -> LowerBound {
    LowerBound {
        t_prime: PI,
        t_original: angles.midpoint().sin() * PI,
    }
}
