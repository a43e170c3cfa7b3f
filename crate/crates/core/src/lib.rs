// SPDX-License-Identifier: Apache-2.0

//! Resonant shortcuts to adiabatic rapid passage for a qubit whose only
//! time-dependent control is the longitudinal (detuning) field.
//!
//! The Hamiltonian is `H(t) = Δ(t)/2 σz + Ω/2 σx` with constant Rabi frequency
//! `Ω`. Everything in this crate works in units where `Ω = 1`: original times
//! are reported in units of `1/Ω` and detunings in units of `Ω`.
//!
//! The control is the polar angle `θ` of the total field (`cot θ = Δ/Ω`). In
//! the adiabatic frame and the rescaled time `dτ = Ω dt / sin θ` the dynamics
//! are driven by `H' = ½σz − (u/2)σy` with `u = −dθ/dτ`, so piecewise-constant
//! `u(τ)` produces exactly composable SU(2) propagators.
//!
//! Modules:
//! - [`su2`]: Pauli-coefficient propagator algebra.
//! - [`resonance`]: constant-pulse resonances and the Roland–Cerf detuning.
//! - [`synthesis`]: on-off-on… pulse sequences for arbitrary durations.
//! - [`timemap`]: rescaled ↔ original time and control waveforms.
//! - [`dynamics`]: state propagation in both frames.
//! - [`scan`]: error landscapes and resonance detection.

// `!(x > 0.0)` is used deliberately so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
mod ode;
pub mod resonance;
pub mod roots;
pub mod scan;
pub mod su2;
pub mod synthesis;
pub mod timemap;

pub use error::{Error, Result};
pub use resonance::{BoundaryAngles, ConstantResonance};
pub use su2::PauliDecomposition;
pub use synthesis::PulseSequence;
