// SPDX-License-Identifier: Apache-2.0

//! SU(2) propagators of the rescaled adiabatic-frame Hamiltonian.
//!
//! A propagator is stored by its real Pauli coefficients
//!
//! ```text
//!   U = a_I·I + i·(b_x·σx + b_y·σy + b_z·σz),   a_I² + |b|² = 1
//! ```
//!
//! so `Tr(σ_y U)/2 = i·b_y`. The Hamiltonian `H' = ½σz − (u/2)σy` is constant
//! while the control is "on" (amplitude `u`) and reduces to `½σz` while it is
//! "off", giving the closed forms in [`on_propagator`] and [`off_propagator`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synthesis::{PulseSequence, SegmentKind};

/// Tolerance on `a_I² + |b|² = 1`.
pub const UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliDecomposition {
    pub a_i: f64,
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

impl PauliDecomposition {
    pub const IDENTITY: Self = Self {
        a_i: 1.0,
        bx: 0.0,
        by: 0.0,
        bz: 0.0,
    };

    pub fn new(a_i: f64, bx: f64, by: f64, bz: f64) -> Self {
        Self { a_i, bx, by, bz }
    }

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    pub fn norm_sq(&self) -> f64 {
        self.a_i * self.a_i + self.bx * self.bx + self.by * self.by + self.bz * self.bz
    }

    /// Distance of `a_I² + |b|²` from one.
    pub fn unitarity_defect(&self) -> f64 {
        (self.norm_sq() - 1.0).abs()
    }

    pub fn validate(&self) -> Result<()> {
        let defect = self.unitarity_defect();
        if !defect.is_finite() || defect > UNITARITY_TOL {
            return Err(Error::validation(format!(
                "Pauli decomposition is not special unitary: |a_I² + |b|² − 1| = {defect:e}"
            )));
        }
        Ok(())
    }

    /// Unchecked product `self · right`.
    ///
    /// With `U_k = a_k + i b_k·σ`, the Pauli product rule gives
    /// `a = a1 a2 − b1·b2` and `b = a1 b2 + a2 b1 − b1 × b2`.
    pub fn product(&self, right: &Self) -> Self {
        let (a1, x1, y1, z1) = (self.a_i, self.bx, self.by, self.bz);
        let (a2, x2, y2, z2) = (right.a_i, right.bx, right.by, right.bz);
        Self {
            a_i: a1 * a2 - x1 * x2 - y1 * y2 - z1 * z2,
            bx: a1 * x2 + a2 * x1 - (y1 * z2 - z1 * y2),
            by: a1 * y2 + a2 * y1 - (z1 * x2 - x1 * z2),
            bz: a1 * z2 + a2 * z1 - (x1 * y2 - y1 * x2),
        }
    }

    /// Hermitian adjoint (the inverse for SU(2)).
    pub fn adjoint(&self) -> Self {
        Self {
            a_i: self.a_i,
            bx: -self.bx,
            by: -self.by,
            bz: -self.bz,
        }
    }

    /// `[[a_I + i b_z, b_y + i b_x], [−b_y + i b_x, a_I − i b_z]]`
    pub fn to_matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [
                Complex64::new(self.a_i, self.bz),
                Complex64::new(self.by, self.bx),
            ],
            [
                Complex64::new(-self.by, self.bx),
                Complex64::new(self.a_i, -self.bz),
            ],
        ]
    }

    /// Matrix-vector product `U·(amp0, amp1)`.
    pub fn apply(&self, amps: [Complex64; 2]) -> [Complex64; 2] {
        let m = self.to_matrix();
        [
            m[0][0] * amps[0] + m[0][1] * amps[1],
            m[1][0] * amps[0] + m[1][1] * amps[1],
        ]
    }

    /// Population transferred out of the first basis state: `|U_21|² = b_x² + b_y²`.
    pub fn transition_probability(&self) -> f64 {
        self.bx * self.bx + self.by * self.by
    }
}

impl Default for PauliDecomposition {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl std::ops::Mul for PauliDecomposition {
    type Output = PauliDecomposition;

    fn mul(self, rhs: Self) -> Self {
        self.product(&rhs)
    }
}

/// Derived quantities of the "on" Hamiltonian `½(σz − u σy) = ½ω(n_z σz − n_y σy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaledHamiltonianParams {
    pub u: f64,
    pub omega: f64,
    pub nz: f64,
    pub ny: f64,
}

impl RescaledHamiltonianParams {
    pub fn new(u: f64) -> Self {
        let omega = u.hypot(1.0);
        Self {
            u,
            omega,
            nz: 1.0 / omega,
            ny: u / omega,
        }
    }
}

fn check_duration(tau: f64) -> Result<()> {
    if tau.is_nan() || tau < 0.0 || tau.is_infinite() {
        return Err(Error::domain(format!(
            "segment duration must be finite and non-negative, got {tau}"
        )));
    }
    Ok(())
}

/// Propagator of a constant "on" pulse of amplitude `u` lasting `tau` in rescaled time:
/// `a_I = cos(ωτ/2)`, `b_y = n_y sin(ωτ/2)`, `b_z = −n_z sin(ωτ/2)`.
pub fn on_propagator(u: f64, tau: f64) -> Result<PauliDecomposition> {
    if !u.is_finite() {
        return Err(Error::domain(format!(
            "pulse amplitude must be finite, got {u}"
        )));
    }
    check_duration(tau)?;
    Ok(on_unchecked(&RescaledHamiltonianParams::new(u), tau))
}

pub(crate) fn on_unchecked(p: &RescaledHamiltonianParams, tau: f64) -> PauliDecomposition {
    let (s, c) = (0.5 * p.omega * tau).sin_cos();
    PauliDecomposition {
        a_i: c,
        bx: 0.0,
        by: p.ny * s,
        bz: -p.nz * s,
    }
}

/// Free precession `e^{−iτσz/2}` while the control is "off".
pub fn off_propagator(tau: f64) -> Result<PauliDecomposition> {
    check_duration(tau)?;
    Ok(off_unchecked(tau))
}

pub(crate) fn off_unchecked(tau: f64) -> PauliDecomposition {
    let (s, c) = (0.5 * tau).sin_cos();
    PauliDecomposition {
        a_i: c,
        bx: 0.0,
        by: 0.0,
        bz: -s,
    }
}

/// Validated product `left · right`.
pub fn compose(
    left: &PauliDecomposition,
    right: &PauliDecomposition,
) -> Result<PauliDecomposition> {
    left.validate()?;
    right.validate()?;
    Ok(left.product(right))
}

/// Total propagator `U_1 W_2 U_3 … W_2 U_1` of a pulse sequence.
///
/// The sequence is symmetric, so the segment order does not matter for the
/// product's value; it is taken left to right as listed by
/// [`PulseSequence::segments`].
pub fn sequence_propagator(seq: &PulseSequence) -> Result<PauliDecomposition> {
    seq.validate()?;
    Ok(sequence_propagator_unchecked(seq))
}

pub(crate) fn sequence_propagator_unchecked(seq: &PulseSequence) -> PauliDecomposition {
    let params = RescaledHamiltonianParams::new(seq.u);
    let outer = on_unchecked(&params, seq.tau1);
    let off = off_unchecked(seq.tau2);
    let inner = on_unchecked(&params, seq.tau3);
    let mut total = outer;
    for j in 0..seq.m {
        total = total * off;
        if j + 1 < seq.m {
            total = total * inner;
        }
    }
    total * outer
}

/// Product of an arbitrary list of segments, each `(kind, u, tau)`.
pub fn segments_propagator<I>(segments: I) -> PauliDecomposition
where
    I: IntoIterator<Item = (SegmentKind, f64, f64)>,
{
    segments
        .into_iter()
        .fold(PauliDecomposition::IDENTITY, |acc, (kind, u, tau)| {
            acc * match kind {
                SegmentKind::On => on_unchecked(&RescaledHamiltonianParams::new(u), tau),
                SegmentKind::Off => off_unchecked(tau),
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    type M2 = [[Complex64; 2]; 2];

    fn mat_mul(a: &M2, b: &M2) -> M2 {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    // exp(−i τ H) by scaling and squaring a truncated Taylor series.
    fn expm_hamiltonian(h: &M2, tau: f64) -> M2 {
        let minus_i = Complex64::new(0.0, -tau);
        let mut a = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                a[i][j] = minus_i * h[i][j];
            }
        }
        let squarings = 12;
        let scale = 0.5_f64.powi(squarings);
        for row in a.iter_mut() {
            for v in row.iter_mut() {
                *v *= scale;
            }
        }
        let ident = [
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        let mut sum = ident;
        let mut term = ident;
        for n in 1..20 {
            term = mat_mul(&term, &a);
            for row in term.iter_mut() {
                for v in row.iter_mut() {
                    *v /= n as f64;
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += term[i][j];
                }
            }
        }
        for _ in 0..squarings {
            sum = mat_mul(&sum, &sum);
        }
        sum
    }

    fn oracle_on(u: f64, tau: f64) -> M2 {
        // H' = ½σz − (u/2)σy
        let h = [
            [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5 * u)],
            [Complex64::new(0.0, -0.5 * u), Complex64::new(-0.5, 0.0)],
        ];
        expm_hamiltonian(&h, tau)
    }

    fn assert_matrix_close(a: &M2, b: &M2, tol: f64) {
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j] - b[i][j]).norm() < tol, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn zero_duration_is_identity() {
        assert_eq!(
            on_propagator(0.37, 0.0).unwrap(),
            PauliDecomposition::IDENTITY
        );
        assert_eq!(off_propagator(0.0).unwrap(), PauliDecomposition::IDENTITY);
    }

    #[test]
    fn no_control_for_half_period_is_z_rotation() {
        let p = on_propagator(0.0, PI).unwrap();
        assert_abs_diff_eq!(p.a_i, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.bz, -1.0, epsilon = 1e-15);
        assert_eq!(p.by, 0.0);
    }

    #[test]
    fn off_propagator_periods() {
        let full = off_propagator(2.0 * PI).unwrap();
        assert_abs_diff_eq!(full.a_i, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(full.bz, 0.0, epsilon = 1e-15);
        let half = off_propagator(PI).unwrap();
        assert_abs_diff_eq!(half.a_i, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(half.bz, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn negative_duration_rejected() {
        assert!(matches!(on_propagator(0.5, -1e-3), Err(Error::Domain(_))));
        assert!(matches!(off_propagator(-1.0), Err(Error::Domain(_))));
        assert!(matches!(
            on_propagator(f64::NAN, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn first_resonance_pulse_is_plus_minus_identity() {
        // u_1 and T'_1 for Δ: −10Ω → 10Ω, computed from the resonance formulas.
        let thf = (0.1_f64).atan();
        let x = (PI - 2.0 * thf) / (2.0 * PI);
        let u1 = x / (1.0 - x * x).sqrt();
        let t1 = 2.0 * PI * (1.0 - x * x).sqrt();
        assert_abs_diff_eq!(u1, 0.529971, epsilon = 2e-6);
        assert_abs_diff_eq!(t1 / PI, 1.7672, epsilon = 1e-4);
        let p = on_propagator(u1, t1).unwrap();
        assert!(p.by.abs() < 1e-9);
        assert!(p.bz.abs() < 1e-9);
        assert_abs_diff_eq!(p.a_i.abs(), 1.0, epsilon = 1e-12);
        let oracle = oracle_on(u1, t1);
        assert_matrix_close(&p.to_matrix(), &oracle, 1e-10);
    }

    #[test]
    fn on_propagator_matches_matrix_exponential() {
        for &(u, tau) in &[(0.2, 0.7), (0.773436, 1.902070), (3.0, 5.5), (0.0, 2.2)] {
            let p = on_propagator(u, tau).unwrap();
            assert_matrix_close(&p.to_matrix(), &oracle_on(u, tau), 1e-12);
        }
    }

    #[test]
    fn composition_identities() {
        let x = on_propagator(0.41, 2.3).unwrap();
        let left = compose(&PauliDecomposition::IDENTITY, &x).unwrap();
        assert_abs_diff_eq!(left.a_i, x.a_i, epsilon = 1e-15);
        assert_abs_diff_eq!(left.by, x.by, epsilon = 1e-15);
        assert_abs_diff_eq!(left.bz, x.bz, epsilon = 1e-15);
        let off = off_propagator(PI).unwrap();
        let two = compose(&off, &off).unwrap();
        assert_abs_diff_eq!(two.a_i, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(two.bz, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn compose_matches_matrix_product() {
        let a = on_propagator(0.8, 1.3).unwrap() * off_propagator(0.4).unwrap();
        let b = PauliDecomposition::new(0.5, 0.5, -0.5, 0.5);
        let prod = compose(&a, &b).unwrap();
        assert_matrix_close(
            &prod.to_matrix(),
            &mat_mul(&a.to_matrix(), &b.to_matrix()),
            1e-14,
        );
    }

    #[test]
    fn compose_rejects_non_unitary() {
        let bad = PauliDecomposition::new(1.0, 0.1, 0.0, 0.0);
        assert!(matches!(
            compose(&bad, &PauliDecomposition::IDENTITY),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn on_off_on_resonance_chain() {
        let u = 0.773436;
        let (tau1, tau2) = (1.902070, 0.908243);
        let p = on_propagator(u, tau1).unwrap();
        let chain = p * off_propagator(tau2).unwrap() * p;
        assert!(chain.by.abs() < 1e-5, "b_y = {}", chain.by);
        assert!(chain.bx.abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_params() {
        let p = RescaledHamiltonianParams::new(0.75);
        assert_abs_diff_eq!(p.omega, 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.nz * p.nz + p.ny * p.ny, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn apply_preserves_norm() {
        let p = on_propagator(0.3, 4.0).unwrap() * off_propagator(1.0).unwrap();
        let s = p.apply([Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        assert_abs_diff_eq!(s[0].norm_sqr() + s[1].norm_sqr(), 1.0, epsilon = 1e-14);
    }
}
