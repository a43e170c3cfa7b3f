// SPDX-License-Identifier: Apache-2.0

//! Acceptance checks, one line per criterion. Runs without the libtest harness
//! so the report is always printed.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use resonant_shortcuts::dynamics::{
    propagate_adiabatic, propagate_original, propagate_original_with, OriginalFrameOptions,
    StateVector,
};
use resonant_shortcuts::resonance::{constant_resonance, resonance_table, BoundaryAngles};
use resonant_shortcuts::scan::{
    analyze_branches, constant_pulse_error_vs_duration, default_duration_grid,
    default_landscape_grids, detect_resonances, on_off_on_landscape,
};
use resonant_shortcuts::su2::{on_propagator, segments_propagator};
use resonant_shortcuts::synthesis::{ay_closed_form, ay_coefficient, synthesize, SegmentKind};
use resonant_shortcuts::timemap::{
    segment_rescaled_duration, segment_time_map, total_original_duration, waveform,
};
use resonant_shortcuts::PulseSequence;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const CASES: u32 = 1000;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reference_sequences() -> Result<Vec<PulseSequence>, String> {
    let a = BoundaryAngles::reference();
    [1.5, 3.0, 4.5]
        .iter()
        .map(|t| synthesize(&a, t * PI).map_err(|e| format!("synthesis failed at T' = {t}π: {e}")))
        .collect()
}

fn criterion_1() -> Outcome {
    let a = BoundaryAngles::reference();
    let table = resonance_table(&a, 3).map_err(|e| e.to_string())?;
    let expected = [1.77, 3.89, 5.93];
    let got: Vec<f64> = table.iter().map(|r| r.t_prime / PI).collect();
    let t1 = table[0].t_original / PI;
    let ok = got
        .iter()
        .zip(expected)
        .all(|(g, e)| (g - e).abs() <= 0.005)
        && (t1 - 1.195).abs() <= 0.001;
    check(
        ok,
        format!(
            "T'_k/π = {:.4}, {:.4}, {:.4}; T_1 = {:.4}π",
            got[0], got[1], got[2], t1
        ),
    )
}

fn criterion_2() -> Outcome {
    let seqs = reference_sequences()?;
    let expected = [(1, 0.773436), (2, 0.40089), (3, 0.235698)];
    let ok = seqs
        .iter()
        .zip(expected)
        .all(|(s, (m, u))| s.m == m && (s.u - u).abs() <= 1e-4);
    check(
        ok,
        format!(
            "u = {:.6} (m={}), {:.6} (m={}), {:.6} (m={})",
            seqs[0].u, seqs[0].m, seqs[1].u, seqs[1].m, seqs[2].u, seqs[2].m
        ),
    )
}

fn criterion_3() -> Outcome {
    let seqs = reference_sequences()?;
    let expected = [1.108, 1.943, 2.952];
    let got = seqs
        .iter()
        .map(|s| total_original_duration(s).map(|t| t / PI))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let ok = got
        .iter()
        .zip(expected)
        .all(|(g, e)| (g - e).abs() <= 0.002);
    check(
        ok,
        format!("T = {:.4}π, {:.4}π, {:.4}π", got[0], got[1], got[2]),
    )
}

fn criterion_4() -> Outcome {
    let a = BoundaryAngles::reference();
    let (u_grid, t_grid) = default_landscape_grids();
    let start = Instant::now();
    let landscape = on_off_on_landscape(&a, &u_grid, &t_grid).map_err(|e| e.to_string())?;
    let branches = analyze_branches(&landscape).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let low = landscape.count_below(-3.0);
    let ok = (branches.vertical_u - 0.2408).abs() <= 0.001
        && (branches.intersection_t / PI - 3.63).abs() <= 0.02
        && elapsed < 30.0
        && low > 0;
    check(
        ok,
        format!(
            "{}x{} grid: vertical line u = {:.5}, intersection T = {:.4}π, {} points ≤ -3, {:.2} s",
            u_grid.len(),
            t_grid.len(),
            branches.vertical_u,
            branches.intersection_t / PI,
            low,
            elapsed
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for seq in reference_sequences()? {
        let exact = propagate_adiabatic(&seq, &StateVector::first()).map_err(|e| e.to_string())?;
        let wf = waveform(&seq, 1000).map_err(|e| e.to_string())?;
        let start = StateVector::eigenstate_plus(seq.angles.theta_i());
        let numeric = propagate_original(&wf, &start, 1e-10).map_err(|e| e.to_string())?;
        let pop = |s: &StateVector| s.amp0.norm_sqr();
        let gap = (pop(&exact.final_adiabatic) - pop(&numeric.final_adiabatic)).abs();
        ok &= exact.terminal_error < 1e-12 && numeric.terminal_error < 1e-8 && gap <= 1e-7;
        lines.push(format!(
            "m={}: exact {:.1e}, ode {:.1e}, population gap {:.1e}",
            seq.m, exact.terminal_error, numeric.terminal_error, gap
        ));
    }
    check(ok, lines.join("; "))
}

fn run_property<S, F>(name: &str, strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn segment_strategy() -> impl Strategy<Value = Vec<(SegmentKind, f64, f64)>> {
    prop::collection::vec(
        (prop::bool::ANY, 0.0..5.0f64, 0.0..20.0f64).prop_map(|(on, u, tau)| {
            (
                if on {
                    SegmentKind::On
                } else {
                    SegmentKind::Off
                },
                u,
                tau,
            )
        }),
        1..16,
    )
}

/// `(angles, u, m, τ1 fraction, τ2)` with the on-time shared between outer
/// and inner pulses according to the fraction.
fn sequence_strategy() -> impl Strategy<Value = PulseSequence> {
    (
        0.05..1.5f64,
        0.05..1.5f64,
        0.05..3.0f64,
        1u32..7,
        0.01..1.0f64,
        0.0..10.0f64,
    )
        .prop_map(|(tf, gap, u, m, frac, tau2)| {
            let angles = BoundaryAngles::new((tf + gap).min(3.1), tf).unwrap();
            let on = angles.sweep() / u;
            let tau1 = if m == 1 { 0.5 * on } else { 0.5 * on * frac };
            let tau3 = if m == 1 {
                0.0
            } else {
                (on - 2.0 * tau1) / f64::from(m - 1)
            };
            PulseSequence::new(angles, u, tau1, tau2, tau3, m).unwrap()
        })
}

fn criterion_6() -> Outcome {
    run_property("unitarity", segment_strategy(), |segs| {
        let p = segments_propagator(segs);
        prop_assert!(
            p.unitarity_defect() <= 1e-12,
            "defect {}",
            p.unitarity_defect()
        );
        Ok(())
    })?;
    run_property("bx = 0", sequence_strategy(), |seq| {
        let p = resonant_shortcuts::su2::sequence_propagator(&seq).unwrap();
        prop_assert!(p.bx.abs() <= 1e-12, "bx = {}", p.bx);
        Ok(())
    })?;
    run_property(
        "a_y,2(τ3=0) = a_y,1(2τ2)",
        (0.05..1.5f64, 0.05..1.5f64, 0.05..3.0f64, 0.0..10.0f64),
        |(tf, gap, u, tau2)| {
            let a = BoundaryAngles::new((tf + gap).min(3.1), tf).unwrap();
            let tau1 = 0.5 * a.sweep() / u;
            let two = PulseSequence::new(a, u, tau1, tau2, 0.0, 2).unwrap();
            let one = PulseSequence::new(a, u, tau1, 2.0 * tau2, 0.0, 1).unwrap();
            prop_assert!((ay_coefficient(&two) - ay_coefficient(&one)).abs() <= 1e-10);
            let (c2, c1) = (ay_closed_form(&two).unwrap(), ay_closed_form(&one).unwrap());
            prop_assert!((c2 - c1).abs() <= 1e-10, "closed forms {c2} vs {c1}");
            Ok(())
        },
    )?;
    run_property("a_y,m(τ2=0) = constant pulse", sequence_strategy(), |seq| {
        let flat = PulseSequence::new(seq.angles, seq.u, seq.tau1, 0.0, seq.tau3, seq.m).unwrap();
        let constant = on_propagator(seq.u, seq.angles.sweep() / seq.u).unwrap().by;
        prop_assert!((ay_coefficient(&flat) - constant).abs() <= 1e-10);
        if let Some(c) = ay_closed_form(&flat) {
            prop_assert!(
                (c - constant).abs() <= 1e-10,
                "closed form {c} vs {constant}"
            );
        }
        Ok(())
    })?;
    run_property(
        "time-map round trip",
        (0.05..3.09f64, 0.05..3.09f64, 0.01..5.0f64),
        |(start, end, u)| {
            let (hi, lo) = (start.max(end), start.min(end));
            let tau = (hi - lo) / u;
            let t = segment_time_map(hi, u, tau).unwrap();
            let back = segment_rescaled_duration(hi, u, t).unwrap();
            prop_assert!(
                (back - tau).abs() <= 1e-12 * tau.max(1.0),
                "{back} vs {tau}"
            );
            let t0 = segment_time_map(hi, 0.0, tau).unwrap();
            let back0 = segment_rescaled_duration(hi, 0.0, t0).unwrap();
            prop_assert!((back0 - tau).abs() <= 1e-12 * tau.max(1.0));
            Ok(())
        },
    )?;
    run_property(
        "norm preservation",
        (sequence_strategy(), 0.0..PI, -PI..PI),
        |(seq, mix, phase)| {
            let start = StateVector::new(
                Complex64::new((0.5 * mix).cos(), 0.0),
                Complex64::from_polar((0.5 * mix).sin(), phase),
            )
            .unwrap();
            let exact = propagate_adiabatic(&seq, &start).unwrap();
            for p in &exact.points {
                prop_assert!((p.state.norm_sq() - 1.0).abs() <= 1e-10);
                let b = p.bloch;
                prop_assert!((b[0] * b[0] + b[1] * b[1] + b[2] * b[2] - 1.0).abs() <= 1e-9);
            }
            Ok(())
        },
    )?;
    // The numeric path is slower; it gets its own, smaller instances.
    run_property(
        "norm preservation (ode, tol 1e-12)",
        (0.2..1.2f64, 0.0..2.0f64),
        |(u, tau2)| {
            let a = BoundaryAngles::reference();
            let seq = PulseSequence::new(a, u, 0.5 * a.sweep() / u, tau2, 0.0, 1).unwrap();
            let wf = waveform(&seq, 10).unwrap();
            let opts = OriginalFrameOptions {
                tol: 1e-12,
                output_points: 20,
            };
            let rec =
                propagate_original_with(&wf, &StateVector::eigenstate_plus(a.theta_i()), &opts)
                    .unwrap();
            for p in &rec.points {
                prop_assert!(
                    (p.state.norm_sq() - 1.0).abs() <= 1e-10,
                    "norm {}",
                    p.state.norm_sq()
                );
            }
            Ok(())
        },
    )?;
    Ok(format!("7 properties x {CASES} cases"))
}

fn criterion_7() -> Outcome {
    let a = BoundaryAngles::reference();
    let grid = default_duration_grid();
    let cell = grid[1] - grid[0];
    let landscape = constant_pulse_error_vs_duration(&a, &grid).map_err(|e| e.to_string())?;
    let dips = detect_resonances(&landscape, -6.0).map_err(|e| e.to_string())?;
    let analytic: Vec<f64> = (1..=40)
        .map(|k| constant_resonance(&a, k).map(|r| r.t_original))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let spurious = dips
        .iter()
        .filter(|d| !analytic.iter().any(|t| (d.location - t).abs() <= cell))
        .count();
    let matched: Vec<bool> = analytic[..5]
        .iter()
        .map(|t| {
            dips.iter()
                .filter(|d| (d.location - t).abs() <= cell)
                .count()
                == 1
        })
        .collect();
    let ok = spurious == 0 && matched.iter().all(|&m| m);
    let locs: Vec<String> = dips
        .iter()
        .map(|d| format!("{:.4}π", d.location / PI))
        .collect();
    check(
        ok,
        format!(
            "{} dips [{}], {} spurious, grid cell {:.4}π",
            dips.len(),
            locs.join(", "),
            spurious,
            cell / PI
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("constant-pulse resonances", criterion_1),
        ("synthesis values", criterion_2),
        ("original-time durations", criterion_3),
        ("landscape branch structure", criterion_4),
        ("cross-frame verification", criterion_5),
        ("property suites", criterion_6),
        ("resonance-detection oracle", criterion_7),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} ({name}): FAIL: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
