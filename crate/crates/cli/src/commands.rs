// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use resonant_shortcuts::dynamics::{
    propagate_adiabatic_with, propagate_original_with, OriginalFrameOptions, StateVector,
    DEFAULT_ORIGINAL_POINTS, DEFAULT_POINTS_PER_SEGMENT,
};
use resonant_shortcuts::resonance::{lower_bound_durations, resonance_table};
use resonant_shortcuts::roots::find_root;
use resonant_shortcuts::scan::{
    analyze_branches, constant_pulse_error_vs_duration, default_duration_grid,
    default_landscape_grids, detect_resonances, on_off_on_landscape, sequence_error_scan,
    ErrorLandscape, ScanParameter, DEFAULT_1D_POINTS,
};
use resonant_shortcuts::su2::sequence_propagator;
use resonant_shortcuts::synthesis::{synthesize_with, SynthesisOptions, SynthesisReport};
use resonant_shortcuts::timemap::{total_original_duration, waveform};
use resonant_shortcuts::{BoundaryAngles, PulseSequence};

use crate::config::{
    check_grid_size, parse_scalar, resolve_angles, FileConfig, GridSpec, TimeFrame, TrajectoryFrame,
};
use crate::document::SequenceDocument;
use crate::error::{CliError, CliResult};
use crate::output::{emit, landscape_csv, num, resonance_csv, trajectory_csv};
use crate::{CommonArgs, DurationArgs, ScanKind};

pub const DEFAULT_K_MAX: u32 = 10;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_THRESHOLD: f64 = -6.0;

/// Flags merged over the configuration file.
pub struct Context {
    pub angles: BoundaryAngles,
    pub out: Option<PathBuf>,
    pub file: FileConfig,
}

impl Context {
    pub fn new(common: &CommonArgs, file: FileConfig) -> CliResult<Self> {
        let scalar = |flag: &Option<String>,
                      fallback: &Option<crate::config::Scalar>|
         -> CliResult<Option<f64>> {
            match (flag, fallback) {
                (Some(s), _) => parse_scalar(s).map(Some),
                (None, Some(v)) => v.value().map(Some),
                (None, None) => Ok(None),
            }
        };
        let theta_i = scalar(&common.theta_i, &file.theta_i)?;
        let theta_f = scalar(&common.theta_f, &file.theta_f)?;
        let angles = resolve_angles(
            theta_i,
            theta_f,
            common.delta_start.or(file.delta_start),
            common.delta_end.or(file.delta_end),
        )?;
        Ok(Self {
            angles,
            out: common.out.clone().or_else(|| file.out.clone()),
            file,
        })
    }

    fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    /// Rescaled duration `T'` from `--duration`/`--frame`, if one was given.
    fn rescaled_duration(&self, args: &DurationArgs) -> CliResult<Option<f64>> {
        let value = match (&args.duration, &self.file.duration) {
            (Some(s), _) => parse_scalar(s)?,
            (None, Some(v)) => v.value()?,
            (None, None) => return Ok(None),
        };
        match args.frame.or(self.file.frame).unwrap_or_default() {
            TimeFrame::Rescaled => Ok(Some(value)),
            TimeFrame::Original => {
                rescaled_for_original(&self.angles, value, &self.options(args)).map(Some)
            }
        }
    }

    fn options(&self, args: &DurationArgs) -> SynthesisOptions {
        SynthesisOptions {
            m_override: args.m_override.or(self.file.m_override),
            ..SynthesisOptions::default()
        }
    }

    fn grids(&self, flags: Vec<String>) -> CliResult<Vec<GridSpec>> {
        let specs = if flags.is_empty() {
            self.file.grid.clone().unwrap_or_default()
        } else {
            flags
        };
        specs.iter().map(|s| GridSpec::parse(s)).collect()
    }
}

/// Rescaled duration whose synthesized sequence lasts `t_original` in original time.
pub fn rescaled_for_original(
    angles: &BoundaryAngles,
    t_original: f64,
    opts: &SynthesisOptions,
) -> CliResult<f64> {
    if angles.is_degenerate() {
        return Ok(t_original / angles.theta_i().sin());
    }
    let bound = lower_bound_durations(angles).t_original;
    let infeasible = || {
        CliError::config(format!(
            "original duration T = {t_original} ({:.6}π) must exceed the lower bound {bound} ({:.6}π), \
             the image of T'_0 = π",
            t_original / PI,
            bound / PI
        ))
    };
    if !t_original.is_finite() || t_original <= bound {
        return Err(infeasible());
    }
    let eval = |t_prime: f64| {
        synthesize_with(angles, t_prime, opts)
            .and_then(|r| total_original_duration(&r.sequence))
            .map(|t| t - t_original)
    };
    // The map T' → T is increasing; walk the lower end towards π until it
    // falls below the target. Very short durations need amplitudes above the
    // synthesis ceiling.
    let mut eps = 0.5;
    let lo = loop {
        let lo = PI * (1.0 + eps);
        if eval(lo)? < 0.0 {
            break lo;
        }
        eps *= 0.5;
    };
    let mut hi = 2.0 * PI;
    while eval(hi)? < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(CliError::config(format!(
                "original duration T = {t_original} is too long"
            )));
        }
    }
    let mut failure = None;
    let root = find_root(
        |t_prime| match eval(t_prime) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-12 * t_original.max(1.0),
    );
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(root?.x)
}

pub fn resonances(ctx: &Context, k_max: Option<u32>) -> CliResult<()> {
    let k_max = k_max.or(ctx.file.k_max).unwrap_or(DEFAULT_K_MAX);
    if k_max == 0 {
        return Err(CliError::config("--k-max must be at least 1"));
    }
    let rows = resonance_table(&ctx.angles, k_max)?;
    let degenerate = ctx.angles.is_degenerate();
    let mut table = format!(
        "{:>4} {:>20} {:>20} {:>20}\n",
        "k", "u_k", "T'_k/pi", "T_k/pi"
    );
    for r in &rows {
        table.push_str(&format!(
            "{:>4} {:>20.12} {:>20.12} {:>20.12}{}\n",
            r.k,
            r.u,
            r.t_prime / PI,
            r.t_original / PI,
            if degenerate { "  degenerate" } else { "" }
        ));
    }
    match ctx.out() {
        Some(path) => {
            print!("{table}");
            emit(Some(path), &resonance_csv(&rows, degenerate))
        }
        None => emit(None, &table),
    }
}

pub fn synthesize(ctx: &Context, args: &DurationArgs) -> CliResult<()> {
    let report = synthesize_report(ctx, args)?;
    let doc = SequenceDocument::from_report(&report)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "{} m={} u={} T'={}pi T={}pi residual={:e}",
        doc.pattern,
        doc.m,
        doc.u,
        doc.t_prime / PI,
        doc.t_original / PI,
        doc.residual
    );
    emit(ctx.out(), &doc.to_json())
}

fn synthesize_report(ctx: &Context, args: &DurationArgs) -> CliResult<SynthesisReport> {
    let t_prime = ctx
        .rescaled_duration(args)?
        .ok_or_else(|| CliError::config("--duration is required"))?;
    Ok(synthesize_with(&ctx.angles, t_prime, &ctx.options(args))?)
}

fn load_sequence(
    ctx: &Context,
    flag: Option<PathBuf>,
) -> CliResult<Option<(SequenceDocument, PulseSequence)>> {
    match flag.or_else(|| ctx.file.sequence.clone()) {
        Some(path) => SequenceDocument::load(&path).map(Some),
        None => Ok(None),
    }
}

pub fn simulate(
    ctx: &Context,
    sequence: Option<PathBuf>,
    trajectory: Option<TrajectoryFrame>,
    samples: Option<usize>,
    tol: Option<f64>,
) -> CliResult<()> {
    let (_, seq) =
        load_sequence(ctx, sequence)?.ok_or_else(|| CliError::config("--sequence is required"))?;
    let residual = sequence_propagator(&seq)?.by.abs();
    let samples = samples.or(ctx.file.samples);
    if samples == Some(0) {
        return Err(CliError::config("--samples must be at least 1"));
    }
    let record = match trajectory.or(ctx.file.trajectory).unwrap_or_default() {
        TrajectoryFrame::Adiabatic => propagate_adiabatic_with(
            &seq,
            &StateVector::first(),
            samples.unwrap_or(DEFAULT_POINTS_PER_SEGMENT),
        )?,
        TrajectoryFrame::Original => {
            let tol = tol.or(ctx.file.tol).unwrap_or(DEFAULT_TOL);
            if tol.is_nan() || tol <= 0.0 {
                return Err(CliError::config(format!(
                    "--tol must be positive, got {tol}"
                )));
            }
            let output_points = samples.unwrap_or(DEFAULT_ORIGINAL_POINTS);
            let wf = waveform(&seq, output_points)?;
            let start = StateVector::eigenstate_plus(seq.angles.theta_i());
            propagate_original_with(&wf, &start, &OriginalFrameOptions { tol, output_points })?
        }
    };
    eprintln!(
        "terminal_error={:e} log_error={} residual={:e}",
        record.terminal_error, record.log_error, residual
    );
    emit(ctx.out(), &trajectory_csv(&record, residual))
}

pub fn scan(
    ctx: &Context,
    kind: ScanKind,
    grid: Vec<String>,
    sequence: Option<PathBuf>,
    args: &DurationArgs,
    threshold: Option<f64>,
) -> CliResult<()> {
    let grids = ctx.grids(grid)?;
    let expected = if kind == ScanKind::Landscape { 2 } else { 1 };
    if !grids.is_empty() && grids.len() != expected {
        return Err(CliError::config(format!(
            "this scan takes {expected} --grid value(s), got {}",
            grids.len()
        )));
    }
    check_grid_size(&grids)?;
    let values = |i: usize| grids.get(i).map(GridSpec::values);
    let threshold = threshold
        .or(ctx.file.threshold)
        .unwrap_or(DEFAULT_THRESHOLD);

    let landscape = match kind {
        ScanKind::Constant => constant_pulse_error_vs_duration(
            &ctx.angles,
            &values(0).unwrap_or_else(default_duration_grid),
        )?,
        ScanKind::U | ScanKind::Tau1 => {
            let template = match load_sequence(ctx, sequence)? {
                Some((_, seq)) => seq,
                None => {
                    synthesize_report(ctx, args)
                        .map_err(|e| match e {
                            CliError::Config(_) => {
                                CliError::config("give --sequence or --duration for a u/tau1 scan")
                            }
                            other => other,
                        })?
                        .sequence
                }
            };
            let (parameter, default) = if kind == ScanKind::U {
                (ScanParameter::U, (0.5 * template.u, 1.5 * template.u))
            } else {
                let on = template.angles.sweep() / template.u;
                (ScanParameter::Tau1, (0.0, 0.5 * on))
            };
            let grid = match values(0) {
                Some(v) => v,
                None => {
                    resonant_shortcuts::scan::linspace(default.0, default.1, DEFAULT_1D_POINTS)?
                }
            };
            sequence_error_scan(&template, parameter, &grid)?
        }
        ScanKind::Landscape => {
            let (u, t) = match (values(0), values(1)) {
                (Some(u), Some(t)) => (u, t),
                _ => default_landscape_grids(),
            };
            on_off_on_landscape(&ctx.angles, &u, &t)?
        }
    };
    report_features(&landscape, threshold);
    emit(ctx.out(), &landscape_csv(&landscape))
}

fn report_features(landscape: &ErrorLandscape, threshold: f64) {
    if landscape.is_one_dimensional() {
        if let Ok(dips) = detect_resonances(landscape, threshold) {
            for d in dips {
                eprintln!(
                    "dip: {}={} log_error={}",
                    landscape.axis1.name,
                    num(d.location),
                    num(d.log_error)
                );
            }
        }
    } else if let Ok(b) = analyze_branches(landscape) {
        eprintln!(
            "vertical line u={} intersection T={} ({}pi)",
            num(b.vertical_u),
            num(b.intersection_t),
            b.intersection_t / PI
        );
    }
}
