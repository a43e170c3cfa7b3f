// SPDX-License-Identifier: Apache-2.0

//! CSV formatting. Numbers use 17 significant digits so identical inputs give
//! byte-identical files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use resonant_shortcuts::dynamics::TrajectoryRecord;
use resonant_shortcuts::resonance::{cot, ConstantResonance};
use resonant_shortcuts::scan::{Cell, ErrorLandscape};

use crate::error::{CliError, CliResult};

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write to `path`, or to standard output when `None`.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

pub fn resonance_csv(rows: &[ConstantResonance], degenerate: bool) -> String {
    let mut s = String::from("k,u,t_prime_over_pi,t_original_over_pi,degenerate\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.k,
            num(r.u),
            num(r.t_prime / std::f64::consts::PI),
            num(r.t_original / std::f64::consts::PI),
            degenerate
        );
    }
    s
}

pub fn trajectory_csv(record: &TrajectoryRecord, residual: f64) -> String {
    let mut s = String::from(
        "t,tau,theta,delta_over_omega,frame,bloch_x,bloch_y,bloch_z,re_amp0,im_amp0,re_amp1,im_amp1\n",
    );
    let frame = record.frame.as_str();
    for p in &record.points {
        let _ = writeln!(
            s,
            "{},{},{},{},{frame},{},{},{},{},{},{},{}",
            num(p.t),
            num(p.tau),
            num(p.theta),
            num(cot(p.theta)),
            num(p.bloch[0]),
            num(p.bloch[1]),
            num(p.bloch[2]),
            num(p.state.amp0.re),
            num(p.state.amp0.im),
            num(p.state.amp1.re),
            num(p.state.amp1.im),
        );
    }
    let _ = writeln!(
        s,
        "# terminal_error={},log_error={},residual={}",
        num(record.terminal_error),
        num(record.log_error),
        num(residual)
    );
    s
}

/// Long format: one row per grid point, row-major; masked points have an
/// empty `log_error`.
pub fn landscape_csv(landscape: &ErrorLandscape) -> String {
    let mut s = String::new();
    let _ = write!(s, "{}", landscape.axis1.name);
    if let Some(a2) = &landscape.axis2 {
        let _ = write!(s, ",{}", a2.name);
    }
    s.push_str(",log_error,masked\n");
    for (x, y, cell) in landscape.iter() {
        s.push_str(&num(x));
        if let Some(y) = y {
            s.push(',');
            s.push_str(&num(y));
        }
        match cell {
            Cell::Masked => s.push_str(",,true\n"),
            Cell::Value { log_error, .. } => {
                let _ = writeln!(s, ",{},false", num(log_error));
            }
        }
    }
    s
}

/// Parse the `# key=value,...` footer of a trajectory CSV.
pub fn parse_footer(csv: &str) -> Option<Vec<(String, f64)>> {
    let line = csv.lines().rev().find(|l| l.starts_with('#'))?;
    line.trim_start_matches('#')
        .trim()
        .split(',')
        .map(|kv| {
            let (k, v) = kv.split_once('=')?;
            Some((k.trim().to_owned(), v.trim().parse().ok()?))
        })
        .collect()
}
