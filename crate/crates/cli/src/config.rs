// SPDX-License-Identifier: Apache-2.0

//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use resonant_shortcuts::BoundaryAngles;

use crate::error::{CliError, CliResult};

/// Largest number of points a scan may evaluate.
pub const MAX_GRID_POINTS: usize = 10_000_000;

/// Which time axis a duration is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TimeFrame {
    /// `T'`, the duration in rescaled time.
    #[default]
    Rescaled,
    /// `T`, the duration in original time (units of `1/Ω`).
    Original,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryFrame {
    #[default]
    Adiabatic,
    Original,
}

/// A number, or a string such as `"1.5pi"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    pub fn value(&self) -> CliResult<f64> {
        match self {
            Scalar::Number(v) => Ok(*v),
            Scalar::Text(s) => parse_scalar(s),
        }
    }
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub theta_i: Option<Scalar>,
    pub theta_f: Option<Scalar>,
    pub delta_start: Option<f64>,
    pub delta_end: Option<f64>,
    pub duration: Option<Scalar>,
    pub frame: Option<TimeFrame>,
    pub m_override: Option<u32>,
    pub k_max: Option<u32>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub grid: Option<Vec<String>>,
    pub threshold: Option<f64>,
    pub sequence: Option<PathBuf>,
    pub trajectory: Option<TrajectoryFrame>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| {
            let location = e
                .span()
                .map(|s| {
                    let line = text[..s.start].matches('\n').count() + 1;
                    format!("line {line}: ")
                })
                .unwrap_or_default();
            CliError::config(format!("{location}{}", e.message()))
        })
    }
}

/// Parse a real number with an optional `pi` (or `π`) factor: `"1.5pi"`, `"pi"`, `"0.25"`.
pub fn parse_scalar(text: &str) -> CliResult<f64> {
    let t = text.trim();
    let (number, factor) = match t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
        Some(rest) => (rest.trim().trim_end_matches('*'), PI),
        None => (t, 1.0),
    };
    let base = if number.is_empty() {
        1.0
    } else {
        number
            .parse::<f64>()
            .map_err(|_| CliError::config(format!("cannot parse `{text}` as a number")))?
    };
    let v = base * factor;
    if !v.is_finite() {
        return Err(CliError::config(format!("`{text}` is not finite")));
    }
    Ok(v)
}

/// `start:stop:n`, endpoints accepting the `pi` suffix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, n] = parts[..] else {
            return Err(CliError::config(format!(
                "grid `{text}` must have the form start:stop:n"
            )));
        };
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("grid `{text}`: `{n}` is not a point count")))?;
        if n == 0 {
            return Err(CliError::config(format!("grid `{text}` has no points")));
        }
        Ok(Self {
            start: parse_scalar(start)?,
            stop: parse_scalar(stop)?,
            n,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        resonant_shortcuts::scan::linspace(self.start, self.stop, self.n).expect("validated grid")
    }
}

/// Refuse scans larger than [`MAX_GRID_POINTS`].
pub fn check_grid_size(grids: &[GridSpec]) -> CliResult<()> {
    let total = grids.iter().try_fold(1usize, |acc, g| acc.checked_mul(g.n));
    match total {
        Some(n) if n <= MAX_GRID_POINTS => Ok(()),
        _ => Err(CliError::config(format!(
            "grid has {} points; the limit is {MAX_GRID_POINTS}",
            total.map_or_else(|| "too many".to_owned(), |n| n.to_string())
        ))),
    }
}

/// Angles from either form; both forms together are rejected. Without either
/// the sweep runs from `Δ = −10Ω` to `Δ = 10Ω`.
pub fn resolve_angles(
    theta_i: Option<f64>,
    theta_f: Option<f64>,
    delta_start: Option<f64>,
    delta_end: Option<f64>,
) -> CliResult<BoundaryAngles> {
    let thetas = theta_i.is_some() || theta_f.is_some();
    let deltas = delta_start.is_some() || delta_end.is_some();
    match (thetas, deltas) {
        (true, true) => Err(CliError::config(
            "give the angles either as --theta-i/--theta-f or as --delta-start/--delta-end, not both",
        )),
        (true, false) => match (theta_i, theta_f) {
            (Some(i), Some(f)) => Ok(BoundaryAngles::new(i, f)?),
            _ => Err(CliError::config("--theta-i and --theta-f must be given together")),
        },
        (false, true) => match (delta_start, delta_end) {
            (Some(s), Some(e)) => Ok(BoundaryAngles::from_detunings(s, e)?),
            _ => Err(CliError::config("--delta-start and --delta-end must be given together")),
        },
        (false, false) => Ok(BoundaryAngles::reference()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars() {
        assert_eq!(parse_scalar("0.25").unwrap(), 0.25);
        assert!((parse_scalar("1.5pi").unwrap() - 1.5 * PI).abs() < 1e-15);
        assert!((parse_scalar("pi").unwrap() - PI).abs() < 1e-15);
        assert!((parse_scalar("2π").unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!((parse_scalar("3*pi").unwrap() - 3.0 * PI).abs() < 1e-15);
        assert!(parse_scalar("abc").is_err());
        assert!(parse_scalar("1e400").is_err());
    }

    #[test]
    fn grids() {
        let g = GridSpec::parse("0.1pi:8pi:2000").unwrap();
        assert_eq!(g.n, 2000);
        assert!((g.stop - 8.0 * PI).abs() < 1e-14);
        assert!(GridSpec::parse("0:1").is_err());
        assert!(GridSpec::parse("0:1:0").is_err());
        assert!(GridSpec::parse("0:1:x").is_err());
        let big = GridSpec {
            start: 0.0,
            stop: 1.0,
            n: 5000,
        };
        assert!(check_grid_size(&[big, big]).is_err());
        assert!(check_grid_size(&[big, GridSpec { n: 2000, ..big }]).is_ok());
    }

    #[test]
    fn angle_forms() {
        let r = resolve_angles(None, None, None, None).unwrap();
        assert_eq!(r, BoundaryAngles::reference());
        assert!(resolve_angles(Some(2.0), Some(1.0), Some(-1.0), None).is_err());
        assert!(resolve_angles(Some(2.0), None, None, None).is_err());
        let d = resolve_angles(None, None, Some(-10.0), Some(10.0)).unwrap();
        assert!((d.theta_f() - 0.1f64.atan()).abs() < 1e-15);
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let err = FileConfig::parse("theta_i = 2.0\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = FileConfig::parse("theta_i = 2.0\n\ntol = \"x\"\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let ok =
            FileConfig::parse("duration = \"1.5pi\"\nframe = \"original\"\ngrid = [\"0:1:3\"]\n")
                .unwrap();
        assert_eq!(ok.frame, Some(TimeFrame::Original));
        assert!((ok.duration.unwrap().value().unwrap() - 1.5 * PI).abs() < 1e-15);
    }
}
