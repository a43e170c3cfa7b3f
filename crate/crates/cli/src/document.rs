// SPDX-License-Identifier: Apache-2.0

//! The JSON sequence document written by `synthesize` and read by `simulate`
//! and `scan`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use resonant_shortcuts::synthesis::{MSelection, SynthesisReport};
use resonant_shortcuts::timemap::total_original_duration;
use resonant_shortcuts::{BoundaryAngles, PulseSequence};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnglesDoc {
    pub theta_i: f64,
    pub theta_f: f64,
    /// `Δ/Ω` at the start and end of the sweep; informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_end: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    /// `"composite"` or `"constant-pulse"`.
    pub selection: String,
    /// Resonance index when the selection hit a constant-pulse resonance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance_k: Option<u32>,
    pub u_lower_bound: f64,
    pub u_bracket: [f64; 2],
    pub sweep_steps: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceDocument {
    pub schema_version: u32,
    pub angles: AnglesDoc,
    pub pattern: String,
    pub m: u32,
    pub u: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub t_prime: f64,
    pub t_original: f64,
    /// `|b_y|` of the total propagator.
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

impl SequenceDocument {
    pub fn from_sequence(
        seq: &PulseSequence,
        residual: f64,
        diagnostics: Option<Diagnostics>,
    ) -> CliResult<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            angles: AnglesDoc {
                theta_i: seq.angles.theta_i(),
                theta_f: seq.angles.theta_f(),
                delta_start: Some(seq.angles.delta_start()),
                delta_end: Some(seq.angles.delta_end()),
            },
            pattern: seq.pattern(),
            m: seq.m,
            u: seq.u,
            tau1: seq.tau1,
            tau2: seq.tau2,
            tau3: seq.tau3,
            t_prime: seq.t_prime,
            t_original: total_original_duration(seq)?,
            residual,
            diagnostics,
        })
    }

    pub fn from_report(report: &SynthesisReport) -> CliResult<Self> {
        let (selection, resonance_k) = match report.selection {
            MSelection::Composite { .. } => ("composite", None),
            MSelection::ConstantPulse { k } => ("constant-pulse", Some(k)),
        };
        let diagnostics = Diagnostics {
            selection: selection.to_owned(),
            resonance_k,
            u_lower_bound: report.u_lower_bound,
            u_bracket: [report.u_bracket.0, report.u_bracket.1],
            sweep_steps: report.sweep_steps,
            warnings: report.warnings.clone(),
        };
        Self::from_sequence(&report.sequence, report.residual, Some(diagnostics))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    /// Parse and validate against the sequence invariants.
    pub fn parse(text: &str, path: &Path) -> CliResult<(Self, PulseSequence)> {
        let schema = |message: String| CliError::Schema {
            path: path.to_owned(),
            message,
        };
        let doc: SequenceDocument =
            serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(schema(format!(
                "field `schema_version`: expected {SCHEMA_VERSION}, found {}",
                doc.schema_version
            )));
        }
        let angles = BoundaryAngles::new(doc.angles.theta_i, doc.angles.theta_f)
            .map_err(|e| schema(format!("field `angles`: {e}")))?;
        let seq = PulseSequence::new(angles, doc.u, doc.tau1, doc.tau2, doc.tau3, doc.m)
            .map_err(|e| schema(e.to_string()))?;
        if (seq.t_prime - doc.t_prime).abs() > 1e-10 * seq.t_prime.max(1.0) {
            return Err(schema(format!(
                "field `t_prime`: {} disagrees with 2τ1 + mτ2 + (m−1)τ3 = {}",
                doc.t_prime, seq.t_prime
            )));
        }
        Ok((doc, seq))
    }

    pub fn load(path: &Path) -> CliResult<(Self, PulseSequence)> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use resonant_shortcuts::synthesis::synthesize;
    use std::f64::consts::PI;

    #[test]
    fn round_trip_is_exact() {
        let seq = synthesize(&BoundaryAngles::reference(), 3.0 * PI).unwrap();
        let doc = SequenceDocument::from_sequence(&seq, 1e-15, None).unwrap();
        let (back, parsed) = SequenceDocument::parse(&doc.to_json(), Path::new("x.json")).unwrap();
        assert_eq!(back, doc);
        assert_eq!(parsed, seq);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let seq = synthesize(&BoundaryAngles::reference(), 1.5 * PI).unwrap();
        let json = SequenceDocument::from_sequence(&seq, 0.0, None)
            .unwrap()
            .to_json();
        let p = Path::new("s.json");

        let missing = json.replace("\"tau2\"", "\"tau_two\"");
        let err = SequenceDocument::parse(&missing, p)
            .unwrap_err()
            .to_string();
        assert!(err.contains("tau_two") || err.contains("tau2"), "{err}");

        let version = json.replace("\"schema_version\": 1", "\"schema_version\": 7");
        let err = SequenceDocument::parse(&version, p)
            .unwrap_err()
            .to_string();
        assert!(err.contains("schema_version"), "{err}");

        let wrong_type = json.replace(&format!("\"m\": {}", seq.m), "\"m\": \"one\"");
        let err = SequenceDocument::parse(&wrong_type, p)
            .unwrap_err()
            .to_string();
        assert!(err.contains("m") && err.contains("line"), "{err}");

        let doc = SequenceDocument {
            t_prime: 99.0,
            ..SequenceDocument::from_sequence(&seq, 0.0, None).unwrap()
        };
        let err = SequenceDocument::parse(&doc.to_json(), p)
            .unwrap_err()
            .to_string();
        assert!(err.contains("t_prime"), "{err}");
    }
}
