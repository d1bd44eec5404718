use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::multiplier::QuotientReport;
use crate::ordering::{CodimReport, DouglasEstimate, ProbeReport};
use crate::regularization::RegularizationProfile;
use crate::spectral::{DecayFit, IndexWindow, SpectrumComparison};
use crate::verdict::{OrderingVerdict, WitnessCertificate};

pub const SCHEMA_VERSION: &str = "1.0";

/// Configuration as it was run, in textual form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub experiment: String,
    pub operators: Vec<String>,
    pub levels: Vec<usize>,
    pub window: Option<String>,
    pub family: Option<String>,
    pub precision: String,
    pub alphas: Option<Vec<f64>>,
    pub rank: Option<usize>,
    pub codim_m: Option<usize>,
    pub half_line_t: f64,
    pub refinement: Option<Vec<f64>>,
    pub seed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumArtifact {
    pub label: String,
    pub level: usize,
    pub len: usize,
    pub precision: String,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitEntry {
    pub label: String,
    pub level: usize,
    pub window: IndexWindow,
    pub best: DecayFit,
    pub candidates: Vec<DecayFit>,
    /// Spectrum CSV the fit was computed from.
    pub spectrum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonEntry {
    pub level: usize,
    pub forward: SpectrumComparison,
    pub backward: SpectrumComparison,
    pub verdict: OrderingVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessEntry {
    pub pair: (String, String),
    pub level: usize,
    pub certificate: WitnessCertificate,
    pub sound: bool,
    /// Directory holding `R.csv`, `S.csv`, `sigma.csv` and `certificate.json`.
    pub dir: String,
    /// Residual bound of a composed witness.
    pub composed_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DouglasEntry {
    pub pair: (String, String),
    pub forward: DouglasEstimate,
    pub backward: DouglasEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileEntry {
    pub pair: (String, String),
    pub level: usize,
    pub forward: RegularizationProfile,
    pub backward: RegularizationProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientEntry {
    pub pair: (String, String),
    pub n_points: usize,
    pub report: QuotientReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodimEntry {
    pub label: String,
    pub level: usize,
    pub report: CodimReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEntry {
    pub pair: (String, String),
    pub report: ProbeReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Numerical,
    InvalidInput,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub stage: String,
    pub kind: FailureKind,
    pub message: String,
}

impl Failure {
    pub fn from_error(stage: &str, e: &Error) -> Self {
        let kind = match e {
            Error::NumericalFailure { .. } => FailureKind::Numerical,
            _ => FailureKind::InvalidInput,
        };
        Failure {
            stage: stage.to_string(),
            kind,
            message: e.to_string(),
        }
    }
}

/// Summary line of one `paper-suite` member.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChildSummary {
    pub name: String,
    pub report: String,
    pub verdict: String,
    pub failure: Option<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictReport {
    pub schema_version: String,
    pub inputs: ConfigEcho,
    pub verdict: OrderingVerdict,
    pub spectra: Vec<SpectrumArtifact>,
    pub fits: Vec<FitEntry>,
    pub comparisons: Vec<ComparisonEntry>,
    pub witnesses: Vec<WitnessEntry>,
    pub douglas: Vec<DouglasEntry>,
    pub profiles: Vec<ProfileEntry>,
    pub quotients: Vec<QuotientEntry>,
    pub codim: Vec<CodimEntry>,
    pub probes: Vec<ProbeEntry>,
    pub children: Vec<ChildSummary>,
    pub failure: Option<Failure>,
    /// Paths relative to the output directory, in emission order.
    pub artifacts: Vec<String>,
    /// Wall-clock per stage; written to `timings.json`, never into
    /// `report.json`, so the report stays byte-identical across reruns.
    #[serde(skip)]
    pub timings: Vec<StageTiming>,
}

impl VerdictReport {
    pub fn new(inputs: ConfigEcho) -> Self {
        VerdictReport {
            schema_version: SCHEMA_VERSION.to_string(),
            inputs,
            verdict: OrderingVerdict::undecided(),
            spectra: Vec::new(),
            fits: Vec::new(),
            comparisons: Vec::new(),
            witnesses: Vec::new(),
            douglas: Vec::new(),
            profiles: Vec::new(),
            quotients: Vec::new(),
            codim: Vec::new(),
            probes: Vec::new(),
            children: Vec::new(),
            failure: None,
            artifacts: Vec::new(),
            timings: Vec::new(),
        }
    }

    /// True when the report carries nothing that can be plotted.
    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty() && self.profiles.is_empty() && self.douglas.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(self)
    }
}

/// Pretty JSON with sorted keys and every float written with 17
/// significant digits. Non-finite floats become `null`.
pub fn to_json_string<S: Serialize>(value: &S) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    emit(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

pub fn write_json<S: Serialize>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json_string(value)?).map_err(|e| Error::io(path, e))
}

fn emit(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64 number");
                let _ = write!(out, "{x:.16e}");
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(depth + 1, out);
                emit(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(depth + 1, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                emit(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        b: f64,
        a: usize,
        c: Vec<f64>,
        d: Option<f64>,
    }

    #[test]
    fn floats_carry_seventeen_digits_and_keys_are_sorted() {
        let s = Sample {
            b: 2.0 / std::f64::consts::PI,
            a: 3,
            c: vec![1.0, f64::INFINITY],
            d: None,
        };
        let json = to_json_string(&s).unwrap();
        assert!(json.contains("\"b\": 6.3661977236758138e-1"), "{json}");
        assert!(json.find("\"a\"").unwrap() < json.find("\"b\"").unwrap());
        assert!(json.contains("1.0000000000000000e0"));
        assert!(json.contains("null"));
        let back: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["b"].as_f64().unwrap(), 2.0 / std::f64::consts::PI);
        assert_eq!(back["a"].as_u64(), Some(3));
    }
}
