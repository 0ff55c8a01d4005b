//! Experiment configuration and its schema check.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::pairing::DualConfig;
use crate::transceiver::{DesignConfig, GzfConfig, ThpConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    PairingCompare,
    SmseVsPt,
    ConvergenceTrace,
    SmseCdf,
    SerCurve,
    RelayRatioCurve,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::PairingCompare,
        ExperimentId::SmseVsPt,
        ExperimentId::ConvergenceTrace,
        ExperimentId::SmseCdf,
        ExperimentId::SerCurve,
        ExperimentId::RelayRatioCurve,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::PairingCompare => "pairing_compare",
            ExperimentId::SmseVsPt => "smse_vs_pt",
            ExperimentId::ConvergenceTrace => "convergence_trace",
            ExperimentId::SmseCdf => "smse_cdf",
            ExperimentId::SerCurve => "ser_curve",
            ExperimentId::RelayRatioCurve => "relay_ratio_curve",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|e| e.as_str() == s).ok_or_else(|| format!("unknown experiment id `{s}`"))
    }
}

/// Drop geometry and solver settings for the pairing comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairingSetup {
    pub m_values: Vec<usize>,
    pub region_side: f64,
    pub n_t: usize,
    /// Largest `M` for which the exhaustive optimum is computed.
    pub brute_max_m: usize,
    pub dual: DualConfig,
}

impl Default for PairingSetup {
    fn default() -> Self {
        Self { m_values: vec![5, 10, 20], region_side: 2.0, n_t: 2, brute_max_m: 5, dual: DualConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    pub p_t_db: Vec<f64>,
    pub p_p_db: Vec<f64>,
    pub n_trials: usize,
    #[serde(default = "default_qam")]
    pub qam_order: usize,
    /// Frames per SER point.
    #[serde(default = "default_frames")]
    pub n_frames: usize,
    /// Antennas for the random-channel experiments.
    #[serde(default = "default_n_t")]
    pub n_t: usize,
    #[serde(default)]
    pub pairing: PairingSetup,
    #[serde(default)]
    pub design: DesignConfig,
    #[serde(default)]
    pub gzf: GzfConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn default_qam() -> usize {
    16
}

fn default_frames() -> usize {
    100_000
}

fn default_n_t() -> usize {
    2
}

/// One schema or range violation, located by a JSON path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn diag(path: impl Into<String>, message: impl Into<String>) -> Diagnostic {
    Diagnostic { path: path.into(), message: message.into() }
}

fn check_grid(obj: &serde_json::Map<String, Value>, key: &str, out: &mut Vec<Diagnostic>) {
    let path = format!("$.{key}");
    match obj.get(key) {
        None => out.push(diag(path, "missing required field")),
        Some(Value::Array(v)) if v.is_empty() => out.push(diag(path, "grid must be nonempty")),
        Some(Value::Array(v)) => {
            for (i, x) in v.iter().enumerate() {
                if !x.as_f64().is_some_and(f64::is_finite) {
                    out.push(diag(format!("{path}[{i}]"), "expected a finite number (dB)"));
                }
            }
        }
        Some(_) => out.push(diag(path, "expected an array of numbers (dB)")),
    }
}

/// Lists every problem with a raw config document; empty when valid.
pub fn validate(doc: &Value) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let Some(obj) = doc.as_object() else {
        return vec![diag("$", "config must be a JSON object")];
    };
    match obj.get("experiment") {
        None => out.push(diag("$.experiment", "missing required field")),
        Some(Value::String(s)) => {
            if let Err(e) = s.parse::<ExperimentId>() {
                out.push(diag("$.experiment", e));
            }
        }
        Some(_) => out.push(diag("$.experiment", "expected a string")),
    }
    match obj.get("seed") {
        None => out.push(diag("$.seed", "missing required field")),
        Some(v) if v.as_u64().is_none() => out.push(diag("$.seed", "expected a nonnegative integer")),
        _ => {}
    }
    match obj.get("n_trials") {
        None => out.push(diag("$.n_trials", "missing required field")),
        Some(v) if !v.as_u64().is_some_and(|n| n >= 1) => out.push(diag("$.n_trials", "expected an integer ≥ 1")),
        _ => {}
    }
    check_grid(obj, "p_t_db", &mut out);
    check_grid(obj, "p_p_db", &mut out);
    if !out.is_empty() {
        return out;
    }
    match serde_json::from_value::<ExperimentConfig>(doc.clone()) {
        Err(e) => out.push(diag("$", e.to_string())),
        Ok(cfg) => out.extend(cfg.range_errors()),
    }
    out
}

impl ExperimentConfig {
    fn range_errors(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if let Err(e) = ThpConfig::new(self.qam_order) {
            out.push(diag("$.qam_order", e.to_string()));
        }
        if self.n_frames == 0 {
            out.push(diag("$.n_frames", "must be ≥ 1"));
        }
        if self.n_t == 0 {
            out.push(diag("$.n_t", "must be ≥ 1"));
        }
        if self.pairing.m_values.is_empty() || self.pairing.m_values.contains(&0) {
            out.push(diag("$.pairing.m_values", "must be nonempty with every M ≥ 1"));
        }
        if !(self.pairing.region_side > 0.0) {
            out.push(diag("$.pairing.region_side", "must be positive"));
        }
        if self.pairing.n_t == 0 {
            out.push(diag("$.pairing.n_t", "must be ≥ 1"));
        }
        if self.design.max_iter == 0 {
            out.push(diag("$.design.max_iter", "must be ≥ 1"));
        }
        if !(self.design.tol_gap > 0.0) {
            out.push(diag("$.design.tol_gap", "must be positive"));
        }
        if self.gzf.resolution < 2 {
            out.push(diag("$.gzf.resolution", "must be ≥ 2"));
        }
        out
    }

    /// Parses and validates a config document.
    pub fn from_json(text: &str) -> Result<Self, Vec<Diagnostic>> {
        let doc: Value = serde_json::from_str(text).map_err(|e| vec![diag("$", format!("invalid JSON: {e}"))])?;
        let problems = validate(&doc);
        if !problems.is_empty() {
            return Err(problems);
        }
        serde_json::from_value(doc).map_err(|e| vec![diag("$", e.to_string())])
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn content_hash(&self) -> String {
        let canon = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canon).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Desk-scale defaults for an experiment, with trial counts that finish
    /// in minutes.
    pub fn preset(experiment: ExperimentId, seed: u64) -> Self {
        let pts = vec![10.0, 15.0, 20.0, 25.0, 30.0];
        let (p_t, p_p, trials) = match experiment {
            ExperimentId::PairingCompare => (vec![30.0], vec![20.0], 100),
            ExperimentId::SmseVsPt | ExperimentId::RelayRatioCurve => (pts, vec![13.0, 17.0], 1),
            ExperimentId::ConvergenceTrace => (vec![20.0], vec![17.0], 1),
            ExperimentId::SmseCdf => (vec![20.0], vec![17.0], 1000),
            ExperimentId::SerCurve => (vec![10.0 * 50f64.log10(), 20.0], vec![17.0], 1),
        };
        Self::new(experiment, seed, p_t, p_p, trials)
    }

    /// A config with the given id and grids and every other field at its
    /// default.
    pub fn new(experiment: ExperimentId, seed: u64, p_t_db: Vec<f64>, p_p_db: Vec<f64>, n_trials: usize) -> Self {
        Self {
            experiment,
            seed,
            p_t_db,
            p_p_db,
            n_trials,
            qam_order: default_qam(),
            n_frames: default_frames(),
            n_t: default_n_t(),
            pairing: PairingSetup::default(),
            design: DesignConfig::default(),
            gzf: GzfConfig::default(),
            output: None,
        }
    }
}
