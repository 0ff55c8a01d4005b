//! Pinned regression values derived from the fixed reference channels.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{paper_channels, pu_covariance};
use crate::error::{Error, Result};
use crate::pairing::relay_ratio_approx;
use crate::transceiver::{db_to_linear, joint_design, DesignConfig, DesignProblem};

pub const FIXTURE_NAMES: [&str; 2] = ["reference_relay_ratio", "reference_smse"];

/// `(P_P dB, P_T dB)` points of the SMSE fixture.
pub const SMSE_POINTS: [(f64, f64); 2] = [(17.0, 20.0), (13.0, 10.0)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    /// Relative tolerance used when checking for drift.
    pub rel_tol: f64,
    pub values: BTreeMap<String, f64>,
}

/// Recomputes a named fixture. `design` only affects `reference_smse`.
pub fn compute_fixture(name: &str, design: &DesignConfig) -> Result<Fixture> {
    let mut values = BTreeMap::new();
    let rel_tol = match name {
        "reference_relay_ratio" => {
            let ch = paper_channels();
            let sigma = pu_covariance(&ch.h14, 10f64.powf(1.7))?;
            values.insert("alpha_a".into(), relay_ratio_approx(&ch.h14, &ch.h24, &sigma, 100.0, None)?);
            1e-9
        }
        "reference_smse" => {
            for (pp, pt) in SMSE_POINTS {
                let p = DesignProblem::new(paper_channels(), db_to_linear(pp), db_to_linear(pt))?
                    .with_config(design.clone());
                let out = joint_design(&p)?;
                values.insert(format!("smse_pp{pp}_pt{pt}"), out.smse);
                values.insert(format!("gap_pp{pp}_pt{pt}"), out.gap);
            }
            1e-6
        }
        other => return Err(Error::InvalidArgument(format!("unknown fixture `{other}`"))),
    };
    Ok(Fixture { name: name.into(), rel_tol, values })
}

pub fn fixture_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.json"))
}

/// Computes a fixture with default settings and writes it under `dir`.
pub fn pin_fixture(name: &str, dir: &Path) -> Result<Fixture> {
    let fx = compute_fixture(name, &DesignConfig::default())?;
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(e.to_string()))?;
    let text = serde_json::to_string_pretty(&fx).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(fixture_path(dir, name), text + "\n").map_err(|e| Error::Io(e.to_string()))?;
    Ok(fx)
}

pub fn load_fixture(name: &str, dir: &Path) -> Result<Fixture> {
    let text = std::fs::read_to_string(fixture_path(dir, name)).map_err(|e| Error::Io(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| Error::Io(e.to_string()))
}

/// Keys whose fresh value differs from the pinned one by more than the
/// pinned tolerance. Keys present on only one side also count. The gap
/// keys sit near zero, so they are compared against an absolute floor of
/// `rel_tol` as well.
pub fn fixture_drift(pinned: &Fixture, fresh: &Fixture) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for (k, &v) in &pinned.values {
        match fresh.values.get(k) {
            Some(&w) if (v - w).abs() <= pinned.rel_tol * v.abs().max(1.0) => {}
            _ => out.push(k.clone()),
        }
    }
    out.extend(fresh.values.keys().filter(|k| !pinned.values.contains_key(*k)).cloned());
    out
}
