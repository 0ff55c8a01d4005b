//! Result tables and their CSV and metadata files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Leading columns carried by every row.
pub const PROVENANCE: [&str; 4] = ["p_t_db", "p_p_db", "seed", "trial"];

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub seed: u64,
    pub config_hash: String,
}

/// Shortest round-trip decimal; empty for a missing value.
pub fn num(x: f64) -> String {
    if x.is_nan() { String::new() } else { format!("{x}") }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

#[derive(Serialize)]
struct Meta<'a> {
    experiment: &'a str,
    seed: u64,
    config_hash: &'a str,
    rows: usize,
    generated_unix: u64,
    version: &'a str,
}

impl ResultTable {
    pub fn new(experiment: impl Into<String>, extra: &[&str], seed: u64, config_hash: String) -> Self {
        let columns = PROVENANCE.iter().chain(extra).map(|s| s.to_string()).collect();
        Self { experiment: experiment.into(), columns, rows: Vec::new(), seed, config_hash }
    }

    /// Appends a row given its provenance and the remaining cells.
    pub fn push(&mut self, p_t_db: f64, p_p_db: f64, trial: impl ToString, cells: Vec<String>) {
        let mut row = vec![num(p_t_db), num(p_p_db), self.seed.to_string(), trial.to_string()];
        row.extend(cells);
        assert_eq!(row.len(), self.columns.len(), "row width must match the schema");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column over rows accepted by `keep`.
    pub fn values(&self, name: &str, keep: impl Fn(&[String]) -> bool) -> Vec<f64> {
        let Some(k) = self.column(name) else { return Vec::new() };
        self.rows.iter().filter(|r| keep(r)).filter_map(|r| r[k].parse().ok()).collect()
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    /// Writes `<dir>/<experiment>.csv` and a `.meta.json` sidecar holding
    /// the timestamp, so the CSV itself depends only on the config.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        std::fs::write(&csv_path, self.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", csv_path.display())))?;
        let meta = Meta {
            experiment: &self.experiment,
            seed: self.seed,
            config_hash: &self.config_hash,
            rows: self.rows.len(),
            generated_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            version: env!("CARGO_PKG_VERSION"),
        };
        let meta_path = dir.join(format!("{}.meta.json", self.experiment));
        let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        std::fs::write(&meta_path, text).map_err(|e| Error::Io(format!("{}: {e}", meta_path.display())))?;
        Ok(csv_path)
    }
}
