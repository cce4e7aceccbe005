//! Result records and the append-only JSON-lines store.

use crate::config::{hash_value, ExperimentConfig};
use crate::error::LabError;
use crate::experiments::Outcome;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub config_hash: String,
    /// The config as run, kept verbatim so the hash can be re-checked.
    pub config: serde_json::Value,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub seed: u64,
    pub workers: usize,
    pub metrics: BTreeMap<String, f64>,
    /// Plot data, one named column per entry.
    pub series: BTreeMap<String, Vec<f64>>,
    /// Pass/fail per acceptance criterion id.
    pub criteria: BTreeMap<String, bool>,
    /// Wall-clock seconds per timed phase; not part of the metrics.
    pub timings: BTreeMap<String, f64>,
}

impl ResultRecord {
    pub fn new(cfg: &ExperimentConfig, outcome: Outcome) -> Result<ResultRecord, LabError> {
        let config = serde_json::to_value(cfg).map_err(|e| LabError::Parse(e.to_string()))?;
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Ok(ResultRecord {
            experiment: cfg.experiment.clone(),
            config_hash: cfg.hash(),
            config,
            timestamp,
            seed: cfg.seed,
            workers: cfg.workers,
            metrics: outcome.metrics,
            series: outcome.series,
            criteria: outcome.criteria,
            timings: outcome.timings,
        })
    }

    /// Whether the stored hash matches the stored config.
    pub fn hash_consistent(&self) -> bool {
        hash_value(&self.config) == self.config_hash
    }

    pub fn passed(&self) -> bool {
        self.criteria.values().all(|&p| p)
    }
}

/// Appends one record as a single JSON line; never rewrites the file.
pub fn append(path: &Path, record: &ResultRecord) -> Result<(), LabError> {
    let line = serde_json::to_string(record).map_err(|e| LabError::Parse(e.to_string()))?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{line}")?;
    Ok(())
}

/// A results file split into parsed records and unparseable lines.
#[derive(Debug, Default)]
pub struct Loaded {
    pub records: Vec<ResultRecord>,
    /// `(line number, parse error)`.
    pub malformed: Vec<(usize, String)>,
}

/// Reads every record; a missing file reads as empty.
pub fn load(path: &Path) -> Result<Loaded, LabError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Loaded::default()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Loaded::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ResultRecord>(line) {
            Ok(r) => out.records.push(r),
            Err(e) => out.malformed.push((i + 1, e.to_string())),
        }
    }
    Ok(out)
}
