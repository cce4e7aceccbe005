//! Experiment runner on top of `scc-core`: structured configs, append-only
//! JSON-lines results, and an aggregate report over the acceptance criteria.

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod records;
pub mod report;

pub use config::ExperimentConfig;
pub use error::LabError;
pub use records::ResultRecord;

use std::collections::BTreeMap;

/// Runs the configured experiment and packages the outcome as a record.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultRecord, LabError> {
    Ok(run_with_artifacts(cfg)?.0)
}

/// As [`run`], also returning the exported tables keyed by file name.
pub fn run_with_artifacts(cfg: &ExperimentConfig) -> Result<(ResultRecord, BTreeMap<String, String>), LabError> {
    cfg.validate()?;
    let mut outcome = experiments::execute(cfg)?;
    let artifacts = std::mem::take(&mut outcome.artifacts);
    Ok((ResultRecord::new(cfg, outcome)?, artifacts))
}
