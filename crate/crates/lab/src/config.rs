//! Experiment configuration: per-experiment defaults, TOML overrides and
//! validation.
//!
//! A config file is a flat TOML table whose keys are the field names of
//! [`ExperimentConfig`]; any key left out keeps the experiment's default.
//!
//! ```toml
//! experiment = "lattice-count"
//! seed = 7
//! radii = [6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0]
//! ```

use crate::error::{usage, LabError};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const EXPERIMENTS: &[&str] = &[
    "lattice-count",
    "horoball-exponent",
    "drift",
    "walk",
    "weak-convexity",
    "projection-contrast",
    "witness-count",
    "linear-gap",
    "free-product",
    "volume-bounds",
    "rafi-check",
    "entropy-compare",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    /// Seed of the greedy net, where the experiment builds one.
    pub net_seed: u64,
    pub workers: usize,
    /// Systole threshold of the model space.
    pub eps_t: f64,
    /// Thin-part threshold.
    pub eps: f64,
    /// Net separation.
    pub eps_n: f64,
    /// Good/bad threshold, or the bad fraction of synthetic segments.
    pub eps_b: f64,
    /// Walk step or drift ball radius.
    pub tau: f64,
    /// Radii (or budgets) at which counts are taken.
    pub radii: Vec<f64>,
    /// Step sizes for decay fits.
    pub taus: Vec<f64>,
    /// Monte Carlo samples or trajectories.
    pub samples: usize,
    /// Secondary sample count (decay fit, coth draws).
    pub aux_samples: usize,
    /// Test points, segments, graphs or instances.
    pub points: usize,
    /// Period of the cusp strip in the walk experiment.
    pub period: f64,
    /// Results file; not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

fn range(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(f64::from).collect()
}

impl ExperimentConfig {
    /// Default configuration of a named experiment.
    pub fn defaults(experiment: &str) -> Result<ExperimentConfig, LabError> {
        let mut c = ExperimentConfig {
            experiment: experiment.to_string(),
            seed: 1,
            net_seed: 1,
            workers: 4,
            eps_t: 0.1,
            eps: 0.5,
            eps_n: 1.0,
            eps_b: 0.2,
            tau: 3.0,
            radii: range(6, 12),
            taus: range(2, 6),
            samples: 1000,
            aux_samples: 1000,
            points: 1000,
            period: 2.0e4,
            out: None,
        };
        match experiment {
            "lattice-count" => c.workers = 1,
            "horoball-exponent" => {
                c.radii = range(6, 20);
                c.net_seed = 5;
            }
            "drift" => {
                c.eps = 0.3;
                c.samples = 4000;
                c.aux_samples = 200_000;
                c.points = 120;
                c.seed = 9;
            }
            "walk" => {
                c.tau = 5.0;
                c.eps = 0.2;
                c.samples = 1_000_000;
                c.seed = 11;
                c.net_seed = 3;
                c.workers = 8;
            }
            "weak-convexity" => c.seed = 6,
            "projection-contrast" => {
                c.radii = vec![4.0, 6.0, 8.0];
                c.points = 100;
                c.samples = 2000;
            }
            "witness-count" => {
                c.radii = (1..=8).map(|k| 10.0 * f64::from(k)).collect();
                c.seed = 12;
            }
            "linear-gap" => c.seed = 13,
            "free-product" => c.radii = range(1, 18),
            "volume-bounds" => {
                c.radii = vec![1.0];
                c.points = 50;
                c.samples = 20_000;
                c.aux_samples = 10_000;
                c.seed = 9;
            }
            "rafi-check" => c.seed = 2,
            "entropy-compare" => {
                c.radii = range(5, 10);
                c.net_seed = 7;
            }
            other => return usage(format!("unknown experiment '{other}'; known: {}", EXPERIMENTS.join(", "))),
        }
        Ok(c)
    }

    /// Defaults of the experiment named in (or passed alongside) the TOML
    /// text, overridden by every key the text sets.
    pub fn from_toml(text: &str, experiment: Option<&str>) -> Result<ExperimentConfig, LabError> {
        let table: toml::Table = text.parse().map_err(|e| LabError::Parse(format!("config: {e}")))?;
        let name = match (experiment, table.get("experiment")) {
            (Some(n), Some(toml::Value::String(m))) if n != m => {
                return usage(format!("--experiment {n} conflicts with config experiment '{m}'"))
            }
            (Some(n), _) => n.to_string(),
            (None, Some(toml::Value::String(m))) => m.clone(),
            (None, Some(_)) => return usage("config key 'experiment' must be a string"),
            (None, None) => return usage("no experiment named in config or on the command line"),
        };
        let base = Self::defaults(&name)?;
        let mut merged = toml::Table::try_from(&base).map_err(|e| LabError::Parse(e.to_string()))?;
        for (k, v) in table {
            if k != "out" && !merged.contains_key(&k) {
                return usage(format!("unknown config key '{k}'"));
            }
            merged.insert(k, v);
        }
        let cfg: ExperimentConfig = toml::Value::Table(merged).try_into().map_err(|e| LabError::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, experiment: Option<&str>) -> Result<ExperimentConfig, LabError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text, experiment)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return usage(format!("unknown experiment '{}'", self.experiment));
        }
        for (name, v) in [("eps_t", self.eps_t), ("eps", self.eps), ("eps_n", self.eps_n), ("eps_b", self.eps_b), ("tau", self.tau), ("period", self.period)] {
            if !(v > 0.0 && v.is_finite()) {
                return usage(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.eps_b > 1.0 {
            return usage("eps_b must not exceed 1");
        }
        for (name, xs) in [("radii", &self.radii), ("taus", &self.taus)] {
            if xs.is_empty() || xs.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                return usage(format!("{name} must be a non-empty list of positive numbers"));
            }
            if xs.windows(2).any(|w| w[1] <= w[0]) {
                return usage(format!("{name} must be strictly increasing"));
            }
        }
        if self.workers == 0 || self.samples == 0 || self.aux_samples == 0 || self.points == 0 {
            return usage("workers, samples, aux_samples and points must be at least 1");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form (sorted keys, `out` dropped).
    pub fn hash(&self) -> String {
        let v = serde_json::to_value(self).expect("config serialises");
        hash_value(&v)
    }
}

fn canonical(v: &serde_json::Value) -> String {
    use serde_json::Value;
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            let body: Vec<String> = keys
                .into_iter()
                .map(|k| format!("{}:{}", Value::String(k.clone()), canonical(&m[k])))
                .collect();
            format!("{{{}}}", body.join(","))
        }
        Value::Array(a) => format!("[{}]", a.iter().map(canonical).collect::<Vec<_>>().join(",")),
        other => other.to_string(),
    }
}

/// Hash of a stored config value; key order and the `out` field are
/// ignored.
pub fn hash_value(v: &serde_json::Value) -> String {
    use sha2::{Digest, Sha256};
    let mut v = v.clone();
    if let Some(m) = v.as_object_mut() {
        m.remove("out");
    }
    let digest = Sha256::digest(canonical(&v).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_experiment_has_valid_defaults() {
        for e in EXPERIMENTS {
            ExperimentConfig::defaults(e).unwrap().validate().unwrap();
        }
        assert!(ExperimentConfig::defaults("nope").is_err());
    }

    #[test]
    fn hash_ignores_key_order_and_out() {
        let a = ExperimentConfig::from_toml("experiment = \"drift\"\nseed = 3\ntau = 2.5\n", None).unwrap();
        let mut b = ExperimentConfig::from_toml("tau = 2.5\nseed = 3\nexperiment = \"drift\"\n", None).unwrap();
        assert_eq!(a.hash(), b.hash());
        b.out = Some("elsewhere.jsonl".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 4;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml("experiment = \"drift\"\nradii = [3.0, 2.0]\n", None).is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"drift\"\neps = -1.0\n", None).is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"drift\"\nbogus = 1\n", None).is_err());
        assert!(ExperimentConfig::from_toml("seed = 1\n", None).is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"drift\"\n", Some("walk")).is_err());
        assert_eq!(ExperimentConfig::from_toml("", Some("walk")).unwrap(), ExperimentConfig::defaults("walk").unwrap());
    }
}
