//! Acceptance gate: runs every experiment at its default configuration and
//! prints one PASS/FAIL line per criterion. Runs without the test harness
//! so the lines always reach the output; exits nonzero on any failure.

use scc_lab::config::{ExperimentConfig, EXPERIMENTS};
use scc_lab::report::CRITERIA;
use std::collections::BTreeMap;

fn main() {
    let mut status: BTreeMap<&str, bool> = BTreeMap::new();
    let mut details: BTreeMap<&str, String> = BTreeMap::new();
    for e in EXPERIMENTS {
        let cfg = ExperimentConfig::defaults(e).unwrap();
        let rec = scc_lab::run(&cfg).unwrap_or_else(|err| panic!("{e}: {err}"));
        for c in CRITERIA.iter().filter(|c| c.experiment == *e) {
            let pass = rec.criteria.get(c.id).copied().unwrap_or(false);
            status.insert(c.id, pass);
            let m: Vec<String> = rec.metrics.iter().map(|(k, v)| format!("{k}={v:.6}")).collect();
            details.insert(c.id, m.join(" "));
        }
    }
    let mut failed = Vec::new();
    for k in 1..=12 {
        let id = format!("C{k}");
        let c = CRITERIA.iter().find(|c| c.id == id).unwrap();
        let pass = status.get(c.id).copied().unwrap_or(false);
        println!("criterion {k:>2} [{}]: {} -- {}", c.experiment, if pass { "PASS" } else { "FAIL" }, c.summary);
        println!("    {}", details.get(c.id).map_or("", |s| s.as_str()));
        if !pass {
            failed.push(id);
        }
    }
    for id in ["E1", "E2"] {
        let c = CRITERIA.iter().find(|c| c.id == id).unwrap();
        println!("supplementary {id}: {} -- {}", if status[id] { "PASS" } else { "FAIL" }, c.summary);
    }
    if !(status["E1"] && status["E2"]) {
        failed.push("E1/E2".into());
    }
    if failed.is_empty() {
        println!("acceptance: all 12 criteria PASS");
    } else {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
