//! Aggregate report over a results file: per-criterion status, hash
//! audit, cross-experiment checks, markdown summary and CSV plot data.

use crate::records::{Loaded, ResultRecord};
use std::fmt::Write;

pub struct Criterion {
    pub id: &'static str,
    pub experiment: &'static str,
    pub summary: &'static str,
}

pub const CRITERIA: &[Criterion] = &[
    Criterion { id: "C1", experiment: "lattice-count", summary: "PSL(2,Z) orbit exponent over R in [6,12] within [0.85, 1.15], under 60 s" },
    Criterion { id: "C2", experiment: "horoball-exponent", summary: "net exponent in {y > 1} over R in [6,20] within [0.4, 0.6]; rectangle volume matches quadrature to 1e-8" },
    Criterion { id: "C3", experiment: "lattice-count", summary: "concave exponent at least 0.2 below the orbit exponent" },
    Criterion { id: "C4", experiment: "drift", summary: "drift inequality on 100+ points across R1/R2/R3 with no 3-sigma violations; decay exponent of c(tau) <= -0.4" },
    Criterion { id: "C5", experiment: "walk", summary: "concave walk fraction at tau = 5 decays with per-step exponent <= -0.5, 1e5+ trajectories, under 5 min" },
    Criterion { id: "C6", experiment: "weak-convexity", summary: "1000 homotoped segments stay in the systole set with ratio <= 1.05; pure line ratio <= 1" },
    Criterion { id: "C7", experiment: "projection-contrast", summary: "axis projections of 100 disjoint balls <= 5 and oracle-checked; twist diameters >= 1.5R and d(8) > d(4) + 2" },
    Criterion { id: "C8", experiment: "witness-count", summary: "type count log-log slope <= 3|H|; exact count bound holds on 1000 graphs" },
    Criterion { id: "C9", experiment: "linear-gap", summary: "achieved gap equals eps_b (1 - h_sub/h) within 1e-9 on 1000 segment lists" },
    Criterion { id: "C10", experiment: "free-product", summary: "free product exponent exceeds the larger factor by 0.1; partial sums above the geometric lower bound" },
    Criterion { id: "C11", experiment: "volume-bounds", summary: "ball volumes at R = 1 over 50 centres within a factor 10; coth sandwich on 1e4 samples" },
    Criterion { id: "C12", experiment: "rafi-check", summary: "distance formula equals the sup metric on Gamma-only instances and is monotone in every term" },
    Criterion { id: "E1", experiment: "entropy-compare", summary: "h_LP <= h_NP + 0.05" },
    Criterion { id: "E2", experiment: "entropy-compare", summary: "bad-point fraction decreasing in R" },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotRun,
    /// The latest record's hash does not match its config.
    Inconsistent,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotRun => "NOT RUN",
            Status::Inconsistent => "INCONSISTENT",
        }
    }

    fn of(pass: bool) -> Status {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: String,
    pub experiment: String,
    pub summary: String,
    pub status: Status,
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
    pub cross: Vec<CrossCheck>,
    /// `(line, experiment, stored hash)` of every record whose hash fails
    /// to match its config.
    pub inconsistent: Vec<(usize, String, String)>,
    pub malformed: Vec<(usize, String)>,
    /// Latest consistent record per experiment, in criterion order.
    pub latest: Vec<ResultRecord>,
}

impl Report {
    /// True when nothing executed failed and the file is clean.
    pub fn all_pass(&self) -> bool {
        self.inconsistent.is_empty()
            && self.malformed.is_empty()
            && self.rows.iter().all(|r| matches!(r.status, Status::Pass | Status::NotRun))
            && self.cross.iter().all(|c| matches!(c.status, Status::Pass | Status::NotRun))
    }

    pub fn markdown(&self) -> String {
        let mut s = String::from("# Experiment report\n\n## Criteria\n\n| id | experiment | status | criterion |\n|---|---|---|---|\n");
        for r in &self.rows {
            let _ = writeln!(s, "| {} | {} | {} | {} |", r.id, r.experiment, r.status.label(), r.summary);
        }
        s.push_str("\n## Cross-experiment checks\n\n| check | status | detail |\n|---|---|---|\n");
        for c in &self.cross {
            let _ = writeln!(s, "| {} | {} | {} |", c.name, c.status.label(), c.detail);
        }
        if !self.inconsistent.is_empty() || !self.malformed.is_empty() {
            s.push_str("\n## Integrity problems\n\n");
            for (line, e, h) in &self.inconsistent {
                let _ = writeln!(s, "- line {line}: `{e}` record hash {h} does not match its config");
            }
            for (line, err) in &self.malformed {
                let _ = writeln!(s, "- line {line}: unreadable record ({err})");
            }
        }
        let missing: Vec<&str> = self.rows.iter().filter(|r| r.status == Status::NotRun).map(|r| r.id.as_str()).collect();
        if !missing.is_empty() {
            let _ = writeln!(s, "\n## Gaps\n\nNot run: {}", missing.join(", "));
        }
        s.push_str("\n## Metrics\n");
        for rec in &self.latest {
            let _ = writeln!(s, "\n### {} (config {}, seed {}, workers {})\n", rec.experiment, &rec.config_hash[..12.min(rec.config_hash.len())], rec.seed, rec.workers);
            for (k, v) in &rec.metrics {
                let _ = writeln!(s, "- {k}: {v}");
            }
        }
        let _ = writeln!(s, "\nOverall: {}", if self.all_pass() { "PASS" } else { "FAIL" });
        s
    }

    /// Long-format plot data: `experiment,config_hash,series,index,value`.
    pub fn csv(&self) -> String {
        let mut s = String::from("experiment,config_hash,series,index,value\n");
        for rec in &self.latest {
            for (name, col) in &rec.series {
                for (i, v) in col.iter().enumerate() {
                    let _ = writeln!(s, "{},{},{},{},{}", rec.experiment, rec.config_hash, name, i, v);
                }
            }
        }
        s
    }
}

fn metric(rec: Option<&ResultRecord>, k: &str) -> Option<f64> {
    rec.and_then(|r| r.metrics.get(k).copied())
}

pub fn build(loaded: &Loaded) -> Report {
    let mut inconsistent = Vec::new();
    let mut latest: Vec<ResultRecord> = Vec::new();
    let mut tainted: Vec<String> = Vec::new();
    for (i, rec) in loaded.records.iter().enumerate() {
        if !rec.hash_consistent() {
            inconsistent.push((i + 1, rec.experiment.clone(), rec.config_hash.clone()));
            tainted.retain(|e| e != &rec.experiment);
            tainted.push(rec.experiment.clone());
            latest.retain(|r| r.experiment != rec.experiment);
            continue;
        }
        tainted.retain(|e| e != &rec.experiment);
        latest.retain(|r| r.experiment != rec.experiment);
        latest.push(rec.clone());
    }
    let find = |e: &str| latest.iter().find(|r| r.experiment == e);
    let rows = CRITERIA
        .iter()
        .map(|c| {
            let rec = find(c.experiment);
            let status = if tainted.iter().any(|t| t == c.experiment) {
                Status::Inconsistent
            } else {
                match rec.and_then(|r| r.criteria.get(c.id)) {
                    Some(&p) => Status::of(p),
                    None => Status::NotRun,
                }
            };
            Row { id: c.id.into(), experiment: c.experiment.into(), summary: c.summary.into(), status, config_hash: rec.map(|r| r.config_hash.clone()) }
        })
        .collect();

    let lattice = find("lattice-count");
    let entropy = find("entropy-compare");
    let mut cross = Vec::new();
    cross.push(match (metric(lattice, "h_concave"), metric(lattice, "h_lattice")) {
        (Some(hc), Some(h)) => CrossCheck { name: "concave exponent below lattice exponent".into(), status: Status::of(hc < h), detail: format!("{hc:.4} vs {h:.4}") },
        _ => CrossCheck { name: "concave exponent below lattice exponent".into(), status: Status::NotRun, detail: "needs lattice-count".into() },
    });
    let bad = entropy.and_then(|r| r.series.get("bad_fraction"));
    cross.push(match bad {
        Some(b) if b.len() >= 2 => CrossCheck {
            name: "bad-point fraction decreasing in R".into(),
            status: Status::of(b.windows(2).all(|w| w[1] < w[0])),
            detail: format!("{b:?}"),
        },
        _ => CrossCheck { name: "bad-point fraction decreasing in R".into(), status: Status::NotRun, detail: "needs entropy-compare".into() },
    });
    cross.push(match (metric(lattice, "h_concave"), metric(entropy, "h_lp"), metric(entropy, "h_np")) {
        (Some(hc), Some(hl), Some(hn)) => CrossCheck {
            name: "entropy chain h_LPbar < h_LP <= h_NP".into(),
            status: Status::of(hc < hl && hl <= hn + 0.05),
            detail: format!("h_LPbar {hc:.4}, h_NP - 1 {:.4}, h_LP {hl:.4}, h_NP {hn:.4}", hn - 1.0),
        },
        _ => CrossCheck { name: "entropy chain h_LPbar < h_LP <= h_NP".into(), status: Status::NotRun, detail: "needs lattice-count and entropy-compare".into() },
    });
    latest.sort_by_key(|r| CRITERIA.iter().position(|c| c.experiment == r.experiment).unwrap_or(usize::MAX));
    Report { rows, cross, inconsistent, malformed: loaded.malformed.clone(), latest }
}
