//! File formats: group presentations from TOML, orbit and drift CSV,
//! trajectory JSON lines, walk summary CSV and witness graph JSON.

use crate::error::LabError;
use scc_core::fuchsian::{free_product, Arc, GroupPresentation, OrbitEnumeration};
use scc_core::hyperbolic::Isometry;
use scc_core::margulis::{DriftRegion, DriftReport};
use scc_core::walk::{ConcaveStats, Trajectory};
use scc_core::witness::{EdgeKind, Vertex, WitnessGraph};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

fn parse_err<T>(msg: impl Into<String>) -> Result<T, LabError> {
    Err(LabError::Parse(msg.into()))
}

/// A number given as a TOML integer, float, or a string holding a decimal
/// or an exact fraction `p/q`.
fn number(v: &toml::Value) -> Result<f64, LabError> {
    match v {
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::Float(f) => Ok(*f),
        toml::Value::String(s) => {
            let s = s.trim();
            if let Some((p, q)) = s.split_once('/') {
                let p: i64 = p.trim().parse().map_err(|_| LabError::Parse(format!("bad numerator in '{s}'")))?;
                let q: i64 = q.trim().parse().map_err(|_| LabError::Parse(format!("bad denominator in '{s}'")))?;
                if q == 0 {
                    return parse_err(format!("zero denominator in '{s}'"));
                }
                Ok(p as f64 / q as f64)
            } else {
                s.parse().map_err(|_| LabError::Parse(format!("not a number: '{s}'")))
            }
        }
        other => parse_err(format!("expected a number, got {other}")),
    }
}

fn field<'a>(t: &'a toml::Table, k: &str) -> Result<&'a toml::Value, LabError> {
    t.get(k).ok_or_else(|| LabError::Parse(format!("group: missing '{k}'")))
}

fn numbers(v: &toml::Value, n: usize) -> Result<Vec<f64>, LabError> {
    let a = v.as_array().ok_or_else(|| LabError::Parse("expected an array of numbers".into()))?;
    if a.len() != n {
        return parse_err(format!("expected {n} numbers, got {}", a.len()));
    }
    a.iter().map(number).collect()
}

/// Builds a presentation from a TOML table.
///
/// ```toml
/// kind = "schottky"          # trivial | modular | parabolic | hyperbolic-cyclic | schottky | free-product
/// pairs = [[["7/20", "0.7"], ["-0.7", "-7/20"]], [[1.5, 3], [-3, -1.5]]]
/// conjugate = ["2", "0", "0", "1/2"]   # optional, ping-pong kinds only
/// ```
///
/// `parabolic` takes `translation`, `hyperbolic-cyclic` takes `q`, and
/// `free-product` takes two sub-tables `left` and `right`.
pub fn group_from_table(t: &toml::Table) -> Result<GroupPresentation, LabError> {
    let kind = field(t, "kind")?.as_str().ok_or_else(|| LabError::Parse("group: 'kind' must be a string".into()))?;
    let g = match kind {
        "trivial" => GroupPresentation::trivial(),
        "modular" => GroupPresentation::modular(),
        "parabolic" => GroupPresentation::parabolic(number(field(t, "translation")?)?)?,
        "hyperbolic-cyclic" => GroupPresentation::hyperbolic_cyclic(number(field(t, "q")?)?)?,
        "schottky" => {
            let pairs = field(t, "pairs")?.as_array().ok_or_else(|| LabError::Parse("group: 'pairs' must be an array".into()))?;
            let mut arcs = Vec::with_capacity(pairs.len());
            for p in pairs {
                let p = p.as_array().filter(|p| p.len() == 2).ok_or_else(|| LabError::Parse("each pair holds two arcs".into()))?;
                let i = numbers(&p[0], 2)?;
                let j = numbers(&p[1], 2)?;
                arcs.push((Arc::new(i[0], i[1])?, Arc::new(j[0], j[1])?));
            }
            GroupPresentation::schottky(&arcs)?
        }
        "free-product" => {
            let sub = |k: &str| -> Result<GroupPresentation, LabError> {
                let v = field(t, k)?.as_table().ok_or_else(|| LabError::Parse(format!("group: '{k}' must be a table")))?;
                group_from_table(v)
            };
            free_product(&sub("left")?, &sub("right")?)?
        }
        other => return parse_err(format!("group: unknown kind '{other}'")),
    };
    match t.get("conjugate") {
        Some(m) => {
            let m = numbers(m, 4)?;
            Ok(g.conjugate(&Isometry::new(m[0], m[1], m[2], m[3])?)?)
        }
        None => Ok(g),
    }
}

pub fn group_from_toml(text: &str) -> Result<GroupPresentation, LabError> {
    let t: toml::Table = text.parse().map_err(|e| LabError::Parse(format!("group: {e}")))?;
    group_from_table(&t)
}

/// `word,x,y,distance` for every element within the enumeration radius,
/// nearest first.
pub fn orbit_csv(o: &OrbitEnumeration) -> String {
    let mut s = String::from("word,x,y,distance\n");
    for &i in &o.within {
        let r = &o.records[i as usize];
        let _ = writeln!(s, "{},{},{},{}", o.word_string(i as usize), r.point.x, r.point.y, r.distance);
    }
    s
}

fn region_name(r: DriftRegion) -> &'static str {
    match r {
        DriftRegion::R1 => "R1",
        DriftRegion::R2 => "R2",
        DriftRegion::R3 => "R3",
    }
}

/// `point,region,tau,c,b,f,average,se,holds`, one row per test point.
pub fn drift_csv(rep: &DriftReport) -> String {
    let mut s = String::from("point,region,tau,c,b,f,average,se,holds\n");
    for (i, p) in rep.points.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{},{},{},{},{},{},{}", region_name(p.region), p.tau, p.c, p.b, p.f, p.average, p.se, p.holds);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrajectoryLine {
    points: Vec<u32>,
    thin: Vec<bool>,
    distances: Vec<f64>,
}

/// One JSON object per line: net point ids, thin tags and step lengths.
pub fn trajectories_jsonl(ts: &[Trajectory]) -> String {
    let mut s = String::new();
    for t in ts {
        let line = TrajectoryLine { points: t.points.clone(), thin: t.thin.clone(), distances: t.distances.clone() };
        let _ = writeln!(s, "{}", serde_json::to_string(&line).expect("trajectory serialises"));
    }
    s
}

pub fn trajectories_from_jsonl(text: &str) -> Result<Vec<Trajectory>, LabError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            let t: TrajectoryLine = serde_json::from_str(l).map_err(|e| LabError::Parse(format!("trajectory line {}: {e}", i + 1)))?;
            if t.thin.len() != t.points.len() || t.distances.len() + 1 != t.points.len().max(1) {
                return parse_err(format!("trajectory line {}: inconsistent lengths", i + 1));
            }
            Ok(Trajectory { points: t.points, distances: t.distances, thin: t.thin })
        })
        .collect()
}

/// `n,hits,fraction,se` for each walk length.
pub fn walk_summary_csv(st: &ConcaveStats) -> String {
    let mut s = String::from("n,hits,fraction,se\n");
    for (k, n) in st.ns.iter().enumerate() {
        let _ = writeln!(s, "{n},{},{},{}", st.hits[k], st.fractions[k], st.se[k]);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexJson {
    pub label: String,
    pub h: f64,
    #[serde(default)]
    pub s: u64,
    #[serde(default = "yes")]
    pub witness: bool,
    #[serde(default)]
    pub closure: Option<usize>,
    #[serde(default = "default_n_v")]
    pub n_v: f64,
    #[serde(default = "one")]
    pub k_v: f64,
}

fn yes() -> bool {
    true
}

fn default_n_v() -> f64 {
    100.0
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: usize,
    pub to: usize,
    /// `SW`, `SE` or `P`.
    pub kind: String,
}

/// Witness graph on disk: labelled vertices, typed edges, nesting pairs
/// `(inner, outer)` and transverse pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<VertexJson>,
    #[serde(default)]
    pub edges: Vec<EdgeJson>,
    #[serde(default)]
    pub nesting: Vec<(usize, usize)>,
    #[serde(default)]
    pub transverse: Vec<(usize, usize)>,
    #[serde(default = "one")]
    pub c: f64,
}

impl GraphJson {
    pub fn from_graph(g: &WitnessGraph, labels: &[String]) -> GraphJson {
        GraphJson {
            vertices: g
                .vertices
                .iter()
                .enumerate()
                .map(|(i, v)| VertexJson {
                    label: labels.get(i).cloned().unwrap_or_else(|| format!("v{i}")),
                    h: v.h,
                    s: v.s,
                    witness: v.witness,
                    closure: v.closure,
                    n_v: v.n_v,
                    k_v: v.k_v,
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|&(a, b, k)| EdgeJson { from: a, to: b, kind: format!("{k:?}") })
                .collect(),
            nesting: g.nesting.clone(),
            transverse: g.transverse.clone(),
            c: g.c,
        }
    }

    /// Converts and validates.
    pub fn to_graph(&self) -> Result<WitnessGraph, LabError> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex { h: v.h, s: v.s, witness: v.witness, closure: v.closure, n_v: v.n_v, k_v: v.k_v })
            .collect();
        let mut g = WitnessGraph::new(vertices);
        for e in &self.edges {
            let kind = match e.kind.as_str() {
                "SW" => EdgeKind::SW,
                "SE" => EdgeKind::SE,
                "P" => EdgeKind::P,
                other => return parse_err(format!("unknown edge kind '{other}'")),
            };
            g.edges.push((e.from, e.to, kind));
        }
        g.nesting = self.nesting.clone();
        g.transverse = self.transverse.clone();
        g.c = self.c;
        g.validate()?;
        Ok(g)
    }

    pub fn labels(&self) -> Vec<String> {
        self.vertices.iter().map(|v| v.label.clone()).collect()
    }
}

pub fn graph_to_json(g: &WitnessGraph, labels: &[String]) -> String {
    serde_json::to_string_pretty(&GraphJson::from_graph(g, labels)).expect("graph serialises")
}

pub fn graph_from_json(text: &str) -> Result<(WitnessGraph, Vec<String>), LabError> {
    let j: GraphJson = serde_json::from_str(text).map_err(|e| LabError::Parse(format!("witness graph: {e}")))?;
    Ok((j.to_graph()?, j.labels()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_accept_fractions_and_decimals() {
        assert_eq!(number(&toml::Value::String("7/20".into())).unwrap(), 0.35);
        assert_eq!(number(&toml::Value::String(" -3/2 ".into())).unwrap(), -1.5);
        assert_eq!(number(&toml::Value::String("0.25".into())).unwrap(), 0.25);
        assert_eq!(number(&toml::Value::Integer(3)).unwrap(), 3.0);
        assert!(number(&toml::Value::String("1/0".into())).is_err());
        assert!(number(&toml::Value::Boolean(true)).is_err());
    }
}
