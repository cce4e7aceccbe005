use super::group::{canonical_int, GroupKind, GroupPresentation};
use crate::error::{invalid, Error, Result};
use crate::hyperbolic::{distance, Isometry, Point};
use crate::math;
use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use hashbrown::{HashMap, HashSet};

/// Group element, exact for integral presentations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    Int([i64; 4]),
    Real(Isometry),
}

impl Element {
    pub fn iso(&self) -> Isometry {
        match self {
            Element::Int(m) => Isometry { a: m[0] as f64, b: m[1] as f64, c: m[2] as f64, d: m[3] as f64 },
            Element::Real(g) => *g,
        }
    }

    fn mul(&self, o: &Element) -> Result<Element> {
        match (self, o) {
            (Element::Int(a), Element::Int(b)) => {
                let m = |x: i64, y: i64, z: i64, w: i64| -> Option<i64> { x.checked_mul(y)?.checked_add(z.checked_mul(w)?) };
                let r = (|| {
                    Some([
                        m(a[0], b[0], a[1], b[2])?,
                        m(a[0], b[1], a[1], b[3])?,
                        m(a[2], b[0], a[3], b[2])?,
                        m(a[2], b[1], a[3], b[3])?,
                    ])
                })();
                match r {
                    Some(r) => Ok(Element::Int(canonical_int(r))),
                    None => Err(Error::ResourceLimit { what: "integer overflow".into(), completed_radius: 0.0 }),
                }
            }
            _ => Ok(Element::Real(self.iso().compose(&o.iso()))),
        }
    }
}

/// One enumerated element: the word is recovered through `parent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitRecord {
    pub parent: u32,
    pub letter: u16,
    pub element: Element,
    pub point: Point,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitConfig {
    pub radius: f64,
    /// Words are pruned once their point leaves `radius + margin`; defaults
    /// to the largest generator displacement.
    pub margin: Option<f64>,
    pub max_elements: usize,
    /// Two real elements are merged when they move `p` and an auxiliary
    /// point to within this distance of each other.
    pub merge_tolerance: f64,
}

impl OrbitConfig {
    pub fn new(radius: f64) -> OrbitConfig {
        OrbitConfig { radius, margin: None, max_elements: 20_000_000, merge_tolerance: 1e-7 }
    }
}

/// Elements `γ` with `d(p, γp) ≤ R`, plus the shell used to reach them.
#[derive(Debug, Clone)]
pub struct OrbitEnumeration {
    pub base: Point,
    pub radius: f64,
    pub letters: Vec<String>,
    /// Every stored element; those beyond `radius` are path intermediates.
    pub records: Vec<OrbitRecord>,
    /// Indices of records within `radius`, sorted by distance.
    pub within: Vec<u32>,
}

impl OrbitEnumeration {
    pub fn word(&self, idx: usize) -> Vec<u16> {
        let mut w = Vec::new();
        let mut i = idx;
        while self.records[i].parent != u32::MAX {
            w.push(self.records[i].letter);
            i = self.records[i].parent as usize;
        }
        w.reverse();
        w
    }

    pub fn word_string(&self, idx: usize) -> String {
        let w = self.word(idx);
        if w.is_empty() {
            return String::from("1");
        }
        let parts: Vec<&str> = w.iter().map(|&l| self.letters[l as usize].as_str()).collect();
        parts.join(".")
    }

    /// `N_p(r)` for `r ≤ radius`.
    pub fn count_within(&self, r: f64) -> usize {
        self.within.partition_point(|&i| self.records[i as usize].distance <= r)
    }

    pub fn distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.within.iter().map(move |&i| self.records[i as usize].distance)
    }

    pub fn len(&self) -> usize {
        self.within.len()
    }

    pub fn is_empty(&self) -> bool {
        self.within.is_empty()
    }
}

#[derive(PartialEq)]
struct Item(f64, u32);
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

/// Hash of element images of two reference points, at a cell size far above
/// the merge tolerance; neighbours are checked exhaustively.
struct RealIndex {
    aux: Point,
    cells: HashMap<(i64, i64), Vec<u32>>,
    tol: f64,
}

const CELL: f64 = 1e-3;

impl RealIndex {
    fn key(p: &Point) -> (i64, i64) {
        (math::floor(math::ln(p.y) / CELL) as i64, math::floor(p.x / (p.y * CELL)) as i64)
    }

    fn find(&self, recs: &[OrbitRecord], g: &Isometry, gp: &Point) -> Result<Option<u32>> {
        let (r, c) = Self::key(gp);
        let ga = g.apply(&self.aux)?;
        for dr in -1..=1 {
            for dc in -1..=1 {
                if let Some(v) = self.cells.get(&(r + dr, c + dc)) {
                    for &i in v {
                        let rec = &recs[i as usize];
                        if distance(&rec.point, gp) < self.tol
                            && distance(&rec.element.iso().apply(&self.aux)?, &ga) < self.tol
                        {
                            return Ok(Some(i));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    fn insert(&mut self, gp: &Point, i: u32) {
        self.cells.entry(Self::key(gp)).or_default().push(i);
    }
}

/// Best-first enumeration of `{γ : d(p, γp) ≤ R}` over words in the
/// generators and their inverses.
pub fn enumerate_orbit(group: &GroupPresentation, p: &Point, cfg: &OrbitConfig) -> Result<OrbitEnumeration> {
    if !(cfg.radius >= 0.0) || !cfg.radius.is_finite() {
        return invalid("orbit radius must be finite and non-negative");
    }
    group.certify()?;
    let gens = group.symmetric_generators();
    let letters: Vec<String> = gens.iter().map(|g| g.name.clone()).collect();
    let integral = group.is_integral();
    let gen_elems: Vec<Element> = gens
        .iter()
        .map(|g| if integral { Element::Int(g.int.unwrap()) } else { Element::Real(g.iso) })
        .collect();
    let mut max_disp: f64 = 0.0;
    for g in &gens {
        max_disp = max_disp.max(g.iso.displacement(p)?);
    }
    let margin = cfg.margin.unwrap_or(max_disp);
    // Free presentations: reduced words are distinct elements, so no
    // floating-point merging is needed.
    let free = matches!(
        group.kind,
        GroupKind::Schottky | GroupKind::FreeProduct | GroupKind::HyperbolicCyclic | GroupKind::ParabolicCyclic { .. }
    ) && !integral;
    let ng = group.generators.len();
    let inverse_letter = |l: usize| if l < ng { l + ng } else { l - ng };
    let limit = cfg.radius + margin;

    let identity = if integral { Element::Int([1, 0, 0, 1]) } else { Element::Real(Isometry::IDENTITY) };
    let mut records = alloc::vec![OrbitRecord { parent: u32::MAX, letter: 0, element: identity, point: *p, distance: 0.0 }];
    let mut seen_int: HashSet<[i64; 4]> = HashSet::new();
    let mut index = RealIndex {
        aux: p.exp(0.37, 0.91),
        cells: HashMap::new(),
        tol: cfg.merge_tolerance,
    };
    match identity {
        Element::Int(m) => {
            seen_int.insert(m);
        }
        Element::Real(_) => index.insert(p, 0),
    }
    let mut heap = BinaryHeap::new();
    heap.push(Item(0.0, 0));
    while let Some(Item(d_cur, idx)) = heap.pop() {
        let e = records[idx as usize].element;
        let last = (idx != 0).then(|| records[idx as usize].letter as usize);
        for (l, s) in gen_elems.iter().enumerate() {
            if free && last.map(inverse_letter) == Some(l) {
                continue;
            }
            let f = e.mul(s)?;
            let iso = f.iso();
            let fp = iso.apply(p)?;
            let d = distance(p, &fp);
            if d > limit {
                continue;
            }
            let is_new = match f {
                Element::Int(m) => seen_int.insert(m),
                Element::Real(_) if free => true,
                Element::Real(_) => index.find(&records, &iso, &fp)?.is_none(),
            };
            if !is_new {
                continue;
            }
            if records.len() >= cfg.max_elements {
                return Err(Error::ResourceLimit {
                    what: format!("more than {} elements", cfg.max_elements),
                    completed_radius: (d_cur - margin).max(0.0),
                });
            }
            let n = records.len() as u32;
            if matches!(f, Element::Real(_)) && !free {
                index.insert(&fp, n);
            }
            records.push(OrbitRecord { parent: idx, letter: l as u16, element: f, point: fp, distance: d });
            heap.push(Item(d, n));
        }
    }
    let mut within: Vec<u32> = (0..records.len() as u32)
        .filter(|&i| records[i as usize].distance <= cfg.radius)
        .collect();
    within.sort_by(|&a, &b| records[a as usize].distance.total_cmp(&records[b as usize].distance));
    Ok(OrbitEnumeration { base: *p, radius: cfg.radius, letters, records, within })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_identity_and_s_fix_i() {
        let g = GroupPresentation::modular();
        let o = enumerate_orbit(&g, &Point::i(), &OrbitConfig::new(0.0)).unwrap();
        assert_eq!(o.count_within(0.0), 2);
    }

    #[test]
    fn words_reproduce_elements() {
        let g = GroupPresentation::modular();
        let o = enumerate_orbit(&g, &Point::i(), &OrbitConfig::new(4.0)).unwrap();
        let gens = g.symmetric_generators();
        for &i in o.within.iter().take(200) {
            let mut m = Isometry::IDENTITY;
            for l in o.word(i as usize) {
                m = m.compose(&gens[l as usize].iso);
            }
            let q = m.apply(&Point::i()).unwrap();
            assert!(distance(&q, &o.records[i as usize].point) < 1e-9);
        }
    }

    #[test]
    fn resource_limit_reports_radius() {
        let g = GroupPresentation::modular();
        let mut cfg = OrbitConfig::new(8.0);
        cfg.max_elements = 100;
        match enumerate_orbit(&g, &Point::i(), &cfg) {
            Err(Error::ResourceLimit { completed_radius, .. }) => assert!(completed_radius >= 0.0),
            other => panic!("expected resource error, got {other:?}"),
        }
    }
}
