//! Witness graphs and the arithmetic around complexity length.
//!
//! Nesting, transversality and time order are input data. A graph holds
//! one vertex per subsurface; vertices flagged as witnesses carry the
//! subordering, the others are active subsurfaces that only appear through
//! their closure and time order.
//!
//! Edge directions:
//! - `SW` `a → b`: `a ↙ b`, with `a ⊏ b`;
//! - `SE` `a → b`: `a ↘ b`, with `b ⊏ a`;
//! - `P`  `a → b`: `a ⋔ b` and `a ⋖ b`.

use crate::error::{invalid, Error, Result};
use crate::math;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use hashbrown::{HashMap, HashSet};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    SW,
    SE,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    /// Entropy exponent `h > 0`.
    pub h: f64,
    /// Integer part of the resolution distance.
    pub s: u64,
    pub witness: bool,
    /// Witness this active subsurface contributes to; `None` for witnesses.
    pub closure: Option<usize>,
    pub n_v: f64,
    pub k_v: f64,
}

impl Vertex {
    pub fn witness(h: f64, s: u64) -> Vertex {
        Vertex { h, s, witness: true, closure: None, n_v: 100.0, k_v: 1.0 }
    }

    pub fn active(h: f64, closure: Option<usize>) -> Vertex {
        Vertex { h, s: 0, witness: false, closure, n_v: 100.0, k_v: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(usize, usize, EdgeKind)>,
    /// Pairs `(inner, outer)` with `inner ⊏ outer`.
    pub nesting: Vec<(usize, usize)>,
    /// Unordered transverse pairs.
    pub transverse: Vec<(usize, usize)>,
    /// The constant `𝐂`.
    pub c: f64,
}

impl WitnessGraph {
    pub fn new(vertices: Vec<Vertex>) -> WitnessGraph {
        WitnessGraph { vertices, edges: Vec::new(), nesting: Vec::new(), transverse: Vec::new(), c: 1.0 }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn nest(mut self, inner: usize, outer: usize) -> Self {
        self.nesting.push((inner, outer));
        self
    }

    pub fn cross(mut self, a: usize, b: usize) -> Self {
        self.transverse.push((a, b));
        self
    }

    pub fn edge(mut self, a: usize, b: usize, kind: EdgeKind) -> Self {
        self.edges.push((a, b, kind));
        self
    }

    /// Transitive closure of the nesting relation; `m[a][b]` iff `a ⊏ b`.
    pub fn nesting_closure(&self) -> Result<Vec<Vec<bool>>> {
        let n = self.len();
        let mut m = vec![vec![false; n]; n];
        for &(a, b) in &self.nesting {
            if a >= n || b >= n {
                return invalid(format!("nesting pair ({a}, {b}) out of range"));
            }
            m[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if m[i][k] {
                    for j in 0..n {
                        if m[k][j] {
                            m[i][j] = true;
                        }
                    }
                }
            }
        }
        if (0..n).any(|i| m[i][i]) {
            return invalid("nesting relation has a cycle");
        }
        Ok(m)
    }

    fn transverse_set(&self) -> HashSet<(usize, usize)> {
        let mut t = HashSet::new();
        for &(a, b) in &self.transverse {
            t.insert((a, b));
            t.insert((b, a));
        }
        t
    }

    /// Checks the structural invariants and returns the nesting closure.
    pub fn validate(&self) -> Result<Vec<Vec<bool>>> {
        let n = self.len();
        for v in &self.vertices {
            if !(v.h > 0.0) || !v.h.is_finite() {
                return invalid("vertex exponent must be positive");
            }
            if let Some(c) = v.closure {
                if c >= n || !self.vertices[c].witness {
                    return invalid("closure must point to a witness");
                }
            }
        }
        let nest = self.nesting_closure()?;
        let cross = self.transverse_set();
        for &(a, b) in &self.transverse {
            if a >= n || b >= n || a == b {
                return invalid(format!("transverse pair ({a}, {b}) malformed"));
            }
            if nest[a][b] || nest[b][a] {
                return invalid(format!("pair ({a}, {b}) is both nested and transverse"));
            }
        }
        let mut seen = HashSet::new();
        for &(a, b, kind) in &self.edges {
            if a >= n || b >= n || a == b {
                return invalid(format!("edge ({a}, {b}) malformed"));
            }
            if !seen.insert((a, b)) {
                return invalid(format!("more than one edge from {a} to {b}"));
            }
            let ok = match kind {
                EdgeKind::SW => nest[a][b],
                EdgeKind::SE => nest[b][a],
                EdgeKind::P => cross.contains(&(a, b)),
            };
            if !ok {
                return invalid(format!("{kind:?} edge ({a}, {b}) does not match the nesting/transverse data"));
            }
        }
        Ok(nest)
    }

    fn edge_map(&self) -> HashMap<(usize, usize), EdgeKind> {
        self.edges.iter().map(|&(a, b, k)| ((a, b), k)).collect()
    }

    /// Relabels vertices by `perm` (`new index = perm[old]`).
    pub fn permuted(&self, perm: &[usize]) -> WitnessGraph {
        let mut vertices = self.vertices.clone();
        for (old, v) in self.vertices.iter().enumerate() {
            let mut v = *v;
            v.closure = v.closure.map(|c| perm[c]);
            vertices[perm[old]] = v;
        }
        WitnessGraph {
            vertices,
            edges: self.edges.iter().map(|&(a, b, k)| (perm[a], perm[b], k)).collect(),
            nesting: self.nesting.iter().map(|&(a, b)| (perm[a], perm[b])).collect(),
            transverse: self.transverse.iter().map(|&(a, b)| (perm[a], perm[b])).collect(),
            c: self.c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    /// Each nested pair of witnesses carries exactly one of `↙`, `↘`.
    Assignment,
    I,
    II,
    III,
    IV,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomResult {
    pub axiom: Axiom,
    pub holds: bool,
    /// Offending `(Z, V, W)`; pairs repeat the last index.
    pub witness: Option<(usize, usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuborderReport {
    pub results: Vec<AxiomResult>,
}

impl SuborderReport {
    pub fn all_hold(&self) -> bool {
        self.results.iter().all(|r| r.holds)
    }

    pub fn get(&self, a: Axiom) -> &AxiomResult {
        self.results.iter().find(|r| r.axiom == a).expect("every axiom is reported")
    }
}

fn result(axiom: Axiom, bad: Option<(usize, usize, usize)>) -> AxiomResult {
    AxiomResult { axiom, holds: bad.is_none(), witness: bad }
}

pub fn check_suborder_axioms(g: &WitnessGraph) -> Result<SuborderReport> {
    let nest = g.validate()?;
    let n = g.len();
    let em = g.edge_map();
    let cross = g.transverse_set();
    let wit = |v: usize| g.vertices[v].witness;
    let is = |a: usize, b: usize, k: EdgeKind| em.get(&(a, b)) == Some(&k);
    let mut edges = g.edges.clone();
    edges.sort_unstable();
    let of_kind = |k: EdgeKind| edges.iter().filter(move |e| e.2 == k).map(|e| (e.0, e.1));
    let mut out = Vec::new();

    let mut bad = None;
    'a: for w in 0..n {
        for v in 0..n {
            if nest[w][v] && wit(w) && wit(v) && (is(w, v, EdgeKind::SW) == is(v, w, EdgeKind::SE)) {
                bad = Some((w, v, v));
                break 'a;
            }
        }
    }
    out.push(result(Axiom::Assignment, bad));

    // (i) Z ⊏ V ⊏ W: Z ↙ W iff V ↙ W, and W ↘ Z iff W ↘ V
    let mut bad = None;
    'i: for w in (0..n).filter(|&w| wit(w)) {
        let inside: Vec<usize> = (0..n).filter(|&x| wit(x) && nest[x][w]).collect();
        for &v in &inside {
            for &z in inside.iter().filter(|&&z| nest[z][v]) {
                if is(z, w, EdgeKind::SW) != is(v, w, EdgeKind::SW) || is(w, z, EdgeKind::SE) != is(w, v, EdgeKind::SE) {
                    bad = Some((z, v, w));
                    break 'i;
                }
            }
        }
    }
    out.push(result(Axiom::I, bad));

    // (ii) Z ↙ V ↘ W ⇒ Z ⋔ W and Z ⋖ W
    let mut bad = None;
    'ii: for (z, v) in of_kind(EdgeKind::SW) {
        for (v2, w) in of_kind(EdgeKind::SE) {
            if v2 == v && z != w && wit(z) && wit(v) && wit(w) && !is(z, w, EdgeKind::P) {
                bad = Some((z, v, w));
                break 'ii;
            }
        }
    }
    out.push(result(Axiom::II, bad));

    // (iii) Z ↙ V ⋖ W or W ⋖ V ↘ Z ⇒ Z ⋔ W
    let mut bad = None;
    'iii: for (z, v) in of_kind(EdgeKind::SW) {
        for (v2, w) in of_kind(EdgeKind::P) {
            if v2 == v && wit(z) && wit(v) && z != w && !cross.contains(&(z, w)) {
                bad = Some((z, v, w));
                break 'iii;
            }
        }
    }
    if bad.is_none() {
        'iii2: for (v, z) in of_kind(EdgeKind::SE) {
            for (w, v2) in of_kind(EdgeKind::P) {
                if v2 == v && wit(z) && wit(v) && z != w && !cross.contains(&(z, w)) {
                    bad = Some((z, v, w));
                    break 'iii2;
                }
            }
        }
    }
    out.push(result(Axiom::III, bad));

    // (iv) Z ↙ V forbids W ⋖ Z, and Z ↘ V forbids Z ⋖ W, for W with closure V
    let closure = |w: usize| if g.vertices[w].witness { Some(w) } else { g.vertices[w].closure };
    let mut bad = None;
    'iv: for &(a, b, k) in &edges {
        if !(wit(a) && wit(b)) || k == EdgeKind::P {
            continue;
        }
        let (z, v) = (a, b);
        for w in (0..n).filter(|&w| closure(w) == Some(v)) {
            let hit = match k {
                EdgeKind::SW => is(w, z, EdgeKind::P),
                _ => is(z, w, EdgeKind::P),
            };
            if hit {
                bad = Some((z, v, w));
                break 'iv;
            }
        }
    }
    out.push(result(Axiom::IV, bad));
    Ok(SuborderReport { results: out })
}

fn directed_acyclic(g: &WitnessGraph) -> Result<()> {
    enlargement_order(g).map(|_| ())
}

/// A vertex order in which every prefix is an initial subset: the graph
/// is built up by one-vertex enlargements. Errors on a directed cycle.
pub fn enlargement_order(g: &WitnessGraph) -> Result<Vec<usize>> {
    let n = g.len();
    let mut indeg = vec![0usize; n];
    let mut out = vec![Vec::new(); n];
    for &(a, b, _) in &g.edges {
        if a >= n || b >= n {
            return invalid("edge out of range");
        }
        indeg[b] += 1;
        out[a].push(b);
    }
    let mut order = Vec::with_capacity(n);
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    while let Some(pos) = ready.iter().enumerate().min_by_key(|e| e.1).map(|e| e.0) {
        let v = ready.swap_remove(pos);
        order.push(v);
        for &w in &out[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(w);
            }
        }
    }
    if order.len() < n {
        return invalid("witness graph has a directed cycle");
    }
    Ok(order)
}

pub const MAX_SUBSET_VERTICES: usize = 24;

/// Subsets (as bitmasks over vertex indices) with no edge entering them
/// from the complement, in increasing mask order.
pub fn enumerate_initial_subsets(g: &WitnessGraph) -> Result<Vec<u32>> {
    let n = g.len();
    if n > MAX_SUBSET_VERTICES {
        return invalid(format!("initial subsets are enumerated for at most {MAX_SUBSET_VERTICES} vertices"));
    }
    directed_acyclic(g)?;
    // preds[v]: vertices with an edge into v
    let mut preds = vec![0u32; n];
    for &(a, b, _) in &g.edges {
        preds[b] |= 1 << a;
    }
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let ok = (0..n).filter(|v| mask >> v & 1 == 1).all(|v| preds[v] & !mask == 0);
        if ok {
            out.push(mask);
        }
    }
    Ok(out)
}

/// Cost tolerance when comparing `Σ h·s` with the budget.
const BUDGET_TOL: f64 = 1e-9;

fn label_assignments(cycles: &[usize], budget: f64, hs: &[f64]) -> u128 {
    match cycles.split_first() {
        None => 1,
        Some((&c, rest)) => {
            let mut total = 0u128;
            for &h in hs {
                let unit = c as f64 * h;
                let mut s = 1u64;
                while unit * s as f64 <= budget + BUDGET_TOL {
                    total += label_assignments(rest, budget - unit * s as f64, hs);
                    s += 1;
                }
            }
            total
        }
    }
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..m).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out
}

/// Number of vertex-labelled graphs with at most `k` vertices, labels
/// `(h, s)` with `h ∈ H`, `s ≥ 1` and `Σ h·s ≤ r`, and at most one typed
/// edge (`SW`, `SE` or `P`) per ordered pair, counted up to
/// label-preserving isomorphism (Burnside over `S_m`).
pub fn count_combinatorial_types(k: usize, r: f64, hs: &[f64]) -> Result<u128> {
    if k > 6 {
        return invalid("type counting is limited to 6 vertices");
    }
    if hs.is_empty() || hs.iter().any(|&h| !(h > 0.0)) || !(r >= 0.0) {
        return invalid("exponents must be positive and the budget non-negative");
    }
    let mut hs = hs.to_vec();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    let mut total = 0u128;
    for m in 0..=k {
        let mut fixed = 0u128;
        let perms = permutations(m);
        for p in &perms {
            let mut seen = vec![false; m];
            let mut cycles = Vec::new();
            for i in 0..m {
                let mut len = 0;
                let mut j = i;
                while !seen[j] {
                    seen[j] = true;
                    j = p[j];
                    len += 1;
                }
                if len > 0 {
                    cycles.push(len);
                }
            }
            let mut pseen = vec![false; m * m];
            let mut pair_orbits = 0u32;
            for a in 0..m {
                for b in 0..m {
                    if a == b || pseen[a * m + b] {
                        continue;
                    }
                    pair_orbits += 1;
                    let (mut x, mut y) = (a, b);
                    while !pseen[x * m + y] {
                        pseen[x * m + y] = true;
                        x = p[x];
                        y = p[y];
                    }
                }
            }
            fixed += label_assignments(&cycles, r, &hs) * 4u128.pow(pair_orbits);
        }
        total += fixed / perms.len() as u128;
    }
    Ok(total)
}

fn rational(x: f64) -> Result<BigRational> {
    BigRational::from_f64(x).ok_or_else(|| Error::InvalidInput(format!("{x} is not a finite number")))
}

/// `Π_v exp((h_v + ε_ent) s_v)` over witness vertices.
pub fn count_bound(g: &WitnessGraph, eps_ent: f64) -> f64 {
    math::exp(g.vertices.iter().filter(|v| v.witness).map(|v| (v.h + eps_ent) * v.s as f64).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountBoundCheck {
    pub eps_ent: f64,
    /// `Σ h·s`.
    pub budget_used: f64,
    pub log_bound: f64,
    pub log_limit: f64,
    pub holds: bool,
}

/// Compares `Σ (h + ε_ent) s` with `(1 + ε_r) r` in exact rational
/// arithmetic, where `ε_ent = ε_r · min h` unless given.
pub fn check_count_bound(g: &WitnessGraph, r: f64, eps_r: f64, eps_ent: Option<f64>) -> Result<CountBoundCheck> {
    if !(eps_r >= 0.0) || !(r >= 0.0) {
        return invalid("budget and eps_r must be non-negative");
    }
    let ws: Vec<&Vertex> = g.vertices.iter().filter(|v| v.witness).collect();
    let h_min = ws.iter().map(|v| v.h).fold(f64::INFINITY, f64::min);
    let e = match eps_ent {
        Some(x) => rational(x)?,
        None if h_min.is_finite() => rational(eps_r)? * rational(h_min)?,
        None => BigRational::zero(),
    };
    let to_f = |q: &BigRational| -> f64 { num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN) };
    let eps_ent = to_f(&e);
    let mut used = BigRational::zero();
    let mut lhs = BigRational::zero();
    for v in &ws {
        let h = rational(v.h)?;
        let s = BigRational::from_integer(BigInt::from(v.s));
        used += &h * &s;
        lhs += (h + &e) * s;
    }
    let rhs = (BigRational::from_integer(BigInt::from(1)) + rational(eps_r)?) * rational(r)?;
    if used > rational(r)? {
        return invalid("labels exceed the budget r");
    }
    Ok(CountBoundCheck { eps_ent, budget_used: to_f(&used), log_bound: to_f(&lhs), log_limit: to_f(&rhs), holds: lhs <= rhs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexitySegments {
    /// `(ℓ_i, e_i)`.
    pub segments: Vec<(f64, f64)>,
    /// Ambient exponent.
    pub h: f64,
}

impl ComplexitySegments {
    pub fn new(segments: Vec<(f64, f64)>, h: f64) -> ComplexitySegments {
        ComplexitySegments { segments, h }
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.0).sum()
    }

    pub fn concat(&self, o: &ComplexitySegments) -> ComplexitySegments {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&o.segments);
        ComplexitySegments { segments, h: self.h }
    }

    /// Segments whose exponent exceeds the ambient one.
    pub fn over_cap(&self, tol: f64) -> Vec<usize> {
        (0..self.segments.len()).filter(|&i| self.segments[i].1 > self.h + tol).collect()
    }
}

/// `Σ e_i ℓ_i`.
pub fn complexity_length(c: &ComplexitySegments) -> Result<f64> {
    let mut total = 0.0;
    for &(l, e) in &c.segments {
        if !(l >= 0.0) || !(e >= 0.0) || !l.is_finite() || !e.is_finite() {
            return invalid("segment lengths and exponents must be finite and non-negative");
        }
        total += e * l;
    }
    Ok(total)
}

/// Complexity length divided by the ambient net-point entropy.
pub fn rescaled(c: &ComplexitySegments, h_np: f64) -> Result<f64> {
    if !(h_np > 0.0) {
        return invalid("entropy must be positive");
    }
    Ok(complexity_length(c)? / h_np)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapVerdict {
    Holds,
    Fails,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearGap {
    pub verdict: GapVerdict,
    /// `ε_b (1 − h_sub/h)`.
    pub required: f64,
    /// `1 − rescaled/R`.
    pub achieved: f64,
}

pub const GAP_TOL: f64 = 1e-12;

/// Checks `rescaled ≤ R(1 − c)` with `c = ε_b(1 − h_sub/h)` when the final
/// stretch of length at least `ε_b R` runs at exponents `≤ h_sub < h`.
pub fn linear_gap_check(c: &ComplexitySegments, h: f64, eps_b: f64, h_sub: f64) -> Result<LinearGap> {
    if !(h > 0.0) || !(0.0..=1.0).contains(&eps_b) || !(h_sub >= 0.0) {
        return invalid("need h > 0, eps_b in [0, 1], h_sub >= 0");
    }
    let r = c.length();
    let resc = rescaled(c, h)?;
    let achieved = if r > 0.0 { 1.0 - resc / r } else { 0.0 };
    let required = eps_b * (1.0 - h_sub / h);
    let mut tail = 0.0;
    let mut applicable = h_sub < h || eps_b == 0.0;
    for &(l, e) in c.segments.iter().rev() {
        if tail >= eps_b * r - GAP_TOL * r.max(1.0) {
            break;
        }
        if e > h_sub {
            applicable = false;
            break;
        }
        tail += l;
    }
    if !applicable {
        return Ok(LinearGap { verdict: GapVerdict::NotApplicable, required, achieved });
    }
    let holds = resc <= r * (1.0 - required) + GAP_TOL * r.max(1.0);
    Ok(LinearGap { verdict: if holds { GapVerdict::Holds } else { GapVerdict::Fails }, required, achieved })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BadnessReport {
    /// `|B_V|` per witness.
    pub bad_lengths: Vec<f64>,
    pub admissible: Vec<bool>,
    pub all_admissible: bool,
    pub limited: bool,
}

/// Overlap lengths of contribution sets along `[0, R]`. `k_c[v]` is
/// `K_V·𝐂`; `limit` bounds the number of witnesses.
pub fn badness(sets: &[Vec<(f64, f64)>], r: f64, k_c: &[f64], limit: usize) -> Result<BadnessReport> {
    if sets.len() != k_c.len() {
        return invalid("one K_V C constant per witness");
    }
    if !(r >= 0.0) || !r.is_finite() {
        return invalid("total length must be finite and non-negative");
    }
    let mut cuts = vec![0.0, r];
    for set in sets {
        for &(a, b) in set {
            if !(a.is_finite() && b.is_finite()) || a > b || a < 0.0 || b > r {
                return invalid(format!("interval [{a}, {b}] is not inside [0, {r}]"));
            }
            cuts.push(a);
            cuts.push(b);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut bad = vec![0.0; sets.len()];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let covering: Vec<usize> =
            (0..sets.len()).filter(|&v| sets[v].iter().any(|&(x, y)| x <= mid && mid <= y)).collect();
        if covering.len() >= 2 {
            for v in covering {
                bad[v] += b - a;
            }
        }
    }
    let admissible: Vec<bool> = bad.iter().zip(k_c).map(|(&l, &k)| l <= r / k).collect();
    Ok(BadnessReport {
        all_admissible: admissible.iter().all(|&a| a),
        admissible,
        bad_lengths: bad,
        limited: sets.len() <= limit,
    })
}

/// Wideness as a fixture predicate: each `(w, v, diam)` with `w ↙ v` or
/// `v ↘ w` must have `diam ≤ N_V/3`.
pub fn is_wide(g: &WitnessGraph, diams: &[(usize, usize, f64)]) -> Result<bool> {
    let em = g.edge_map();
    for &(w, v, d) in diams {
        if v >= g.len() || w >= g.len() {
            return invalid("diameter entry out of range");
        }
        let related = em.get(&(w, v)) == Some(&EdgeKind::SW) || em.get(&(v, w)) == Some(&EdgeKind::SE);
        if !related {
            return invalid(format!("({w}, {v}) is not a subordered pair"));
        }
        if d > g.vertices[v].n_v / 3.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `[x]_k`: zero up to `k`, identity above.
pub fn cutoff(x: f64, k: f64) -> f64 {
    if x <= k {
        0.0
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RafiInput {
    /// `d_Y` for non-annular `Y`.
    pub nonannular: Vec<f64>,
    /// `d_α` for two-sided `α ∉ Γ`.
    pub annular: Vec<f64>,
    /// Plane-factor distances for two-sided curves of `Γ`.
    pub gamma_two_sided: Vec<f64>,
    /// Line-factor distances for one-sided curves of `Γ`.
    pub gamma_one_sided: Vec<f64>,
    /// Lengths of curves short only at `x`.
    pub short_x: Vec<f64>,
    /// Lengths of curves short only at `y`.
    pub short_y: Vec<f64>,
    pub k: f64,
    /// Shortness threshold for `short_x`, `short_y`.
    pub eps: f64,
}

pub fn rafi_distance(input: &RafiInput) -> Result<f64> {
    if !(input.k > 0.0) {
        return invalid("threshold k must be positive");
    }
    let dists = input.nonannular.iter().chain(&input.annular).chain(&input.gamma_two_sided).chain(&input.gamma_one_sided);
    if dists.clone().any(|&d| !(d >= 0.0)) {
        return invalid("distances must be non-negative");
    }
    for &l in input.short_x.iter().chain(&input.short_y) {
        if !(l > 0.0) || l > input.eps {
            return Err(Error::InvalidInput(format!("length {l} is not in (0, {}]", input.eps)));
        }
    }
    let k = input.k;
    let max0 = |v: &mut dyn Iterator<Item = f64>| v.fold(0.0f64, f64::max);
    let mut d: f64 = input.nonannular.iter().map(|&x| cutoff(x, k)).sum();
    d += input.annular.iter().filter(|&&x| x > 0.0).map(|&x| cutoff(math::ln(x), k)).sum::<f64>();
    d += max0(&mut input.gamma_two_sided.iter().copied());
    d += max0(&mut input.gamma_one_sided.iter().copied());
    d += max0(&mut input.short_x.iter().map(|&l| math::ln(1.0 / l)));
    d += max0(&mut input.short_y.iter().map(|&l| math::ln(1.0 / l)));
    Ok(d)
}

/// Distance-formula input for two points of a product region: plane
/// factors become two-sided `Γ` terms, line factors one-sided ones, base
/// factors non-annular terms.
pub fn product_region_input(x: &crate::model::ModelPoint, y: &crate::model::ModelPoint, k: f64) -> Result<RafiInput> {
    use crate::model::Coord;
    if x.coords.len() != y.coords.len() {
        return invalid("points have different factor counts");
    }
    let mut input = RafiInput { k, eps: 1.0, ..RafiInput::default() };
    for (a, b) in x.coords.iter().zip(&y.coords) {
        match (a, b) {
            (Coord::Plane(p), Coord::Plane(q)) => input.gamma_two_sided.push(crate::hyperbolic::distance(p, q)),
            (Coord::Line(u), Coord::Line(v)) => {
                if !(*u > 0.0 && *v > 0.0) {
                    return invalid("line coordinates must be positive");
                }
                input.gamma_one_sided.push(math::abs(math::ln(u / v)))
            }
            (Coord::Base(u), Coord::Base(v)) => input.nonannular.push(math::abs(u - v)),
            _ => return invalid("factor kinds differ"),
        }
    }
    Ok(input)
}

/// Edge list rendered for logs.
pub fn describe(g: &WitnessGraph) -> String {
    let mut s = String::new();
    for &(a, b, k) in &g.edges {
        s.push_str(&format!("{a} -{k:?}-> {b}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_examples() {
        assert_eq!(cutoff(3.0, 5.0), 0.0);
        assert_eq!(cutoff(7.0, 5.0), 7.0);
        assert_eq!(cutoff(5.0, 5.0), 0.0);
    }

    #[test]
    fn small_type_counts() {
        // r < h: only the empty graph
        assert_eq!(count_combinatorial_types(3, 0.5, &[1.0]).unwrap(), 1);
        // one vertex with s = 1, or none
        assert_eq!(count_combinatorial_types(3, 1.0, &[1.0]).unwrap(), 2);
        // two vertices (1,1),(1,1): 4 ordered-pair states up to swap → 10
        assert_eq!(count_combinatorial_types(2, 2.0, &[1.0]).unwrap(), 1 + 2 + 10);
    }
}
