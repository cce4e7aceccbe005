//! The τ-step random walk on a net, concave-trajectory counts and the
//! discretization of geodesics into trajectories.
//!
//! On a periodic strip the walk is the quotient of the walk on the lifted
//! net: a step from `r` picks a lift uniformly among all lifts within `τ`,
//! so a quotient point is chosen with weight equal to its number of lifts
//! in the ball.

use crate::error::{invalid, Error, Result};
use crate::hyperbolic::{GeodesicSegment, Point};
use crate::math;
use crate::model::{Coord, ModelPoint};
use crate::nets::{Net, PlaneRegion};
use crate::par;
use crate::stats::{fit_line, LineFit};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThinMode {
    /// Thin means at distance at least `τ` from the thick part
    /// `{y ≤ 1/ε}`, i.e. `y ≥ e^τ/ε`.
    DistanceFromThick,
    /// Thin means `y > 1/ε`.
    Level,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    pub tau: f64,
    /// Number of trajectory points `r_0 … r_{n-1}` for the longest run.
    pub n: usize,
    pub eps: f64,
    /// Free prefix and suffix length `𝔰`.
    pub s: usize,
    pub seed: u64,
    pub trajectories: usize,
    pub workers: usize,
    pub mode: ThinMode,
}

impl WalkConfig {
    pub fn new(tau: f64, eps: f64, s: usize, n: usize, trajectories: usize, seed: u64) -> WalkConfig {
        WalkConfig { tau, n, eps, s, seed, trajectories, workers: 1, mode: ThinMode::DistanceFromThick }
    }

    fn validate(&self, net: &Net, g: &WalkGraph) -> Result<()> {
        if !(self.eps > 0.0) || self.n < 1 || self.trajectories < 1 {
            return invalid("walk needs eps > 0, n >= 1 and at least one trajectory");
        }
        if !(self.tau > 2.0 * net.eps_n) {
            return invalid(format!("step radius {} must exceed 2 eps_n = {}", self.tau, 2.0 * net.eps_n));
        }
        if g.tau != self.tau || g.len() != net.len() {
            return invalid("walk graph was built for another net or step radius");
        }
        Ok(())
    }

    pub fn is_thin(&self, z: &Point) -> bool {
        match self.mode {
            ThinMode::DistanceFromThick => z.y >= math::exp(self.tau) / self.eps,
            ThinMode::Level => z.y > 1.0 / self.eps,
        }
    }
}

/// The horoball `{y ≥ 1}` as a strip of period `P`, cut at the height
/// where translates of one point are still `ε_n` apart, so that the lift of
/// a periodic net is a net of the horoball up to that height.
pub fn horoball_region(period: f64, eps_n: f64) -> Result<PlaneRegion> {
    let top = period / (2.0 * math::sinh(0.5 * eps_n));
    if !(period > 0.0) || !(eps_n > 0.0) || !(top > 1.0) {
        return invalid("horoball strip needs period > 2 sinh(eps_n / 2)");
    }
    Ok(PlaneRegion::PeriodicStrip { period, y0: 1.0, y1: top })
}

/// `𝔰 = ⌈diam(thick)/τ⌉ + 1`.
pub fn s_parameter(thick_diameter: f64, tau: f64) -> usize {
    math::ceil(thick_diameter / tau) as usize + 1
}

/// Number of integers `k` with `d(a, b + kT) ≤ τ`.
pub fn lift_multiplicity(a: &Point, b: &Point, period: f64, tau: f64) -> f64 {
    let dy = a.y - b.y;
    let w = 2.0 * a.y * b.y * (math::cosh(tau) - 1.0) - dy * dy;
    if w < 0.0 {
        return 0.0;
    }
    let half = math::sqrt(w) / period;
    let c = (b.x - a.x) / period;
    // k in [-c - half, -c + half]
    (math::floor(-c + half) - math::ceil(-c - half) + 1.0).max(0.0)
}

/// Neighbour lists with step weights, built once per `(net, τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkGraph {
    pub tau: f64,
    pub neighbors: Vec<Vec<u32>>,
    pub weights: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
}

fn plane_of(p: &ModelPoint) -> Option<Point> {
    match p.coords.first() {
        Some(Coord::Plane(z)) if p.coords.len() == 1 => Some(*z),
        _ => None,
    }
}

pub fn build_walk_graph(net: &Net, tau: f64) -> Result<WalkGraph> {
    if !(tau > 0.0) {
        return invalid("step radius must be positive");
    }
    let mut neighbors = Vec::with_capacity(net.len());
    let mut weights = Vec::with_capacity(net.len());
    let mut cumulative = Vec::with_capacity(net.len());
    for (i, p) in net.points.iter().enumerate() {
        let mut nb = net.within(p, tau);
        nb.sort_unstable_by_key(|e| e.0);
        let (ids, w): (Vec<u32>, Vec<f64>) = match (net.period(), plane_of(p)) {
            (Some(t), Some(a)) => nb
                .iter()
                .map(|&(j, _)| (j, lift_multiplicity(&a, &plane_of(&net.points[j as usize]).unwrap_or(a), t, tau)))
                .filter(|e| e.1 > 0.0)
                .unzip(),
            _ => nb.iter().map(|&(j, _)| (j, 1.0)).unzip(),
        };
        if ids.is_empty() {
            return Err(Error::InvalidInput(format!("net point {i} has no neighbour within tau")));
        }
        let mut acc = 0.0;
        let cum: Vec<f64> = w.iter().map(|x| {
            acc += x;
            acc
        }).collect();
        neighbors.push(ids);
        weights.push(w);
        cumulative.push(cum);
    }
    Ok(WalkGraph { tau, neighbors, weights, cumulative })
}

impl WalkGraph {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Total step weight out of `r`: the number of lifted net points within `τ`.
    pub fn degree(&self, r: usize) -> f64 {
        *self.cumulative[r].last().unwrap_or(&0.0)
    }

    /// Transition probability `r → j` (zero when `j` is out of reach).
    pub fn probability(&self, r: usize, j: u32) -> f64 {
        match self.neighbors[r].binary_search(&j) {
            Ok(k) => self.weights[r][k] / self.degree(r),
            Err(_) => 0.0,
        }
    }
}

/// One step of the walk from net point `r`.
pub fn step<G: Rng>(g: &WalkGraph, r: usize, rng: &mut G) -> Result<u32> {
    let cum = g.cumulative.get(r).ok_or_else(|| Error::InvalidInput(format!("no net point {r}")))?;
    let total = *cum.last().ok_or_else(|| Error::InvalidInput("empty neighbourhood".into()))?;
    let u = rng.gen::<f64>() * total;
    let k = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
    Ok(g.neighbors[r][k])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<u32>,
    /// `d(r_k, r_{k+1})`.
    pub distances: Vec<f64>,
    pub thin: Vec<bool>,
}

impl Trajectory {
    /// Every point except the first and last `s` is thin.
    pub fn is_concave(&self, s: usize) -> bool {
        let n = self.points.len();
        n <= 2 * s || self.thin[s..n - s].iter().all(|&t| t)
    }
}

fn height(net: &Net, i: usize) -> Result<Point> {
    plane_of(&net.points[i]).ok_or_else(|| Error::InvalidInput("walk tags need a single-plane net".into()))
}

pub fn thin_tags(net: &Net, cfg: &WalkConfig) -> Result<Vec<bool>> {
    (0..net.len()).map(|i| height(net, i).map(|z| cfg.is_thin(&z))).collect()
}

/// Net points of the thick part `{y ≤ 1/ε}`.
pub fn thick_points(net: &Net, eps: f64) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for i in 0..net.len() {
        if height(net, i)?.y <= 1.0 / eps {
            out.push(i as u32);
        }
    }
    Ok(out)
}

fn trajectory_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Trajectory number `k` of a run: a thick start chosen uniformly, then
/// `n - 1` steps. Reproducible from `(seed, k)` alone.
pub fn sample_trajectory(net: &Net, g: &WalkGraph, starts: &[u32], cfg: &WalkConfig, k: usize) -> Result<Trajectory> {
    if starts.is_empty() {
        return invalid("no start points");
    }
    let mut rng = trajectory_rng(cfg.seed, k);
    let mut r = starts[rng.gen_range(0..starts.len())];
    let mut points = vec![r];
    let mut distances = Vec::with_capacity(cfg.n);
    for _ in 1..cfg.n {
        let next = step(g, r as usize, &mut rng)?;
        distances.push(net.distance(&net.points[r as usize], &net.points[next as usize]));
        points.push(next);
        r = next;
    }
    let thin = points.iter().map(|&i| height(net, i as usize).map(|z| cfg.is_thin(&z))).collect::<Result<_>>()?;
    Ok(Trajectory { points, distances, thin })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveStats {
    pub s: usize,
    pub ns: Vec<usize>,
    pub hits: Vec<u64>,
    pub trajectories: u64,
    pub fractions: Vec<f64>,
    pub se: Vec<f64>,
    /// Fit of `ln(fraction)` against `n` over `ns` with at least
    /// `min_hits` hits and `n > 2𝔰`.
    pub fit: Option<LineFit>,
    pub fitted_ns: Vec<usize>,
    pub warning: Option<String>,
}

impl ConcaveStats {
    pub fn exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Monte Carlo concave fractions for every trajectory length in `ns`
/// (each at most `cfg.n`), from one run of `cfg.trajectories` walks.
pub fn run_and_count_concave(net: &Net, g: &WalkGraph, cfg: &WalkConfig, ns: &[usize], min_hits: u64) -> Result<ConcaveStats> {
    cfg.validate(net, g)?;
    if ns.iter().any(|&n| n < 1 || n > cfg.n) {
        return invalid("trajectory lengths must lie in 1..=cfg.n");
    }
    let thin = thin_tags(net, cfg)?;
    let starts = thick_points(net, cfg.eps)?;
    if starts.is_empty() {
        return invalid("the net has no thick point to start from");
    }
    let s = cfg.s;
    // for each walk, the number of leading middle points that are thin
    let parts = par::run(cfg.workers, |w| -> Result<Vec<u64>> {
        let (a, b) = par::chunk(cfg.trajectories, cfg.workers, w);
        let mut hist = vec![0u64; cfg.n + 1];
        for k in a..b {
            let mut rng = trajectory_rng(cfg.seed, k);
            let mut r = starts[rng.gen_range(0..starts.len())] as usize;
            let mut run = 0usize;
            for idx in 1..cfg.n {
                r = step(g, r, &mut rng)? as usize;
                if idx < s {
                    continue;
                }
                if !thin[r] {
                    break;
                }
                run += 1;
            }
            hist[run] += 1;
        }
        Ok(hist)
    });
    let mut hist = vec![0u64; cfg.n + 1];
    for p in parts {
        for (h, v) in hist.iter_mut().zip(p?) {
            *h += v;
        }
    }
    let total = cfg.trajectories as u64;
    let mut hits = Vec::with_capacity(ns.len());
    for &n in ns {
        // the middle has n - 2s points
        let need = n.saturating_sub(2 * s);
        hits.push(if need == 0 { total } else { hist[need..].iter().sum() });
    }
    let fractions: Vec<f64> = hits.iter().map(|&h| h as f64 / total as f64).collect();
    let se: Vec<f64> = fractions.iter().map(|&p| math::sqrt(p * (1.0 - p) / total as f64)).collect();
    let usable: Vec<usize> = (0..ns.len()).filter(|&k| ns[k] > 2 * s && hits[k] >= min_hits).collect();
    let mut warning = None;
    if usable.len() < ns.iter().filter(|&&n| n > 2 * s).count() {
        warning = Some(format!("fewer than {min_hits} concave hits at some n; those lengths are left out of the fit"));
    }
    let fit = if usable.len() >= 2 {
        let xs: Vec<f64> = usable.iter().map(|&k| ns[k] as f64).collect();
        let ys: Vec<f64> = usable.iter().map(|&k| math::ln(fractions[k])).collect();
        Some(fit_line(&xs, &ys)?)
    } else {
        warning = Some(String::from("not enough lengths with concave hits for a fit"));
        None
    };
    Ok(ConcaveStats {
        s,
        fitted_ns: usable.iter().map(|&k| ns[k]).collect(),
        ns: ns.to_vec(),
        hits,
        trajectories: total,
        fractions,
        se,
        fit,
        warning,
    })
}

/// Exact concave fractions by iterating the transfer operator of the walk
/// restricted to thin points, from the uniform law on thick points.
pub fn exact_concave_fractions(net: &Net, g: &WalkGraph, cfg: &WalkConfig, ns: &[usize]) -> Result<Vec<f64>> {
    cfg.validate(net, g)?;
    let thin = thin_tags(net, cfg)?;
    let starts = thick_points(net, cfg.eps)?;
    if starts.is_empty() {
        return invalid("the net has no thick point to start from");
    }
    let push = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (i, &m) in v.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let d = g.degree(i);
            for (j, w) in g.neighbors[i].iter().zip(&g.weights[i]) {
                out[*j as usize] += m * w / d;
            }
        }
        out
    };
    let mut v = vec![0.0; net.len()];
    for &i in &starts {
        v[i as usize] += 1.0 / starts.len() as f64;
    }
    for _ in 0..cfg.s {
        v = push(&v);
    }
    let max_n = ns.iter().copied().max().unwrap_or(0);
    let mut by_len = vec![1.0; max_n + 1];
    let mut first = true;
    for n in (2 * cfg.s + 1)..=max_n {
        if !first {
            v = push(&v);
        }
        first = false;
        for (m, &t) in v.iter_mut().zip(&thin) {
            if !t {
                *m = 0.0;
            }
        }
        by_len[n] = v.iter().sum();
    }
    Ok(ns.iter().map(|&n| by_len[n]).collect())
}

/// `ln` of the number of lifted `k`-step trajectories from the given
/// starts, for `k = 0..=steps`.
pub fn log_trajectory_counts(g: &WalkGraph, starts: &[u32], steps: usize) -> Vec<f64> {
    let mut v = vec![0.0; g.len()];
    for &i in starts {
        v[i as usize] += 1.0;
    }
    let mut out = vec![math::ln(starts.len() as f64)];
    let mut log_scale = 0.0;
    for _ in 0..steps {
        let mut next = vec![0.0; v.len()];
        for (i, &m) in v.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for (j, w) in g.neighbors[i].iter().zip(&g.weights[i]) {
                next[*j as usize] += m * w;
            }
        }
        let total: f64 = next.iter().sum();
        log_scale += math::ln(total);
        for x in next.iter_mut() {
            *x /= total;
        }
        v = next;
        out.push(log_scale);
    }
    out
}

/// Marks points along `seg` at spacing `τ − 2ε_n` and snaps each to its
/// nearest net point. A gap wider than `τ` after snapping is split by an
/// extra mark halfway, up to a fixed depth.
pub fn discretize_geodesic(seg: &GeodesicSegment, net: &Net, tau: f64, cfg: &WalkConfig) -> Result<Trajectory> {
    let eps_n = net.eps_n;
    let spacing = tau - 2.0 * eps_n;
    if !(spacing > 0.0) {
        return invalid("tau must exceed 2 eps_n");
    }
    let len = seg.length();
    let marks = math::ceil(len / spacing) as usize;
    let mut ts: Vec<f64> = (0..=marks.max(1)).map(|k| (k as f64 / marks.max(1) as f64).min(1.0)).collect();
    let snap = |t: f64| -> Result<(u32, f64)> {
        let z = ModelPoint { coords: vec![Coord::Plane(seg.point_at(t))] };
        let near = net.within(&z, 2.0 * eps_n);
        let best = near.into_iter().min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        best.ok_or_else(|| Error::Coverage(format!("no net point within 2 eps_n of the mark at t = {t:.4}")))
    };
    let mut snapped: Vec<(u32, f64)> = ts.iter().map(|&t| snap(t)).collect::<Result<_>>()?;
    for _ in 0..8 {
        let mut k = 0;
        let mut split = false;
        while k + 1 < ts.len() {
            let (a, b) = (snapped[k].0 as usize, snapped[k + 1].0 as usize);
            if net.distance(&net.points[a], &net.points[b]) > tau {
                let t = 0.5 * (ts[k] + ts[k + 1]);
                ts.insert(k + 1, t);
                snapped.insert(k + 1, snap(t)?);
                split = true;
                k += 2;
            } else {
                k += 1;
            }
        }
        if !split {
            break;
        }
    }
    let points: Vec<u32> = snapped.iter().map(|s| s.0).collect();
    let distances: Vec<f64> = points
        .windows(2)
        .map(|w| net.distance(&net.points[w[0] as usize], &net.points[w[1] as usize]))
        .collect();
    if distances.iter().any(|&d| d > tau) {
        return Err(Error::Coverage("snapped marks stay more than tau apart".into()));
    }
    let thin = points.iter().map(|&i| height(net, i as usize).map(|z| cfg.is_thin(&z))).collect::<Result<_>>()?;
    Ok(Trajectory { points, distances, thin })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineWalkDemo {
    pub capped: bool,
    pub ns: Vec<usize>,
    /// Fraction of walks whose points `1..n` all stay above the thin level.
    pub fractions: Vec<f64>,
    /// Slope of `ln(fraction)` against `n`.
    pub exponential_rate: Option<f64>,
    /// Slope of `ln(fraction)` against `ln n`.
    pub power_rate: Option<f64>,
}

/// Walk on a line factor in the arclength chart `s = ln u`, on the lattice
/// `ε_n Z`, started at the thin level `s = 0`. With `capped` the lattice
/// stops at the systole cap `s ≤ cap`; otherwise it is unbounded and the
/// walk is the symmetric one, whose excursions above the level have a
/// polynomial rather than exponential tail.
pub fn line_walk_demo(eps_n: f64, tau: f64, cap: f64, capped: bool, ns: &[usize], trajectories: usize, seed: u64) -> Result<LineWalkDemo> {
    if !(eps_n > 0.0) || !(tau >= eps_n) || ns.is_empty() {
        return invalid("line walk needs 0 < eps_n <= tau and some lengths");
    }
    let reach = math::floor(tau / eps_n) as i64;
    let top = math::floor(cap / eps_n) as i64;
    let max_n = *ns.iter().max().unwrap_or(&1);
    let mut survive = vec![0u64; max_n + 1];
    for k in 0..trajectories {
        let mut rng = trajectory_rng(seed, k);
        let mut pos = 0i64;
        let mut alive = 0usize;
        for idx in 1..max_n {
            let lo = pos - reach;
            let hi = if capped { (pos + reach).min(top) } else { pos + reach };
            pos = rng.gen_range(lo..=hi);
            if pos <= 0 {
                break;
            }
            alive = idx;
        }
        survive[alive] += 1;
    }
    let fractions: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let need = n.saturating_sub(1);
            survive[need.min(max_n)..].iter().sum::<u64>() as f64 / trajectories as f64
        })
        .collect();
    let pos: Vec<usize> = (0..ns.len()).filter(|&k| fractions[k] > 0.0 && ns[k] > 1).collect();
    let (exponential_rate, power_rate) = if pos.len() >= 2 {
        let xs: Vec<f64> = pos.iter().map(|&k| ns[k] as f64).collect();
        let ls: Vec<f64> = pos.iter().map(|&k| math::ln(ns[k] as f64)).collect();
        let ys: Vec<f64> = pos.iter().map(|&k| math::ln(fractions[k])).collect();
        (fit_line(&xs, &ys).ok().map(|f| f.slope), fit_line(&ls, &ys).ok().map(|f| f.slope))
    } else {
        (None, None)
    };
    Ok(LineWalkDemo { capped, ns: ns.to_vec(), fractions, exponential_rate, power_rate })
}
