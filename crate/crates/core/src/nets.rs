//! Greedy `(ε_n, 2ε_n)`-nets over plane regions and model-space balls,
//! net-point counting, entropy fits, packing scans and good/bad
//! classification of net points against a group orbit.

use crate::error::{invalid, Error, Result};
use crate::fuchsian::OrbitEnumeration;
use crate::hyperbolic::{ball_area, Point};
use crate::math;
use crate::model::{model_distance, Coord, FactorKind, ModelPoint, ModelSpace};
use crate::par;
use crate::quasi::Halton;
use crate::stats::{fit_log_slope, LineFit};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use hashbrown::HashMap;
use rand::Rng;

/// Regions of the upper half-plane, described in the chart `(x, t = ln y)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PlaneRegion {
    Point(Point),
    /// `B_radius(center) ∩ {y ≥ min_height}`; `min_height = 0` keeps the
    /// whole ball.
    Ball { center: Point, radius: f64, min_height: f64 },
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// `[0, period) × [y0, y1]` with `x` taken modulo `period`.
    PeriodicStrip { period: f64, y0: f64, y1: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Plane(PlaneRegion),
    /// Sup-metric ball of a model space intersected with its systole set.
    ModelBall { space: ModelSpace, center: ModelPoint, radius: f64 },
}

/// Hyperbolic distance with `x` optionally taken modulo a period.
pub fn plane_distance(p: &Point, q: &Point, period: Option<f64>) -> f64 {
    let mut dx = p.x - q.x;
    if let Some(t) = period {
        dx -= t * math::round(dx / t);
    }
    let dy = p.y - q.y;
    2.0 * math::asinh(math::sqrt(dx * dx + dy * dy) / (2.0 * math::sqrt(p.y * q.y)))
}

impl PlaneRegion {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            PlaneRegion::Point(p) => Point::new(p.x, p.y).is_ok(),
            PlaneRegion::Ball { center, radius, min_height } => {
                Point::new(center.x, center.y).is_ok()
                    && *radius > 0.0
                    && radius.is_finite()
                    && *min_height >= 0.0
                    && *min_height < center.y * math::exp(*radius)
            }
            PlaneRegion::Rect { x0, x1, y0, y1 } => x0 < x1 && *y0 > 0.0 && y0 < y1 && x1.is_finite() && y1.is_finite(),
            PlaneRegion::PeriodicStrip { period, y0, y1 } => *period > 0.0 && *y0 > 0.0 && y0 < y1 && y1.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("malformed plane region {self:?}"))
        }
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            PlaneRegion::PeriodicStrip { period, .. } => Some(*period),
            _ => None,
        }
    }

    /// Range of `t = ln y`.
    pub fn t_range(&self) -> (f64, f64) {
        match self {
            PlaneRegion::Point(p) => (math::ln(p.y), math::ln(p.y)),
            PlaneRegion::Ball { center, radius, min_height } => {
                let lo = math::ln(center.y) - radius;
                let lo = if *min_height > 0.0 { lo.max(math::ln(*min_height)) } else { lo };
                (lo, math::ln(center.y) + radius)
            }
            PlaneRegion::Rect { y0, y1, .. } | PlaneRegion::PeriodicStrip { y0, y1, .. } => (math::ln(*y0), math::ln(*y1)),
        }
    }

    /// Horizontal section at height `e^t`.
    pub fn x_range(&self, t: f64) -> (f64, f64) {
        match self {
            PlaneRegion::Point(p) => (p.x, p.x),
            PlaneRegion::Ball { center, radius, .. } => {
                let y = math::exp(t);
                let (lo, hi) = (center.y * math::exp(-radius), center.y * math::exp(*radius));
                let w = math::sqrt(((y - lo) * (hi - y)).max(0.0));
                (center.x - w, center.x + w)
            }
            PlaneRegion::Rect { x0, x1, .. } => (*x0, *x1),
            PlaneRegion::PeriodicStrip { period, .. } => (0.0, *period),
        }
    }

    pub fn contains(&self, z: &Point) -> bool {
        match self {
            PlaneRegion::Point(p) => p == z,
            PlaneRegion::Ball { center, radius, min_height } => {
                z.y >= *min_height && plane_distance(center, z, None) <= *radius
            }
            PlaneRegion::Rect { x0, x1, y0, y1 } => (*x0..=*x1).contains(&z.x) && (*y0..=*y1).contains(&z.y),
            PlaneRegion::PeriodicStrip { y0, y1, .. } => (*y0..=*y1).contains(&z.y),
        }
    }
}

const CDF_CELLS: usize = 2048;

/// Candidate stream for a plane region: `t` is drawn half the time from the
/// hyperbolic area measure and half the time uniformly, then `x` uniformly
/// across the section.
struct PlaneSampler {
    region: PlaneRegion,
    t0: f64,
    dt: f64,
    cdf: Vec<f64>,
    area: f64,
}

impl PlaneSampler {
    fn new(region: &PlaneRegion) -> PlaneSampler {
        let (t0, t1) = region.t_range();
        let dt = (t1 - t0) / CDF_CELLS as f64;
        let mut cdf = Vec::with_capacity(CDF_CELLS + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for k in 0..CDF_CELLS {
            let t = t0 + (k as f64 + 0.5) * dt;
            let (a, b) = region.x_range(t);
            acc += (b - a) * math::exp(-t) * dt;
            cdf.push(acc);
        }
        PlaneSampler { region: region.clone(), t0, dt, cdf, area: acc }
    }

    fn sample(&self, u: &[f64]) -> Point {
        if let PlaneRegion::Point(p) = self.region {
            return p;
        }
        let t = if u[0] < 0.5 {
            let target = u[1] * self.area;
            let k = self.cdf.partition_point(|&c| c <= target).clamp(1, CDF_CELLS) - 1;
            let (c0, c1) = (self.cdf[k], self.cdf[k + 1]);
            let frac = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
            self.t0 + (k as f64 + frac) * self.dt
        } else {
            self.t0 + u[1] * self.dt * CDF_CELLS as f64
        };
        let (a, b) = self.region.x_range(t);
        Point { x: a + u[2] * (b - a), y: math::exp(t) }
    }
}

/// Uniform sampler (by area or arclength) of a model-space sup-ball inside
/// the systole set.
struct ModelSampler {
    center: ModelPoint,
    factors: Vec<FactorKind>,
    radius: f64,
    cap: f64,
    volume: f64,
}

impl ModelSampler {
    fn new(space: &ModelSpace, center: &ModelPoint, radius: f64) -> Result<ModelSampler> {
        if space.distance(center, center).is_err() || !space.in_systole_set(center, space.eps_t) {
            return invalid("model ball centre must be a systole-set point of the space");
        }
        if !(radius > 0.0) {
            return invalid("model ball radius must be positive");
        }
        let cap = math::ln(1.0 / space.eps_t);
        let mut volume = 1.0;
        for (c, f) in center.coords.iter().zip(&space.factors) {
            volume *= match (c, f) {
                (Coord::Plane(_), _) => ball_area(radius),
                (Coord::Line(u), _) => (math::ln(*u) + radius).min(cap) - (math::ln(*u) - radius),
                (Coord::Base(b), FactorKind::Base { diameter, .. }) if *diameter > 0.0 => {
                    (b + radius).min(*diameter) - (b - radius).max(0.0)
                }
                _ => 1.0,
            };
        }
        Ok(ModelSampler { center: center.clone(), factors: space.factors.clone(), radius, cap, volume })
    }

    fn dim(&self) -> usize {
        self.factors.iter().map(|f| if matches!(f, FactorKind::Plane) { 2 } else { 1 }).sum()
    }

    fn sample(&self, u: &[f64]) -> ModelPoint {
        let r = self.radius;
        let mut k = 0;
        let coords = self
            .center
            .coords
            .iter()
            .zip(&self.factors)
            .map(|(c, f)| match (c, f) {
                (Coord::Plane(p), _) => {
                    let rho = 2.0 * math::asinh(math::sqrt(u[k]) * math::sinh(0.5 * r));
                    let z = p.exp(rho, 2.0 * math::PI * u[k + 1]);
                    k += 2;
                    Coord::Plane(z)
                }
                (Coord::Line(v), _) => {
                    let s = math::ln(*v);
                    let (lo, hi) = (s - r, (s + r).min(self.cap));
                    k += 1;
                    Coord::Line(math::exp(lo + u[k - 1] * (hi - lo)))
                }
                (Coord::Base(b), FactorKind::Base { diameter, .. }) => {
                    let (lo, hi) = ((b - r).max(0.0), (b + r).min(*diameter));
                    k += 1;
                    Coord::Base(lo + u[k - 1] * (hi - lo))
                }
                _ => *c,
            })
            .collect();
        ModelPoint { coords }
    }
}

enum Sampler {
    Plane(PlaneSampler),
    Model(ModelSampler),
}

impl Sampler {
    fn dim(&self) -> usize {
        match self {
            Sampler::Plane(_) => 3,
            Sampler::Model(m) => m.dim(),
        }
    }

    fn sample(&self, u: &[f64]) -> ModelPoint {
        match self {
            Sampler::Plane(s) => ModelPoint { coords: vec![Coord::Plane(s.sample(u))] },
            Sampler::Model(m) => m.sample(u),
        }
    }

    /// Expected number of disjoint `ε/2`-balls, plus a term for the number
    /// of `t`-rows so thin sections still get candidates.
    fn cells(&self, eps: f64) -> f64 {
        match self {
            Sampler::Plane(s) => {
                if matches!(s.region, PlaneRegion::Point(_)) {
                    return 1.0;
                }
                s.area / ball_area(0.5 * eps) + s.dt * CDF_CELLS as f64 / eps
            }
            Sampler::Model(m) => {
                let small: f64 = m
                    .factors
                    .iter()
                    .map(|f| match f {
                        FactorKind::Plane => ball_area(0.5 * eps),
                        FactorKind::Base { diameter, .. } if *diameter == 0.0 => 1.0,
                        _ => eps,
                    })
                    .product();
                m.volume / small
            }
        }
    }
}

/// Cell index over plane points: rows of height `h` in `t = ln y`, columns
/// of width `h e^{row h}` in `x`, so every cell has hyperbolic size about `h`.
#[derive(Debug, Clone)]
pub struct PlaneIndex {
    h: f64,
    period: Option<f64>,
    cells: HashMap<(i64, i64), Vec<u32>>,
    len: usize,
}

impl PlaneIndex {
    pub fn new(h: f64, period: Option<f64>) -> PlaneIndex {
        PlaneIndex { h, period, cells: HashMap::new(), len: 0 }
    }

    fn row(&self, y: f64) -> i64 {
        math::floor(math::ln(y) / self.h) as i64
    }

    fn col_width(&self, row: i64) -> f64 {
        self.h * math::exp(row as f64 * self.h)
    }

    fn wrap(&self, x: f64) -> f64 {
        match self.period {
            Some(t) => x - t * math::floor(x / t),
            None => x,
        }
    }

    pub fn insert(&mut self, z: &Point, id: u32) {
        let row = self.row(z.y);
        let col = math::floor(self.wrap(z.x) / self.col_width(row)) as i64;
        self.cells.entry((row, col)).or_default().push(id);
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Column ranges per row covering `B_r(z)`; `None` when scanning them
    /// would cost more than visiting every stored point.
    fn ranges(&self, z: &Point, r: f64) -> Option<Vec<(i64, i64, i64)>> {
        let t = math::ln(z.y);
        let (r0, r1) = (math::floor((t - r) / self.h) as i64, math::floor((t + r) / self.h) as i64);
        let w = z.y * math::sinh(r);
        let mut out = Vec::new();
        let mut cost = 0.0;
        for row in r0..=r1 {
            let cw = self.col_width(row);
            match self.period {
                Some(p) => {
                    let ncol = math::ceil(p / cw) as i64;
                    if 2.0 * w >= p {
                        out.push((row, 0, ncol - 1));
                        cost += ncol as f64;
                    } else {
                        let a = self.wrap(z.x - w);
                        let b = a + 2.0 * w;
                        if b < p {
                            out.push((row, math::floor(a / cw) as i64, math::floor(b / cw) as i64));
                        } else {
                            out.push((row, math::floor(a / cw) as i64, ncol - 1));
                            out.push((row, 0, math::floor((b - p) / cw) as i64));
                        }
                        cost += 2.0 * w / cw + 2.0;
                    }
                }
                None => {
                    out.push((row, math::floor((z.x - w) / cw) as i64, math::floor((z.x + w) / cw) as i64));
                    cost += 2.0 * w / cw + 1.0;
                }
            }
            if cost > 4.0 * self.len as f64 + 64.0 {
                return None;
            }
        }
        Some(out)
    }

    /// Ids of every stored point that may lie within `r` of `z`, plus
    /// possibly others; callers filter by exact distance.
    pub fn candidates(&self, z: &Point, r: f64, out: &mut Vec<u32>) {
        out.clear();
        match self.ranges(z, r) {
            Some(ranges) => {
                for (row, c0, c1) in ranges {
                    for col in c0..=c1 {
                        if let Some(ids) = self.cells.get(&(row, col)) {
                            out.extend_from_slice(ids);
                        }
                    }
                }
            }
            None => {
                for ids in self.cells.values() {
                    out.extend_from_slice(ids);
                }
            }
        }
    }
}

/// Read-only index over plane points: rows of height `h` in `t = ln y`,
/// each sorted by `x`.
#[derive(Debug, Clone)]
pub struct SortedPlaneIndex {
    h: f64,
    rows: HashMap<i64, Vec<(f64, u32)>>,
}

impl SortedPlaneIndex {
    pub fn new(h: f64, points: impl IntoIterator<Item = (Point, u32)>) -> SortedPlaneIndex {
        let mut rows: HashMap<i64, Vec<(f64, u32)>> = HashMap::new();
        for (p, id) in points {
            rows.entry(math::floor(math::ln(p.y) / h) as i64).or_default().push((p.x, id));
        }
        for r in rows.values_mut() {
            r.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        SortedPlaneIndex { h, rows }
    }

    /// Ids of every point that may lie within `r` of `z`.
    pub fn candidates(&self, z: &Point, r: f64, out: &mut Vec<u32>) {
        out.clear();
        let t = math::ln(z.y);
        let (r0, r1) = (math::floor((t - r) / self.h) as i64, math::floor((t + r) / self.h) as i64);
        let w = z.y * math::sinh(r);
        for row in r0..=r1 {
            if let Some(v) = self.rows.get(&row) {
                let a = v.partition_point(|e| e.0 < z.x - w);
                let b = v.partition_point(|e| e.0 <= z.x + w);
                out.extend(v[a..b].iter().map(|e| e.1));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetConfig {
    pub eps_n: f64,
    pub seed: u64,
    /// Candidates per expected `ε_n/2`-cell.
    pub oversample: f64,
    /// Probes used to certify the covering radius.
    pub probes: usize,
}

impl NetConfig {
    pub fn new(eps_n: f64, seed: u64) -> NetConfig {
        NetConfig { eps_n, seed, oversample: 20.0, probes: 10_000 }
    }
}

/// An `ε_n`-separated point set whose covering radius was measured on
/// random probes.
#[derive(Debug, Clone)]
pub struct Net {
    pub points: Vec<ModelPoint>,
    pub eps_n: f64,
    pub region: Region,
    pub factors: Vec<FactorKind>,
    /// Largest probe-to-net distance seen during certification.
    pub covering_radius: f64,
    pub candidates: usize,
    pub warning: Option<String>,
    key: Option<usize>,
    period: Option<f64>,
    index: Option<PlaneIndex>,
}

pub fn build_net(region: &Region, eps_n: f64, seed: u64) -> Result<Net> {
    build_net_with(region, &NetConfig::new(eps_n, seed))
}

/// Greedy maximal `ε_n`-separated subset of a quasi-random candidate stream.
pub fn build_net_with(region: &Region, cfg: &NetConfig) -> Result<Net> {
    if !(cfg.eps_n > 0.0) || !cfg.eps_n.is_finite() {
        return invalid("net separation must be positive");
    }
    if !(cfg.oversample >= 1.0) {
        return invalid("oversample must be at least 1");
    }
    let (sampler, factors, period) = match region {
        Region::Plane(p) => {
            p.validate()?;
            (Sampler::Plane(PlaneSampler::new(p)), vec![FactorKind::Plane], p.period())
        }
        Region::ModelBall { space, center, radius } => {
            (Sampler::Model(ModelSampler::new(space, center, *radius)?), space.factors.clone(), None)
        }
    };
    if sampler.dim() > 8 {
        return invalid("at most four plane factors are supported");
    }
    let key = factors.iter().position(|f| matches!(f, FactorKind::Plane));
    let mut net = Net {
        points: Vec::new(),
        eps_n: cfg.eps_n,
        region: region.clone(),
        factors,
        covering_radius: 0.0,
        candidates: 0,
        warning: None,
        key,
        period,
        index: key.map(|_| PlaneIndex::new(cfg.eps_n, period)),
    };
    if let Region::Plane(PlaneRegion::Point(p)) = region {
        net.push(ModelPoint { coords: vec![Coord::Plane(*p)] });
        net.candidates = 1;
        return Ok(net);
    }
    let n_cand = math::ceil(cfg.oversample * sampler.cells(cfg.eps_n)) as usize;
    let mut halton = Halton::new(sampler.dim(), cfg.seed);
    let mut u = [0.0; 8];
    let mut buf = Vec::new();
    for _ in 0..n_cand {
        halton.next_into(&mut u);
        let z = sampler.sample(&u);
        if net.nearest_within(&z, cfg.eps_n, &mut buf).is_none_or(|(_, d)| d >= cfg.eps_n) {
            net.push(z);
        }
    }
    net.candidates = n_cand;
    // covering certification on an independent stream
    let mut rng = par::rng(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut worst: f64 = 0.0;
    let dim = sampler.dim();
    for _ in 0..cfg.probes {
        for v in u.iter_mut().take(dim) {
            *v = rng.gen::<f64>();
        }
        let z = sampler.sample(&u);
        let d = match net.nearest_within(&z, 2.0 * cfg.eps_n, &mut buf) {
            Some((_, d)) => d,
            None => net.nearest(&z).map_or(f64::INFINITY, |(_, d)| d),
        };
        worst = worst.max(d);
    }
    net.covering_radius = worst;
    if worst > 2.0 * cfg.eps_n {
        net.warning = Some(format!(
            "covering not certified: probe at distance {worst:.4} > 2 eps_n = {:.4}",
            2.0 * cfg.eps_n
        ));
    }
    Ok(net)
}

impl Net {
    /// Net from given points, e.g. read back from CSV. Separation is
    /// checked; the covering radius is left unknown (infinite).
    pub fn from_points(region: Region, factors: Vec<FactorKind>, points: Vec<ModelPoint>, eps_n: f64) -> Result<Net> {
        if !(eps_n > 0.0) {
            return invalid("net separation must be positive");
        }
        if points.iter().any(|p| p.coords.len() != factors.len()) {
            return invalid("point does not match the factor layout");
        }
        let key = factors.iter().position(|f| matches!(f, FactorKind::Plane));
        let period = match &region {
            Region::Plane(p) => p.period(),
            _ => None,
        };
        let mut net = Net {
            points: Vec::new(),
            eps_n,
            region,
            factors,
            covering_radius: f64::INFINITY,
            candidates: points.len(),
            warning: None,
            key,
            period,
            index: key.map(|_| PlaneIndex::new(eps_n, period)),
        };
        let mut buf = Vec::new();
        for p in points {
            if let Some((_, d)) = net.nearest_within(&p, eps_n, &mut buf) {
                if d < eps_n {
                    return invalid(format!("points at distance {d} < eps_n"));
                }
            }
            net.push(p);
        }
        Ok(net)
    }

    fn push(&mut self, z: ModelPoint) {
        let id = self.points.len() as u32;
        if let (Some(k), Some(ix)) = (self.key, self.index.as_mut()) {
            if let Coord::Plane(p) = z.coords[k] {
                ix.insert(&p, id);
            }
        }
        self.points.push(z);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    /// Plane coordinate of net point `i` in a single-plane net.
    pub fn plane_point(&self, i: usize) -> Option<Point> {
        match self.points[i].coords.first() {
            Some(Coord::Plane(p)) if self.factors.len() == 1 => Some(*p),
            _ => None,
        }
    }

    /// Sup distance, with the plane coordinate taken modulo the period of a
    /// periodic strip.
    pub fn distance(&self, a: &ModelPoint, b: &ModelPoint) -> f64 {
        match (self.period, a.coords.as_slice(), b.coords.as_slice()) {
            (Some(t), [Coord::Plane(p)], [Coord::Plane(q)]) => plane_distance(p, q, Some(t)),
            _ => model_distance(a, b).unwrap_or(f64::INFINITY),
        }
    }

    fn scan(&self, z: &ModelPoint, r: f64, buf: &mut Vec<u32>, mut f: impl FnMut(u32, f64)) {
        match (self.key, &self.index) {
            (Some(k), Some(ix)) => {
                let Coord::Plane(p) = z.coords[k] else { return };
                ix.candidates(&p, r, buf);
                for &id in buf.iter() {
                    let d = self.distance(z, &self.points[id as usize]);
                    if d <= r {
                        f(id, d);
                    }
                }
            }
            _ => {
                for (id, q) in self.points.iter().enumerate() {
                    let d = self.distance(z, q);
                    if d <= r {
                        f(id as u32, d);
                    }
                }
            }
        }
    }

    /// Net points within `r` of `z`, with their distances.
    pub fn within(&self, z: &ModelPoint, r: f64) -> Vec<(u32, f64)> {
        let mut out = Vec::new();
        let mut buf = Vec::new();
        self.scan(z, r, &mut buf, |id, d| out.push((id, d)));
        out
    }

    fn nearest_within(&self, z: &ModelPoint, r: f64, buf: &mut Vec<u32>) -> Option<(u32, f64)> {
        let mut best: Option<(u32, f64)> = None;
        self.scan(z, r, buf, |id, d| {
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((id, d));
            }
        });
        best
    }

    /// Closest net point by exhaustive scan.
    pub fn nearest(&self, z: &ModelPoint) -> Option<(u32, f64)> {
        let mut best: Option<(u32, f64)> = None;
        for (id, q) in self.points.iter().enumerate() {
            let d = self.distance(z, q);
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((id as u32, d));
            }
        }
        best
    }

    /// Smallest pairwise distance (exhaustive; for checks on small nets).
    pub fn min_separation(&self) -> f64 {
        let mut m = f64::INFINITY;
        let mut buf = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            self.scan(p, self.eps_n * 1.5, &mut buf, |id, d| {
                if id as usize != i {
                    m = m.min(d);
                }
            });
        }
        m
    }

    /// CSV with a `# factors:` header line and one net point per row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# factors:");
        for f in &self.factors {
            s.push_str(match f {
                FactorKind::Plane => " plane",
                FactorKind::Line => " line",
                FactorKind::Base { .. } => " base",
            });
        }
        s.push_str(&format!("\n# eps_n: {}\n", self.eps_n));
        for p in &self.points {
            let cols: Vec<String> = p
                .coords
                .iter()
                .map(|c| match c {
                    Coord::Plane(z) => format!("{},{}", z.x, z.y),
                    Coord::Line(u) => format!("{u}"),
                    Coord::Base(b) => format!("{b}"),
                })
                .collect();
            s.push_str(&cols.join(","));
            s.push('\n');
        }
        s
    }
}

/// Points of a net CSV, parsed against a factor layout.
pub fn points_from_csv(text: &str, factors: &[FactorKind]) -> Result<Vec<ModelPoint>> {
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number in `{line}`"))))
            .collect::<Result<_>>()?;
        let mut k = 0;
        let mut coords = Vec::new();
        for f in factors {
            let need = if matches!(f, FactorKind::Plane) { 2 } else { 1 };
            if k + need > vals.len() {
                return invalid(format!("row `{line}` is too short"));
            }
            coords.push(match f {
                FactorKind::Plane => Coord::Plane(Point::new(vals[k], vals[k + 1])?),
                FactorKind::Line => Coord::Line(vals[k]),
                FactorKind::Base { .. } => Coord::Base(vals[k]),
            });
            k += need;
        }
        if k != vals.len() {
            return invalid(format!("row `{line}` is too long"));
        }
        out.push(ModelPoint { coords });
    }
    Ok(out)
}

/// `#(net ∩ B_R(p))`.
pub fn net_count(net: &Net, p: &ModelPoint, r: f64) -> usize {
    net.within(p, r).len()
}

/// Counts for several radii from one pass over the net.
pub fn net_counts(net: &Net, p: &ModelPoint, radii: &[f64], workers: usize) -> Vec<usize> {
    let parts = par::run(workers, |w| {
        let (a, b) = par::chunk(net.len(), workers, w);
        let mut c = vec![0usize; radii.len()];
        for q in &net.points[a..b] {
            let d = net.distance(p, q);
            for (k, &r) in radii.iter().enumerate() {
                if d <= r {
                    c[k] += 1;
                }
            }
        }
        c
    });
    let mut total = vec![0usize; radii.len()];
    for c in parts {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropySource {
    NetPoints,
    LatticePoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    pub source: EntropySource,
    pub radii: Vec<f64>,
    pub log_counts: Vec<f64>,
    pub value: f64,
    pub interval: (f64, f64),
    pub fit: LineFit,
}

/// Slope of `log count` against `R`.
pub fn fit_entropy(radii: &[f64], counts: &[usize], source: EntropySource) -> Result<EntropyEstimate> {
    if radii.len() < 4 {
        return invalid("entropy fit needs at least four radii");
    }
    if counts.len() != radii.len() {
        return invalid("one count per radius required");
    }
    let ys: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let fit = fit_log_slope(radii, &ys)?;
    Ok(EntropyEstimate {
        source,
        radii: radii.to_vec(),
        log_counts: ys.iter().map(|&y| math::ln(y)).collect(),
        value: fit.slope,
        interval: fit.interval(2.0),
        fit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingReport {
    pub radius: f64,
    pub centers: Vec<u32>,
    pub counts: Vec<usize>,
    pub max: usize,
    pub min: usize,
}

/// Net points in `B_C(c)` for up to `max_centers` net points `c`, spread
/// evenly through the net's construction order.
pub fn verify_packing(net: &Net, c: f64, max_centers: usize) -> PackingReport {
    let n = net.len();
    let m = max_centers.min(n).max(1);
    let centers: Vec<u32> = (0..m).map(|k| ((k * n) / m) as u32).filter(|&i| (i as usize) < n).collect();
    let counts: Vec<usize> = centers.iter().map(|&i| net.within(&net.points[i as usize], c).len()).collect();
    PackingReport {
        radius: c,
        max: counts.iter().copied().max().unwrap_or(0),
        min: counts.iter().copied().min().unwrap_or(0),
        centers,
        counts,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTag {
    pub net_index: u32,
    /// Distance to the nearest orbit point, when the enumerated orbit is
    /// large enough to certify it.
    pub distance: Option<f64>,
    /// Orbit record of the nearest orbit point (lowest index on ties).
    pub nearest: Option<u32>,
    pub good: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodBadClassification {
    pub radius: f64,
    pub eps_b: f64,
    pub tags: Vec<PointTag>,
    pub good: usize,
    pub bad: usize,
    /// `(orbit record, #{net points whose nearest orbit point is γp and
    /// which lie within R of γp})`, by record index.
    pub buckets: Vec<(u32, usize)>,
}

impl GoodBadClassification {
    pub fn bad_fraction(&self) -> f64 {
        self.bad as f64 / (self.good + self.bad).max(1) as f64
    }

    pub fn bucket(&self, record: u32) -> usize {
        self.buckets.iter().find(|b| b.0 == record).map_or(0, |b| b.1)
    }
}

/// Tags every net point of `B_R(p)` good (within `ε_b R` of the orbit) or
/// bad, and buckets them by nearest orbit point.
pub fn classify_good_bad(
    net: &Net,
    orbit: &OrbitEnumeration,
    p: &Point,
    r: f64,
    eps_b: f64,
    workers: usize,
) -> Result<GoodBadClassification> {
    if net.factors.len() != 1 || net.key != Some(0) || net.period.is_some() {
        return invalid("good/bad classification needs a non-periodic plane net");
    }
    if !(r > 0.0) || !(eps_b >= 0.0) {
        return invalid("need R > 0 and eps_b >= 0");
    }
    if orbit.base != *p {
        return invalid("orbit base point differs from p");
    }
    if orbit.radius < r * (1.0 + eps_b) {
        return Err(Error::InvalidInput(format!(
            "orbit enumerated to {} but R(1 + eps_b) = {}",
            orbit.radius,
            r * (1.0 + eps_b)
        )));
    }
    let index = SortedPlaneIndex::new(
        0.5,
        orbit.records.iter().enumerate().filter(|(_, rec)| rec.distance <= orbit.radius).map(|(i, rec)| (rec.point, i as u32)),
    );
    let members: Vec<(u32, Point, f64)> = net
        .points
        .iter()
        .enumerate()
        .filter_map(|(i, q)| match q.coords[0] {
            Coord::Plane(z) => {
                let d = plane_distance(p, &z, None);
                (d <= r).then_some((i as u32, z, d))
            }
            _ => None,
        })
        .collect();
    let parts = par::run(workers, |w| {
        let (a, b) = par::chunk(members.len(), workers, w);
        let mut buf = Vec::new();
        let mut tags = Vec::with_capacity(b - a);
        for &(i, z, d0) in &members[a..b] {
            let mut best: Option<(u32, f64)> = None;
            let mut search = |rho: f64, best: &mut Option<(u32, f64)>| {
                index.candidates(&z, rho, &mut buf);
                for &id in buf.iter() {
                    let d = plane_distance(&z, &orbit.records[id as usize].point, None);
                    if d <= rho && best.is_none_or(|(bi, bd)| d < bd || (d == bd && id < bi)) {
                        *best = Some((id, d));
                    }
                }
            };
            // widen until something is found or the orbit stops being complete
            let limit = orbit.radius - d0;
            let mut rho = (eps_b * r).min(limit);
            loop {
                search(rho, &mut best);
                if best.is_some() || rho >= limit {
                    break;
                }
                rho = (1.5 * rho).max(rho + 0.25).min(limit);
            }
            tags.push(PointTag {
                net_index: i,
                distance: best.map(|b| b.1),
                nearest: best.map(|b| b.0),
                good: best.is_some_and(|b| b.1 <= eps_b * r),
            });
        }
        tags
    });
    let tags: Vec<PointTag> = parts.into_iter().flatten().collect();
    let good = tags.iter().filter(|t| t.good).count();
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for t in &tags {
        if let (Some(g), Some(d)) = (t.nearest, t.distance) {
            if d <= r {
                *counts.entry(g).or_default() += 1;
            }
        }
    }
    let mut buckets: Vec<(u32, usize)> = counts.into_iter().collect();
    buckets.sort_unstable();
    Ok(GoodBadClassification { radius: r, eps_b, bad: tags.len() - good, good, tags, buckets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::ball_euclidean;

    #[test]
    fn ball_sections_match_the_euclidean_disc() {
        let c = Point::new(0.3, 2.0).unwrap();
        let reg = PlaneRegion::Ball { center: c, radius: 1.5, min_height: 0.0 };
        let (cx, cy, rho) = ball_euclidean(&c, 1.5);
        for k in 1..10 {
            let y = cy - rho + 2.0 * rho * k as f64 / 10.0;
            let (a, b) = reg.x_range(math::ln(y));
            let w = math::sqrt(rho * rho - (y - cy) * (y - cy));
            assert!((a - (cx - w)).abs() < 1e-9 && (b - (cx + w)).abs() < 1e-9);
        }
    }

    #[test]
    fn sampler_area_matches_ball_area() {
        let reg = PlaneRegion::Ball { center: Point::i(), radius: 3.0, min_height: 0.0 };
        let s = PlaneSampler::new(&reg);
        assert!((s.area / ball_area(3.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn index_finds_everything_in_range() {
        let mut rng = par::rng(3);
        for period in [None, Some(1.0)] {
            let mut ix = PlaneIndex::new(0.4, period);
            let pts: Vec<Point> = (0..2000)
                .map(|_| Point { x: rng.gen_range(-3.0..3.0), y: math::exp(rng.gen_range(-2.0..4.0)) })
                .collect();
            for (i, p) in pts.iter().enumerate() {
                ix.insert(p, i as u32);
            }
            let mut buf = Vec::new();
            for _ in 0..200 {
                let z = Point { x: rng.gen_range(-3.0..3.0), y: math::exp(rng.gen_range(-2.0..4.0)) };
                let r = rng.gen_range(0.1..3.0);
                ix.candidates(&z, r, &mut buf);
                for (i, p) in pts.iter().enumerate() {
                    if plane_distance(&z, p, period) <= r {
                        assert!(buf.contains(&(i as u32)));
                    }
                }
            }
        }
    }

    #[test]
    fn periodic_distance_uses_the_nearest_translate() {
        let a = Point::new(0.05, 1.0).unwrap();
        let b = Point::new(0.95, 1.0).unwrap();
        let c = Point::new(-0.05, 1.0).unwrap();
        assert!((plane_distance(&a, &b, Some(1.0)) - plane_distance(&a, &c, None)).abs() < 1e-12);
    }
}
