//! Sup-product model of a thin region of Teichmüller space.
//!
//! Two-sided curves contribute a hyperbolic plane factor with coordinates
//! `(twist, 1/length)`. One-sided curves contribute a line factor with
//! coordinate `u = 1/length` and metric `|ln(u/u')|`. An abstract thick
//! base factor carries the rest of the surface. Distances are the supremum
//! of the factor distances.
//!
//! The Norbury measure in these charts is `dx dy / y²` on plane factors and
//! `coth(1/u) du / u²` on line factors. In the arclength chart `s = ln u`
//! of a line factor this is `coth(e^{-s}) e^{-s} ds`.

use crate::error::{invalid, Error, Result};
use crate::hyperbolic::{ball_area, ball_euclidean, distance, GeodesicSegment, Point};
use crate::math;
use crate::par;
use crate::stats::Accum;
use alloc::format;
use alloc::vec::Vec;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorKind {
    Plane,
    Line,
    /// Interval `[0, diameter]` with the usual metric and Lebesgue measure
    /// normalised to total mass one; diameter zero is a point.
    Base { exponent: f64, diameter: f64 },
}

impl FactorKind {
    /// Entropy exponent used when counting net points in a product region.
    pub fn exponent(&self) -> f64 {
        match self {
            FactorKind::Plane => 1.0,
            FactorKind::Line => 0.0,
            FactorKind::Base { exponent, .. } => *exponent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coord {
    Plane(Point),
    /// `u = 1/length > 0`.
    Line(f64),
    Base(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint {
    pub coords: Vec<Coord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    pub factors: Vec<FactorKind>,
    /// Systole threshold: one-sided curves are kept at length `≥ eps_t`.
    pub eps_t: f64,
}

fn factor_distance(a: &Coord, b: &Coord) -> Result<f64> {
    match (a, b) {
        (Coord::Plane(p), Coord::Plane(q)) => Ok(distance(p, q)),
        (Coord::Line(u), Coord::Line(v)) => Ok(math::abs(math::ln(u / v))),
        (Coord::Base(s), Coord::Base(t)) => Ok(math::abs(s - t)),
        _ => invalid("factor kinds differ"),
    }
}

/// Sup of the factor distances.
pub fn model_distance(x: &ModelPoint, y: &ModelPoint) -> Result<f64> {
    if x.coords.len() != y.coords.len() {
        return invalid("model points have different factor counts");
    }
    let mut d: f64 = 0.0;
    for (a, b) in x.coords.iter().zip(&y.coords) {
        d = d.max(factor_distance(a, b)?);
    }
    Ok(d)
}

/// Canonical sup-metric geodesic: every factor moves along its own geodesic
/// at constant speed, all arriving together. `t ∈ [0, 1]`.
pub fn interpolate(x: &ModelPoint, y: &ModelPoint, t: f64) -> ModelPoint {
    let coords = x
        .coords
        .iter()
        .zip(&y.coords)
        .map(|(a, b)| match (a, b) {
            (Coord::Plane(p), Coord::Plane(q)) => Coord::Plane(GeodesicSegment::new(*p, *q).point_at(t)),
            (Coord::Line(u), Coord::Line(v)) => {
                let (s0, s1) = (math::ln(*u), math::ln(*v));
                Coord::Line(math::exp(s0 + t * (s1 - s0)))
            }
            (Coord::Base(s), Coord::Base(r)) => Coord::Base(s + t * (r - s)),
            _ => *a,
        })
        .collect();
    ModelPoint { coords }
}

impl ModelSpace {
    pub fn new(factors: Vec<FactorKind>, eps_t: f64) -> Result<ModelSpace> {
        if factors.is_empty() {
            return invalid("model space needs at least one factor");
        }
        if !(eps_t > 0.0 && eps_t < 1.0) {
            return invalid("systole threshold must lie in (0, 1)");
        }
        for f in &factors {
            if let FactorKind::Base { exponent, diameter } = f {
                if !(*exponent >= 0.0) || !(*diameter >= 0.0) || !diameter.is_finite() {
                    return invalid("base factor needs exponent >= 0 and finite diameter >= 0");
                }
            }
        }
        Ok(ModelSpace { factors, eps_t })
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.factors.iter().map(FactorKind::exponent).collect()
    }

    pub fn plane_count(&self) -> usize {
        self.factors.iter().filter(|f| matches!(f, FactorKind::Plane)).count()
    }

    /// Validated point of this space.
    pub fn point(&self, coords: Vec<Coord>) -> Result<ModelPoint> {
        if coords.len() != self.factors.len() {
            return invalid(format!("expected {} coordinates, got {}", self.factors.len(), coords.len()));
        }
        for (f, c) in self.factors.iter().zip(&coords) {
            let ok = match (f, c) {
                (FactorKind::Plane, Coord::Plane(p)) => Point::new(p.x, p.y).is_ok(),
                (FactorKind::Line, Coord::Line(u)) => u.is_finite() && *u > 0.0,
                (FactorKind::Base { diameter, .. }, Coord::Base(s)) => *s >= 0.0 && *s <= *diameter,
                _ => false,
            };
            if !ok {
                return invalid(format!("coordinate {c:?} does not fit factor {f:?}"));
            }
        }
        Ok(ModelPoint { coords })
    }

    pub fn distance(&self, x: &ModelPoint, y: &ModelPoint) -> Result<f64> {
        if x.coords.len() != self.factors.len() {
            return invalid("point does not belong to this space");
        }
        model_distance(x, y)
    }

    /// Lengths of one-sided curves are raised to at least `eps`:
    /// `u ↦ min(u, 1/eps)`.
    pub fn systole_projection_at(&self, x: &ModelPoint, eps: f64) -> ModelPoint {
        let cap = 1.0 / eps;
        let coords = x
            .coords
            .iter()
            .map(|c| match c {
                Coord::Line(u) if *u > cap => Coord::Line(cap),
                other => *other,
            })
            .collect();
        ModelPoint { coords }
    }

    pub fn systole_projection(&self, x: &ModelPoint) -> ModelPoint {
        self.systole_projection_at(x, self.eps_t)
    }

    /// No one-sided curve shorter than `eps`.
    pub fn in_systole_set(&self, x: &ModelPoint, eps: f64) -> bool {
        x.coords.iter().all(|c| match c {
            Coord::Line(u) => *u <= 1.0 / eps,
            _ => true,
        })
    }

    /// No curve of either kind shorter than `eps`.
    pub fn is_thick(&self, x: &ModelPoint, eps: f64) -> bool {
        x.coords.iter().all(|c| match c {
            Coord::Plane(p) => p.y <= 1.0 / eps,
            Coord::Line(u) => *u <= 1.0 / eps,
            Coord::Base(_) => true,
        })
    }
}

/// Piecewise canonical-geodesic path through `points`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPath {
    pub points: Vec<ModelPoint>,
}

impl ModelPath {
    pub fn new(points: Vec<ModelPoint>) -> Result<ModelPath> {
        if points.is_empty() {
            return invalid("a path needs at least one point");
        }
        let n = points[0].coords.len();
        if points.iter().any(|p| p.coords.len() != n) {
            return invalid("path points have different factor counts");
        }
        Ok(ModelPath { points })
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| model_distance(&w[0], &w[1]).expect("path points share a layout"))
            .collect()
    }

    pub fn length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    /// Point at arclength `a` from the start, clamped to the path.
    pub fn point_at(&self, a: f64) -> ModelPoint {
        let lens = self.segment_lengths();
        let mut rest = a.max(0.0);
        for (k, &l) in lens.iter().enumerate() {
            if rest <= l {
                let t = if l > 0.0 { rest / l } else { 0.0 };
                return interpolate(&self.points[k], &self.points[k + 1], t);
            }
            rest -= l;
        }
        self.points.last().unwrap().clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomotopyConfig {
    /// Subdivision spacing.
    pub delta: f64,
    /// Systole threshold `ε'` the output must respect.
    pub eps: f64,
    /// Additive error injected at every moved point, standing in for the
    /// model's comparison error `c(ε)`; zero for the exact model.
    pub injected_error: f64,
    pub seed: u64,
}

impl HomotopyConfig {
    pub fn new(eps: f64) -> HomotopyConfig {
        HomotopyConfig { delta: 1.0, eps, injected_error: 0.0, seed: 0 }
    }
}

/// Largest threshold `ε` with `2 c(ε) / δ < eps_d` for `c(ε) = kappa ε`.
pub fn threshold_for_inflation(delta: f64, eps_d: f64, kappa: f64) -> Result<f64> {
    if !(delta > 0.0 && eps_d > 0.0 && kappa > 0.0) {
        return invalid("delta, eps_d and kappa must be positive");
    }
    Ok(0.999 * eps_d * delta / (2.0 * kappa))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Homotopy {
    pub path: ModelPath,
    /// `length(output) / length(input)`.
    pub ratio: f64,
    /// Interior subdivision points that the projection moved.
    pub moved: usize,
}

/// Homotopes `path` rel endpoints into the systole set at threshold
/// `cfg.eps`: subdivide at arclength spacing `delta`, project the interior
/// subdivision points, and reconnect by canonical geodesics. A path already
/// inside the set is returned unchanged.
pub fn weak_convexity_homotope(space: &ModelSpace, path: &ModelPath, cfg: &HomotopyConfig) -> Result<Homotopy> {
    if !(cfg.delta > 0.0) || !(cfg.eps > 0.0) || !(cfg.injected_error >= 0.0) {
        return invalid("homotopy needs delta > 0, eps > 0 and a non-negative injected error");
    }
    let first = &path.points[0];
    let last = path.points.last().unwrap();
    if !space.in_systole_set(first, cfg.eps) || !space.in_systole_set(last, cfg.eps) {
        return invalid("path endpoints must lie in the systole set");
    }
    let inside = path.points.iter().all(|p| space.in_systole_set(p, cfg.eps));
    if inside {
        return Ok(Homotopy { path: path.clone(), ratio: 1.0, moved: 0 });
    }
    let len = path.length();
    let n = math::ceil(len / cfg.delta) as usize;
    let mut rng = par::rng(cfg.seed);
    let mut points = Vec::with_capacity(n + 1);
    points.push(first.clone());
    let mut moved = 0;
    for k in 1..n {
        let raw = path.point_at(k as f64 * cfg.delta);
        let mut p = space.systole_projection_at(&raw, cfg.eps);
        if cfg.injected_error > 0.0 {
            // Perturb within sup-distance c, keeping lines in the set.
            let c = cfg.injected_error;
            for coord in p.coords.iter_mut() {
                match coord {
                    Coord::Plane(z) => *z = z.exp(c, rng.gen_range(0.0..2.0 * math::PI)),
                    Coord::Line(u) => *u *= math::exp(-c * rng.gen_range(0.0..1.0)),
                    Coord::Base(_) => {}
                }
            }
        }
        if p != raw {
            moved += 1;
        }
        points.push(p);
    }
    points.push(last.clone());
    let out = ModelPath::new(points)?;
    let ratio = if len > 0.0 { out.length() / len } else { 1.0 };
    Ok(Homotopy { path: out, ratio, moved })
}

/// Arclength intervals where each factor is thin (`1/y < eps` on planes,
/// `1/u < eps` on lines), merged across path vertices. Base factors never
/// are.
pub fn active_intervals(path: &ModelPath, eps: f64) -> Vec<Vec<(f64, f64)>> {
    let level = 1.0 / eps;
    let nf = path.points[0].coords.len();
    let mut out: Vec<Vec<(f64, f64)>> = (0..nf).map(|_| Vec::new()).collect();
    let lens = path.segment_lengths();
    let mut start = 0.0;
    let push = |v: &mut Vec<(f64, f64)>, lo: f64, hi: f64| {
        if let Some(last) = v.last_mut() {
            if lo <= last.1 + 1e-12 {
                last.1 = last.1.max(hi);
                return;
            }
        }
        v.push((lo, hi));
    };
    if lens.is_empty() {
        for (k, c) in path.points[0].coords.iter().enumerate() {
            let thin = match c {
                Coord::Plane(p) => p.y > level,
                Coord::Line(u) => *u > level,
                Coord::Base(_) => false,
            };
            if thin {
                out[k].push((0.0, 0.0));
            }
        }
        return out;
    }
    for (seg, &l) in lens.iter().enumerate() {
        let (a, b) = (&path.points[seg], &path.points[seg + 1]);
        for (k, (ca, cb)) in a.coords.iter().zip(&b.coords).enumerate() {
            // parameter interval in [0, 1] of the segment
            let iv = match (ca, cb) {
                (Coord::Plane(p), Coord::Plane(q)) => {
                    let g = GeodesicSegment::new(*p, *q);
                    let gl = g.length();
                    if gl == 0.0 {
                        (p.y > level).then_some((0.0, 1.0))
                    } else {
                        g.above_level(level).map(|(lo, hi)| (lo / gl, hi / gl))
                    }
                }
                (Coord::Line(u), Coord::Line(v)) => {
                    let (s0, s1, sl) = (math::ln(*u), math::ln(*v), math::ln(level));
                    if s0 == s1 {
                        (s0 > sl).then_some((0.0, 1.0))
                    } else {
                        let tc = ((sl - s0) / (s1 - s0)).clamp(0.0, 1.0);
                        let iv = if s1 > s0 { (tc, 1.0) } else { (0.0, tc) };
                        (iv.1 > iv.0).then_some(iv)
                    }
                }
                _ => None,
            };
            if let Some((lo, hi)) = iv {
                push(&mut out[k], start + lo * l, start + hi * l);
            }
        }
        start += l;
    }
    out
}

/// Norbury measure of a model space, restricted to its systole set.
#[derive(Debug, Clone, PartialEq)]
pub struct NorburyMeasure {
    pub space: ModelSpace,
}

/// `coth(length)`, the one-sided weight relative to `dℓ`.
pub fn coth_weight(length: f64) -> f64 {
    1.0 / math::tanh(length)
}

impl NorburyMeasure {
    pub fn new(space: ModelSpace) -> NorburyMeasure {
        NorburyMeasure { space }
    }

    /// Density in the native charts `(x, y)` and `u`.
    pub fn density(&self, x: &ModelPoint) -> f64 {
        x.coords
            .iter()
            .map(|c| match c {
                Coord::Plane(p) => 1.0 / (p.y * p.y),
                Coord::Line(u) => coth_weight(1.0 / u) / (u * u),
                Coord::Base(_) => 1.0,
            })
            .product()
    }

    /// Lebesgue measure in the native charts of the sup-ball `B_r(x)`,
    /// ignoring the systole cut and the base factor's boundary.
    pub fn chart_ball_volume(&self, x: &ModelPoint, r: f64) -> f64 {
        x.coords
            .iter()
            .zip(&self.space.factors)
            .map(|(c, f)| match (c, f) {
                (Coord::Plane(p), _) => {
                    let (_, _, rho) = ball_euclidean(p, r);
                    math::PI * rho * rho
                }
                (Coord::Line(u), _) => u * (math::exp(r) - math::exp(-r)),
                (Coord::Base(_), FactorKind::Base { diameter, .. }) if *diameter > 0.0 => 2.0 * r / diameter,
                _ => 1.0,
            })
            .product()
    }

    /// One weighted sample for `μ(B_r(center) ∩ systole set)`: plane factors
    /// are drawn uniformly from a slightly larger hyperbolic disc and
    /// rejected outside radius `r`; lines and base are drawn uniformly in
    /// their arclength charts over the admissible interval.
    pub fn sample_ball<G: Rng>(&self, center: &ModelPoint, r: f64, rng: &mut G) -> (ModelPoint, f64) {
        let cap = math::ln(1.0 / self.space.eps_t);
        let mut w = 1.0;
        let mut coords = Vec::with_capacity(center.coords.len());
        for (c, f) in center.coords.iter().zip(&self.space.factors) {
            match (c, f) {
                (Coord::Plane(p), _) => {
                    let rp = 1.25 * r;
                    let rho = 2.0 * math::asinh(math::sqrt(rng.gen::<f64>()) * math::sinh(0.5 * rp));
                    let z = p.exp(rho, rng.gen_range(0.0..2.0 * math::PI));
                    if distance(p, &z) > r {
                        w = 0.0;
                    }
                    w *= ball_area(rp);
                    coords.push(Coord::Plane(z));
                }
                (Coord::Line(u), _) => {
                    let s = math::ln(*u);
                    let (lo, hi) = (s - r, (s + r).min(cap));
                    if hi <= lo {
                        w = 0.0;
                        coords.push(*c);
                        continue;
                    }
                    let t = lo + (hi - lo) * rng.gen::<f64>();
                    let l = math::exp(-t);
                    w *= (hi - lo) * coth_weight(l) * l;
                    coords.push(Coord::Line(math::exp(t)));
                }
                (Coord::Base(b), FactorKind::Base { diameter, .. }) if *diameter > 0.0 => {
                    let (lo, hi) = ((b - r).max(0.0), (b + r).min(*diameter));
                    let t = lo + (hi - lo) * rng.gen::<f64>();
                    w *= (hi - lo) / diameter;
                    coords.push(Coord::Base(t));
                }
                _ => coords.push(*c),
            }
        }
        (ModelPoint { coords }, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    pub se: f64,
    pub samples: u64,
    pub inside: u64,
}

/// Monte Carlo estimate of `μ(B_r(center))` over the systole set.
/// Deterministic for a given `(seed, workers)`.
pub fn mc_ball_volume(
    mu: &NorburyMeasure,
    center: &ModelPoint,
    r: f64,
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<VolumeEstimate> {
    if !(r > 0.0) || n_samples < 2 {
        return invalid("ball volume needs r > 0 and at least two samples");
    }
    if !mu.space.in_systole_set(center, mu.space.eps_t) {
        return invalid("ball centre must lie in the systole set");
    }
    let parts = par::run(workers, |w| {
        let (a, b) = par::chunk(n_samples, workers, w);
        let mut rng = par::worker_rng(seed, w);
        let mut acc = Accum::default();
        let mut inside = 0u64;
        for _ in a..b {
            let (_, wt) = mu.sample_ball(center, r, &mut rng);
            if wt > 0.0 {
                inside += 1;
            }
            acc.push(wt, 1.0);
        }
        (acc, inside)
    });
    let mut acc = Accum::default();
    let mut inside = 0;
    for (a, i) in &parts {
        acc.merge(a);
        inside += i;
    }
    if inside == 0 {
        return Err(Error::Degenerate("no samples landed in the ball".into()));
    }
    let (value, se) = acc.weight_mean();
    Ok(VolumeEstimate { value, se, samples: acc.n, inside })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DehnTwistProjection {
    /// Diameter of the closest-point projection of the ball onto the orbit.
    pub diameter: f64,
    /// Distance from the ball centre to the orbit; the ball's interior is
    /// disjoint from the orbit when this is at least `r`.
    pub orbit_distance: f64,
    /// Range of orbit indices `n` hit by the projection.
    pub n_range: (i64, i64),
}

/// Twist orbit `{(n t, y_p)}` and the ball `B_r(q)` with `q = (0, y_p e^r)`,
/// the curve `e^r` times shorter. The nearest orbit point to `(x, y)` has
/// `n = round(x / t)`, so the projection spans the rounded `x`-extent of
/// the ball.
pub fn dehn_twist_projection(r: f64, twist: f64, y_p: f64) -> Result<DehnTwistProjection> {
    if !(r >= 0.0) || !(twist > 0.0) || !(y_p > 0.0) {
        return invalid("twist experiment needs r >= 0, twist > 0, y_p > 0");
    }
    let q = Point::new(0.0, y_p * math::exp(r))?;
    let (cx, _, rho) = ball_euclidean(&q, r);
    let lo = math::round((cx - rho) / twist) as i64;
    let hi = math::round((cx + rho) / twist) as i64;
    let a = Point { x: lo as f64 * twist, y: y_p };
    let b = Point { x: hi as f64 * twist, y: y_p };
    let n0 = Point { x: 0.0, y: y_p };
    Ok(DehnTwistProjection { diameter: distance(&a, &b), orbit_distance: distance(&q, &n0), n_range: (lo, hi) })
}
