//! One function per experiment. Each fills an [`Outcome`] with metrics,
//! plot series and the pass/fail state of the criteria it owns.

use crate::config::ExperimentConfig;
use crate::error::{usage, LabError};
use crate::formats;
use rand::Rng;
use scc_core::fuchsian::{
    count_concave_lattice_points, enumerate_orbit, estimate_critical_exponent, free_product, free_product_lower_bound,
    poincare_partial_sum, thick_diameter, Arc, ConcaveConfig, GroupPresentation, OrbitConfig,
};
use scc_core::hyperbolic::{ball_projection_diameter, horoball_ball_volume, Geodesic, Ideal, Point};
use scc_core::margulis::{ball_average, classify_region, fit_decay, verify_drift, DriftConfig, DriftRegion, MargulisFn};
use scc_core::model::{
    coth_weight, dehn_twist_projection, interpolate, mc_ball_volume, model_distance, threshold_for_inflation,
    weak_convexity_homotope, Coord, FactorKind, HomotopyConfig, ModelPath, ModelPoint, ModelSpace, NorburyMeasure,
};
use scc_core::nets::{build_net, classify_good_bad, fit_entropy, net_counts, EntropySource, PlaneRegion, Region};
use scc_core::par;
use scc_core::stats::fit_log_slope;
use scc_core::walk::{
    build_walk_graph, exact_concave_fractions, horoball_region, run_and_count_concave, s_parameter, sample_trajectory, thick_points, ThinMode,
    WalkConfig,
};
use scc_core::witness::{
    check_count_bound, count_combinatorial_types, linear_gap_check, product_region_input, rafi_distance, ComplexitySegments,
    GapVerdict, RafiInput, Vertex, WitnessGraph,
};
use std::collections::BTreeMap;
use std::time::Instant;

/// Walks written to the trajectory log.
const TRAJECTORY_LOG: usize = 1000;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub metrics: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub criteria: BTreeMap<String, bool>,
    pub timings: BTreeMap<String, f64>,
    /// Exported tables keyed by file name; not part of the record.
    pub artifacts: BTreeMap<String, String>,
}

impl Outcome {
    fn metric(&mut self, k: &str, v: f64) {
        self.metrics.insert(k.to_string(), v);
    }

    fn series(&mut self, k: &str, v: Vec<f64>) {
        self.series.insert(k.to_string(), v);
    }

    fn criterion(&mut self, k: &str, pass: bool) {
        self.criteria.insert(k.to_string(), pass);
    }

    fn timing(&mut self, k: &str, v: f64) {
        self.timings.insert(k.to_string(), v);
    }

    fn artifact(&mut self, name: &str, text: String) {
        self.artifacts.insert(name.to_string(), text);
    }
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    match cfg.experiment.as_str() {
        "lattice-count" => lattice_count(cfg),
        "horoball-exponent" => horoball_exponent(cfg),
        "drift" => drift(cfg),
        "walk" => walk(cfg),
        "weak-convexity" => weak_convexity(cfg),
        "projection-contrast" => projection_contrast(cfg),
        "witness-count" => witness_count(cfg),
        "linear-gap" => linear_gap(cfg),
        "free-product" => free_product_gap(cfg),
        "volume-bounds" => volume_bounds(cfg),
        "rafi-check" => rafi_check(cfg),
        "entropy-compare" => entropy_compare(cfg),
        other => usage(format!("unknown experiment '{other}'")),
    }
}

fn last(xs: &[f64]) -> f64 {
    xs[xs.len() - 1]
}

fn as_f64(xs: &[usize]) -> Vec<f64> {
    xs.iter().map(|&x| x as f64).collect()
}

fn plane_point(z: Point) -> ModelPoint {
    ModelPoint { coords: vec![Coord::Plane(z)] }
}

/// Orbit count exponent of PSL(2,Z) at `i`, and the exponent of its
/// concave lattice points.
fn lattice_count(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let mut o = Outcome::default();
    let g = GroupPresentation::modular();
    let t0 = Instant::now();
    let orbit = enumerate_orbit(&g, &Point::i(), &OrbitConfig::new(last(&cfg.radii)))?;
    let h = estimate_critical_exponent(&orbit, &cfg.radii)?;
    let secs = t0.elapsed().as_secs_f64();
    o.timing("lattice_s", secs);
    o.artifact("orbit.csv", formats::orbit_csv(&orbit));
    let c = count_concave_lattice_points(&g, &orbit, &ConcaveConfig::new(cfg.eps), &cfg.radii)?;
    let hc = fit_log_slope(&cfg.radii, &as_f64(&c.counts))?;
    o.metric("h_lattice", h.value);
    o.metric("h_lattice_lo", h.interval.0);
    o.metric("h_lattice_hi", h.interval.1);
    o.metric("h_concave", hc.slope);
    o.metric("h_concave_se", hc.slope_se);
    o.metric("gap", h.value - hc.slope);
    o.metric("concave_prefix", c.prefix);
    o.metric("orbit_points", orbit.len() as f64);
    o.series("radius", cfg.radii.clone());
    o.series("lattice_count", as_f64(&h.counts));
    o.series("concave_count", as_f64(&c.counts));
    o.criterion("C1", (0.85..=1.15).contains(&h.value) && secs < 60.0);
    o.criterion("C3", h.value - hc.slope >= 0.2);
    Ok(o)
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Net-point exponent inside the horoball `{y > 1}`, and the closed-form
/// rectangle volume against quadrature.
fn horoball_exponent(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let mut o = Outcome::default();
    let region = Region::Plane(PlaneRegion::Ball { center: Point::i(), radius: last(&cfg.radii), min_height: 1.0 });
    let net = build_net(&region, cfg.eps_n, cfg.net_seed)?;
    let counts = net_counts(&net, &plane_point(Point::i()), &cfg.radii, cfg.workers);
    let e = fit_entropy(&cfg.radii, &counts, EntropySource::NetPoints)?;
    let mut worst: f64 = 0.0;
    for (r, b, c) in [(5.0, 1.0, 1.0), (3.0, 0.5, 2.0), (12.0, 0.8, 0.3), (20.0, 1.0, 1.0)] {
        let x = c * f64::exp(0.5 * b * r);
        let top = f64::exp(b * r);
        // ∫_1^Y 2x dy / y² with y = e^t
        let quad = 2.0 * x * simpson(|t| (-t).exp(), 0.0, top.ln(), 4000);
        let v = horoball_ball_volume(r, b, c)?;
        worst = worst.max((v - quad).abs() / v);
    }
    o.metric("h_net", e.value);
    o.metric("h_net_lo", e.interval.0);
    o.metric("h_net_hi", e.interval.1);
    o.metric("net_points", net.len() as f64);
    o.metric("rectangle_rel_err", worst);
    o.series("radius", cfg.radii.clone());
    o.series("net_count", as_f64(&counts));
    o.criterion("C2", (0.4..=0.6).contains(&e.value) && worst < 1e-8);
    Ok(o)
}

/// Test points cycling through the R3, R1 and R2 layouts.
fn drift_points(s: &ModelSpace, tau: f64, eps: f64, n: usize, seed: u64) -> Vec<ModelPoint> {
    let mut rng = par::rng(seed);
    let deep = (tau + (1.0 / eps).ln()).max(0.0);
    (0..n)
        .map(|k| {
            let coords = s
                .factors
                .iter()
                .enumerate()
                .map(|(j, fk)| match fk {
                    FactorKind::Plane => {
                        let thin = match k % 3 {
                            0 => false,
                            1 => j == 0,
                            _ => true,
                        };
                        let t = if thin { rng.gen_range(deep + 0.1..deep + 6.0) } else { rng.gen_range(-1.0..deep - 0.1) };
                        Coord::Plane(Point { x: rng.gen_range(-2.0..2.0), y: t.exp().max(4.0) })
                    }
                    FactorKind::Line => Coord::Line(rng.gen_range(-1.0..(1.0 / s.eps_t).ln()).exp()),
                    FactorKind::Base { diameter, .. } => Coord::Base(rng.gen_range(0.0..=*diameter)),
                })
                .collect();
            ModelPoint { coords }
        })
        .collect()
}

/// Drift inequality on points across all three regions, and the decay
/// rate of `c(τ)` at a deep single-cusp point.
fn drift(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let mut o = Outcome::default();
    let s = ModelSpace::new(vec![FactorKind::Plane, FactorKind::Plane, FactorKind::Line], cfg.eps_t)?;
    let f = MargulisFn::new(s.clone())?;
    let mu = NorburyMeasure::new(s.clone());
    let mut dc = DriftConfig::new(cfg.tau, cfg.eps);
    dc.samples = cfg.samples;
    dc.workers = cfg.workers;
    dc.seed = cfg.seed;
    let pts = drift_points(&s, cfg.tau, cfg.eps, cfg.points, cfg.seed);
    let rep = verify_drift(&f, &mu, &pts, &dc)?;
    o.artifact("drift.csv", formats::drift_csv(&rep));
    let per = |r: DriftRegion| rep.points.iter().filter(|p| p.region == r).count();
    let (r1, r2, r3) = (per(DriftRegion::R1), per(DriftRegion::R2), per(DriftRegion::R3));
    let spanning = [r1, r2, r3].iter().all(|&c| c * 10 >= pts.len());
    o.metric("points", pts.len() as f64);
    o.metric("r1_points", r1 as f64);
    o.metric("r2_points", r2 as f64);
    o.metric("r3_points", r3 as f64);
    o.metric("counterexamples", rep.counterexamples.len() as f64);
    o.metric("c_tau", rep.c);
    o.metric("b", rep.b);
    o.metric("max_ratio", rep.points.iter().map(|p| p.ratio).fold(0.0, f64::max));

    let single = ModelSpace::new(vec![FactorKind::Plane], cfg.eps_t)?;
    let f1 = MargulisFn::new(single.clone())?;
    let mu1 = NorburyMeasure::new(single.clone());
    let x = ModelPoint { coords: vec![Coord::Plane(Point { x: 0.0, y: 9f64.exp() })] };
    let mut cs = Vec::with_capacity(cfg.taus.len());
    let mut all_r1 = true;
    for (k, &t) in cfg.taus.iter().enumerate() {
        all_r1 &= classify_region(&x, t, cfg.eps) == DriftRegion::R1;
        let a = ball_average(&f1, &mu1, &x, t, cfg.aux_samples, cfg.seed.wrapping_add(1000 + k as u64), cfg.workers)?;
        cs.push(a.value / f1.evaluate(&x));
    }
    let d = fit_decay(&cfg.taus, &cs)?;
    o.metric("decay_exponent", d.exponent);
    o.metric("decay_poly_power", d.poly_power);
    o.metric("decay_log_slope", d.log_slope);
    o.series("tau", cfg.taus.clone());
    o.series("c_tau", cs);
    o.criterion(
        "C4",
        pts.len() >= 100 && spanning && rep.counterexamples.is_empty() && all_r1 && d.exponent <= -0.4,
    );
    Ok(o)
}

/// Concave-trajectory fractions of the random walk on a horoball net.
fn walk(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let mut o = Outcome::default();
    let t0 = Instant::now();
    let net = build_net(&Region::Plane(horoball_region(cfg.period, cfg.eps_n)?), cfg.eps_n, cfg.net_seed)?;
    let g = build_walk_graph(&net, cfg.tau)?;
    let diam = thick_diameter(&GroupPresentation::parabolic(1.0)?, cfg.eps, &Point { x: 0.5, y: 1.0 })?;
    let s = s_parameter(diam, cfg.tau);
    let mut wc = WalkConfig::new(cfg.tau, cfg.eps, s, 2 * s + 8, cfg.samples, cfg.seed);
    wc.mode = ThinMode::Level;
    wc.workers = cfg.workers;
    let ns: Vec<usize> = (2 * s + 1..=2 * s + 8).collect();
    let st = run_and_count_concave(&net, &g, &wc, &ns, 30)?;
    let secs = t0.elapsed().as_secs_f64();
    o.timing("walk_s", secs);
    o.artifact("walk_summary.csv", formats::walk_summary_csv(&st));
    let starts = thick_points(&net, cfg.eps)?;
    let logged = (0..cfg.samples.min(TRAJECTORY_LOG))
        .map(|k| sample_trajectory(&net, &g, &starts, &wc, k))
        .collect::<Result<Vec<_>, _>>()?;
    o.artifact("trajectories.jsonl", formats::trajectories_jsonl(&logged));
    let exact = exact_concave_fractions(&net, &g, &wc, &ns)?;
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let exact_fit = fit_log_slope(&xs, &exact)?;
    o.metric("s", s as f64);
    o.metric("thick_diameter", diam);
    o.metric("net_points", net.len() as f64);
    o.metric("trajectories", cfg.samples as f64);
    o.metric("exact_exponent", exact_fit.slope);
    let fitted_all = st.fitted_ns == ns && st.warning.is_none();
    if let Some(fit) = &st.fit {
        o.metric("exponent", fit.slope);
        o.metric("exponent_se", fit.slope_se);
    }
    o.metric("fitted_lengths", st.fitted_ns.len() as f64);
    o.series("n", xs);
    o.series("fraction", st.fractions.clone());
    o.series("fraction_se", st.se.clone());
    o.series("exact_fraction", exact);
    o.series("hits", st.hits.iter().map(|&h| h as f64).collect());
    let pass = st.fit.is_some_and(|f| f.slope <= -0.5) && fitted_all && cfg.samples >= 100_000 && secs < 300.0;
    o.criterion("C5", pass);
    Ok(o)
}

/// Systole-set point with one-sided lengths in `[eps_t, 2]`.
fn random_systole_point(space: &ModelSpace, rng: &mut par::Rng) -> Result<ModelPoint, LabError> {
    let cap = (1.0 / space.eps_t).ln();
    let coords = space
        .factors
        .iter()
        .map(|f| match f {
            FactorKind::Plane => Coord::Plane(Point { x: rng.gen_range(-3.0..3.0), y: rng.gen_range(-2.0f64..3.0).exp() }),
            FactorKind::Line => Coord::Line(rng.gen_range(-(2f64.ln())..cap).exp()),
            FactorKind::Base { diameter, .. } => Coord::Base(rng.gen_range(0.0..=*diameter)),
        })
        .collect();
    Ok(space.point(coords)?)
}

/// Sup-geodesic `a → m → b` whose line factors climb as far as the
/// distance allows at the midpoint, so the path leaves the systole set.
fn dipping_geodesic(a: &ModelPoint, b: &ModelPoint) -> Result<ModelPath, LabError> {
    let l = model_distance(a, b)?;
    let mut m = interpolate(a, b, 0.5);
    for (k, c) in m.coords.iter_mut().enumerate() {
        if let (Coord::Line(u), Coord::Line(ua), Coord::Line(ub)) = (c, &a.coords[k], &b.coords[k]) {
            *u = (ua.ln().min(ub.ln()) + 0.5 * l).exp();
        }
    }
    Ok(ModelPath::new(vec![a.clone(), m, b.clone()])?)
}

fn path_in_set(space: &ModelSpace, path: &ModelPath, eps: f64) -> bool {
    let len = path.length();
    (0..=2000).all(|k| space.in_systole_set(&path.point_at(len * k as f64 / 2000.0), eps * (1.0 - 1e-12)))
}

/// Homotopes random geodesics with systole-set endpoints back into the
/// set; three quarters in a mixed space with injected comparison error,
/// one quarter in a pure line space with none.
fn weak_convexity(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let mut o = Outcome::default();
    let mixed = ModelSpace::new(vec![FactorKind::Plane, FactorKind::Plane, FactorKind::Line, FactorKind::Line], cfg.eps_t)?;
    let lines = ModelSpace::new(vec![FactorKind::Line, FactorKind::Line, FactorKind::Line], cfg.eps_t)?;
    let eps_d = 0.05;
    let injected = threshold_for_inflation(1.0, eps_d, 1.0)?;
    let mut rng = par::rng(cfg.seed);
    let (mut all_in, mut max_mixed, mut max_line, mut left, mut geodesic) = (true, 0.0f64, 0.0f64, 0usize, true);
    let mut line_cases = 0usize;
    for k in 0..cfg.points {
        let pure = k % 4 == 3;
        let space = if pure { &lines } else { &mixed };
        let a = random_systole_point(space, &mut rng)?;
        let b = random_systole_point(space, &mut rng)?;
        let path = dipping_geodesic(&a, &b)?;
        let d = model_distance(&a, &b)?;
        geodesic &= (path.length() - d).abs() <= 1e-9 * d.max(1.0);
        if !path.points.iter().all(|p| space.in_systole_set(p, space.eps_t)) {
            left += 1;
        }
        let hc = HomotopyConfig { delta: 1.0, eps: space.eps_t, injected_error: if pure { 0.0 } else { injected }, seed: cfg.seed.wrapping_add(k as u64) };
        let h = weak_convexity_homotope(space, &path, &hc)?;
        all_in &= path_in_set(space, &h.path, space.eps_t);
        if pure {
            line_cases += 1;
            max_line = max_line.max(h.ratio);
        } else {
            max_mixed = max_mixed.max(h.ratio);
        }
    }
    o.metric("segments", cfg.points as f64);
    o.metric("segments_leaving_set", left as f64);
    o.metric("pure_line_segments", line_cases as f64);
    o.metric("injected_error", injected);
    o.metric("max_ratio_mixed", max_mixed);
    o.metric("max_ratio_line", max_line);
    o.metric("all_in_set", f64::from(u8::from(all_in)));
    o.criterion("C6", geodesic && all_in && max_mixed <= 1.0 + eps_d && max_line <= 1.0 + 1e-12 && cfg.points >= 1000);
    Ok(o)
}

/// Golden-section minimiser of a unimodal `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Axis coordinate of the nearest point of the imaginary axis, found by
/// minimising `cosh d(z, it)` over `ln t`.
fn axis_coordinate(z: &Point) -> f64 {
    let f = |s: f64| {
        let t = s.exp();
        (z.x * z.x + (z.y - t).powi(2)) / (z.y * t)
    };
    let c0 = z.y.ln().abs().max(z.x.abs().ln().abs()) + 5.0;
    golden_min(f, -c0 - 40.0, c0 + 40.0)
}

/// Brute projection diameter onto the imaginary axis: sample the boundary
/// circle by angle, then refine the extreme samples by a local search in
/// angle.
fn projection_oracle(center: &Point, r: f64, n: usize) -> f64 {
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let at = |th: f64| axis_coordinate(&center.exp(r, th));
    let (mut lo, mut hi) = ((f64::INFINITY, 0.0), (f64::NEG_INFINITY, 0.0));
    for k in 0..n {
        let th = step * k as f64;
        let s = at(th);
        if s < lo.0 {
            lo = (s, th);
        }
        if s > hi.0 {
            hi = (s, th);
        }
    }
    let th_lo = golden_min(at, lo.1 - step, lo.1 + step);
    let th_hi = golden_min(|th| -at(th), hi.1 - step, hi.1 + step);
    at(th_hi).max(hi.0) - at(th_lo).min(lo.0)
}

/// Projections of balls missing a geodesic axis stay short; projections
/// to a Dehn-twist orbit grow with the radius.
fn projection_contrast(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let mut o = Outcome::default();
    let axis = Geodesic::from_endpoints(Ideal::Finite(0.0), Ideal::Infinity)?;
    let mut rng = par::rng(cfg.seed);
    let (mut max_d, mut max_oracle, mut max_err, mut disjoint) = (0.0f64, 0.0f64, 0.0f64, true);
    let mut diams = Vec::with_capacity(cfg.points);
    for _ in 0..cfg.points {
        let r = rng.gen_range(0.1..8.0);
        let dist: f64 = r + rng.gen_range(0.01..3.0);
        // points at distance d from the axis have |x|/y = sinh d
        let theta = (1.0 / dist.sinh()).atan();
        let rho = rng.gen_range(-5.0f64..5.0).exp();
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let c = Point { x: sign * rho * theta.cos(), y: rho * theta.sin() };
        disjoint &= axis.distance_to(&c) >= r;
        let d = ball_projection_diameter(&c, r, &axis);
        let oracle = projection_oracle(&c, r, cfg.samples);
        max_d = max_d.max(d);
        max_oracle = max_oracle.max(oracle);
        max_err = max_err.max((d - oracle).abs());
        diams.push(d);
    }
    let twist: Vec<f64> = cfg
        .radii
        .iter()
        .map(|&r| dehn_twist_projection(r, 1.0, 1.0).map(|p| p.diameter))
        .collect::<Result<_, _>>()?;
    o.metric("balls", cfg.points as f64);
    o.metric("max_axis_diameter", max_d);
    o.metric("max_axis_diameter_oracle", max_oracle);
    o.metric("max_oracle_error", max_err);
    o.series("axis_diameter", diams);
    o.series("twist_radius", cfg.radii.clone());
    o.series("twist_diameter", twist.clone());
    let grows = cfg.radii.iter().zip(&twist).all(|(r, d)| *d >= 1.5 * r);
    let spread = match (cfg.radii.iter().position(|&r| r == 4.0), cfg.radii.iter().position(|&r| r == 8.0)) {
        (Some(a), Some(b)) => twist[b] > twist[a] + 2.0,
        _ => false,
    };
    o.criterion("C7", disjoint && max_d <= 5.0 && max_oracle <= 5.0 && max_err < 1e-3 && grows && spread);
    Ok(o)
}

/// Type counts against the budget, and the exact count bound over a
/// random sweep of labelled graphs.
fn witness_count(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let mut o = Outcome::default();
    let hs = [1.0, 2.0];
    let counts: Vec<f64> = cfg
        .radii
        .iter()
        .map(|&r| count_combinatorial_types(3, r, &hs).map(|c| c as f64))
        .collect::<Result<_, _>>()?;
    let log_r: Vec<f64> = cfg.radii.iter().map(|r| r.ln()).collect();
    let fit = fit_log_slope(&log_r, &counts)?;
    let mut rng = par::rng(cfg.seed);
    let mut violations = 0usize;
    let mut max_used: f64 = 0.0;
    for _ in 0..cfg.points {
        let n = rng.gen_range(1..6);
        let vs: Vec<Vertex> = (0..n).map(|_| Vertex::witness(rng.gen_range(1..9) as f64 * 0.25, rng.gen_range(0..40))).collect();
        let g = WitnessGraph::new(vs);
        let used: f64 = g.vertices.iter().map(|v| v.h * v.s as f64).sum();
        let r = used + rng.gen_range(0.0..5.0);
        let eps_r = [0.01, 0.1, 0.5][rng.gen_range(0..3)];
        let c = check_count_bound(&g, r, eps_r, None)?;
        if !c.holds {
            violations += 1;
        }
        max_used = max_used.max(c.log_bound / c.log_limit.max(f64::MIN_POSITIVE));
    }
    o.metric("type_count_loglog_slope", fit.slope);
    o.metric("slope_bound", 3.0 * hs.len() as f64);
    o.metric("graphs", cfg.points as f64);
    o.metric("violations", violations as f64);
    o.metric("max_log_bound_over_limit", max_used);
    o.series("budget", cfg.radii.clone());
    o.series("type_count", counts.clone());
    let monotone = counts.windows(2).all(|w| w[0] <= w[1]);
    o.criterion("C8", fit.slope <= 3.0 * hs.len() as f64 && monotone && violations == 0 && cfg.points >= 1000);
    Ok(o)
}

/// Synthetic segment lists: a head at exponent `h` and a bad tail of total
/// length `ε_b R` at `h − 1`, each cut into random pieces.
fn linear_gap(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let mut o = Outcome::default();
    let mut rng = par::rng(cfg.seed);
    let (mut max_err, mut all_hold) = (0.0f64, true);
    let eps_b = cfg.eps_b;
    for _ in 0..cfg.points {
        let h = rng.gen_range(1.5..6.0);
        let h_sub = h - 1.0;
        let r = rng.gen_range(1.0..100.0);
        let mut segs = pieces(&mut rng, (1.0 - eps_b) * r, h);
        segs.extend(pieces(&mut rng, eps_b * r, h_sub));
        let c = ComplexitySegments::new(segs, h);
        let g = linear_gap_check(&c, h, eps_b, h_sub)?;
        all_hold &= g.verdict == GapVerdict::Holds;
        max_err = max_err.max((g.achieved - eps_b * (1.0 - h_sub / h)).abs());
    }
    o.metric("lists", cfg.points as f64);
    o.metric("max_abs_error", max_err);
    o.criterion("C9", all_hold && max_err <= 1e-9 && cfg.points >= 1000);
    Ok(o)
}

/// Splits `total` into 1 to 4 positive pieces at exponent `e`.
fn pieces(rng: &mut par::Rng, total: f64, e: f64) -> Vec<(f64, f64)> {
    let k = rng.gen_range(1..=4);
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let sum: f64 = w.iter().sum();
    w.iter().map(|x| (total * x / sum, e)).collect()
}

/// A free product of a cyclic hyperbolic group and a Schottky group:
/// exponent gap over the larger factor and the geometric lower bound on
/// its Poincaré partial sums.
fn free_product_gap(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let mut o = Outcome::default();
    let a = GroupPresentation::hyperbolic_cyclic(4.0)?;
    let b = GroupPresentation::schottky(&[
        (Arc::new(0.35, 0.7)?, Arc::new(-0.7, -0.35)?),
        (Arc::new(1.5, 3.0)?, Arc::new(-3.0, -1.5)?),
    ])?;
    let fp = free_product(&a, &b)?;
    let p = Point::i();
    let rf = last(&cfg.radii);
    let oa = enumerate_orbit(&a, &p, &OrbitConfig::new(rf))?;
    let ob = enumerate_orbit(&b, &p, &OrbitConfig::new(22.0))?;
    let of = enumerate_orbit(&fp, &p, &OrbitConfig::new(rf))?;
    let rb: Vec<f64> = (11..=22).map(f64::from).collect();
    let fit_f: Vec<f64> = cfg.radii.iter().copied().filter(|&r| r >= rf / 2.0).collect();
    let ea = estimate_critical_exponent(&oa, &fit_f)?.value;
    let eb = estimate_critical_exponent(&ob, &rb)?.value;
    let ef = estimate_critical_exponent(&of, &fit_f)?.value;
    let h = eb + 0.05;
    let s = poincare_partial_sum(&of, h, &cfg.radii, 1e-6)?;
    let mut ok = true;
    let mut lbs = Vec::with_capacity(cfg.radii.len());
    for (k, &r) in cfg.radii.iter().enumerate() {
        let lb = free_product_lower_bound(&oa, &ob, h, r)?;
        ok &= s.partial_sums[k] >= lb;
        lbs.push(lb);
    }
    o.metric("h_cyclic", ea);
    o.metric("h_schottky", eb);
    o.metric("h_free_product", ef);
    o.metric("gap", ef - ea.max(eb));
    o.metric("series_h", h);
    o.series("radius", cfg.radii.clone());
    o.series("partial_sum", s.partial_sums.clone());
    o.series("lower_bound", lbs);
    o.criterion("C10", ef >= ea.max(eb) + 0.1 && ok);
    Ok(o)
}

/// Ball volumes over systole-set centres, and the coth weights of line
/// factors at points sampled from those balls.
fn volume_bounds(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let mut o = Outcome::default();
    let s = ModelSpace::new(vec![FactorKind::Plane, FactorKind::Plane, FactorKind::Line], cfg.eps_t)?;
    let mu = NorburyMeasure::new(s.clone());
    let mut rng = par::rng(cfg.seed);
    let r = cfg.radii[0];
    let centres: Vec<ModelPoint> = (0..cfg.points).map(|_| random_systole_point(&s, &mut rng)).collect::<Result<_, _>>()?;
    let vols: Vec<f64> = centres
        .iter()
        .enumerate()
        .map(|(k, c)| mc_ball_volume(&mu, c, r, cfg.samples, cfg.seed.wrapping_add(k as u64), cfg.workers).map(|v| v.value))
        .collect::<Result<_, _>>()?;
    let max = vols.iter().copied().fold(f64::MIN, f64::max);
    let min = vols.iter().copied().fold(f64::MAX, f64::min);
    let top = coth_weight(cfg.eps_t);
    let (mut checked, mut sandwich) = (0usize, true);
    let mut k = 0usize;
    while checked < cfg.aux_samples {
        let (z, w) = mu.sample_ball(&centres[k % centres.len()], r, &mut rng);
        k += 1;
        if w <= 0.0 {
            continue;
        }
        for c in &z.coords {
            if let Coord::Line(u) = c {
                let wt = coth_weight(1.0 / u);
                sandwich &= (1.0..=top).contains(&wt);
            }
        }
        checked += 1;
    }
    o.metric("centres", cfg.points as f64);
    o.metric("radius", r);
    o.metric("max_over_min", max / min);
    o.metric("coth_samples", checked as f64);
    o.metric("coth_upper", top);
    o.series("volume", vols);
    o.criterion("C11", max / min <= 10.0 && sandwich && cfg.points >= 50);
    Ok(o)
}

fn rafi_point(rng: &mut par::Rng, kinds: &[u8]) -> ModelPoint {
    ModelPoint {
        coords: kinds
            .iter()
            .map(|&k| match k {
                0 => Coord::Plane(Point { x: rng.gen_range(-3.0..3.0), y: rng.gen_range(-2.0f64..4.0).exp() }),
                _ => Coord::Line(rng.gen_range(-3.0f64..3.0).exp()),
            })
            .collect(),
    }
}

fn random_terms(rng: &mut par::Rng, lo: f64, hi: f64) -> Vec<f64> {
    let n = rng.gen_range(0..4);
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Product-region instances with only Γ terms against the sup metric, and
/// monotonicity of the evaluator under single-term increases.
fn rafi_check(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let mut o = Outcome::default();
    let families: [&[u8]; 6] = [&[0], &[0, 0], &[0, 0, 0], &[1], &[1, 1], &[1, 1, 1]];
    let mut rng = par::rng(cfg.seed);
    let (mut equal, mut monotone, mut sandwich) = (0usize, 0usize, 0usize);
    for k in 0..cfg.points {
        let kinds = families[k % families.len()];
        let (x, y) = (rafi_point(&mut rng, kinds), rafi_point(&mut rng, kinds));
        let input = product_region_input(&x, &y, 5.0)?;
        if rafi_distance(&input)? == model_distance(&x, &y)? {
            equal += 1;
        }
        let mixed = [0u8, 1, 0, 1];
        let (x, y) = (rafi_point(&mut rng, &mixed), rafi_point(&mut rng, &mixed));
        let d = rafi_distance(&product_region_input(&x, &y, 5.0)?)?;
        let m = model_distance(&x, &y)?;
        if m <= d + 1e-12 && d <= 2.0 * m + 1e-12 {
            sandwich += 1;
        }
        let base = RafiInput {
            nonannular: random_terms(&mut rng, 0.0, 20.0),
            annular: random_terms(&mut rng, 0.0, 20.0).into_iter().map(f64::exp).collect(),
            gamma_two_sided: random_terms(&mut rng, 0.0, 20.0),
            gamma_one_sided: random_terms(&mut rng, 0.0, 20.0),
            short_x: random_terms(&mut rng, 0.001, 0.5),
            short_y: random_terms(&mut rng, 0.001, 0.5),
            k: 3.0,
            eps: 0.5,
        };
        let mut up = base.clone();
        let which = rng.gen_range(0..6);
        let bump: f64 = rng.gen_range(0.0..5.0);
        let field = match which {
            0 => &mut up.nonannular,
            1 => &mut up.annular,
            2 => &mut up.gamma_two_sided,
            3 => &mut up.gamma_one_sided,
            4 => &mut up.short_x,
            _ => &mut up.short_y,
        };
        if !field.is_empty() {
            let i = rng.gen_range(0..field.len());
            let v = &mut field[i];
            // lengths enter as log(1/ℓ): shrinking ℓ raises the term
            *v = match which {
                4 | 5 => *v * (-bump).exp(),
                1 => *v * bump.exp(),
                _ => *v + bump,
            };
        }
        if rafi_distance(&up)? >= rafi_distance(&base)? {
            monotone += 1;
        }
    }
    o.metric("instances", cfg.points as f64);
    o.metric("exact_matches", equal as f64);
    o.metric("monotone", monotone as f64);
    o.metric("mixed_within_factor_two", sandwich as f64);
    o.criterion("C12", equal == cfg.points && monotone == cfg.points && cfg.points >= 1000);
    Ok(o)
}

/// Lattice-point and net-point exponents of PSL(2,Z) over the same radii,
/// and the bad-point fraction as the radius grows.
fn entropy_compare(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let mut o = Outcome::default();
    let rmax = last(&cfg.radii);
    let orbit = enumerate_orbit(&GroupPresentation::modular(), &Point::i(), &OrbitConfig::new(rmax + 2.0))?;
    let h_lp = estimate_critical_exponent(&orbit, &cfg.radii)?;
    let region = Region::Plane(PlaneRegion::Ball { center: Point::i(), radius: rmax, min_height: 0.0 });
    let net = build_net(&region, cfg.eps_n, cfg.net_seed)?;
    let counts = net_counts(&net, &plane_point(Point::i()), &cfg.radii, cfg.workers);
    let h_np = fit_entropy(&cfg.radii, &counts, EntropySource::NetPoints)?;
    let bad_r: Vec<f64> = cfg.radii.iter().copied().filter(|r| r.fract() == 0.0 && (*r as i64) % 2 == 0).collect();
    let bad: Vec<f64> = bad_r
        .iter()
        .map(|&r| classify_good_bad(&net, &orbit, &Point::i(), r, cfg.eps_b, cfg.workers).map(|c| c.bad_fraction()))
        .collect::<Result<_, _>>()?;
    o.metric("h_lp", h_lp.value);
    o.metric("h_np", h_np.value);
    o.metric("h_np_minus_h_lp", h_np.value - h_lp.value);
    o.series("radius", cfg.radii.clone());
    o.series("lattice_count", as_f64(&h_lp.counts));
    o.series("net_count", as_f64(&counts));
    o.series("bad_radius", bad_r);
    o.series("bad_fraction", bad.clone());
    o.criterion("E1", h_lp.value <= h_np.value + 0.05);
    o.criterion("E2", bad.len() >= 2 && bad.windows(2).all(|w| w[1] < w[0]));
    Ok(o)
}
