use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scc_core::hyperbolic::{distance, GeodesicSegment, Point};
use scc_core::model::*;

fn mixed_space() -> ModelSpace {
    ModelSpace::new(vec![FactorKind::Plane, FactorKind::Plane, FactorKind::Line, FactorKind::Line], 0.1).unwrap()
}

fn random_point(space: &ModelSpace, rng: &mut ChaCha8Rng) -> ModelPoint {
    let coords = space
        .factors
        .iter()
        .map(|f| match f {
            FactorKind::Plane => Coord::Plane(Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(-2.0f64..3.0).exp()).unwrap()),
            FactorKind::Line => Coord::Line(rng.gen_range(-2.0f64..4.0).exp()),
            FactorKind::Base { diameter, .. } => Coord::Base(rng.gen_range(0.0..=*diameter)),
        })
        .collect();
    space.point(coords).unwrap()
}

/// Random point of the systole set with one-sided lengths in `[eps_t, 2]`.
fn random_systole_point(space: &ModelSpace, rng: &mut ChaCha8Rng) -> ModelPoint {
    let cap = (1.0 / space.eps_t).ln();
    let mut p = random_point(space, rng);
    for c in p.coords.iter_mut() {
        if let Coord::Line(u) = c {
            *u = rng.gen_range(-(2f64.ln())..cap).exp();
        }
    }
    p
}

fn line_s(p: &ModelPoint, k: usize) -> f64 {
    match p.coords[k] {
        Coord::Line(u) => u.ln(),
        _ => unreachable!(),
    }
}

/// Sup-geodesic `a → m → b` whose line factors rise as far as the dominant
/// factor allows at the midpoint. Requires `d(a, b)` to be attained by the
/// first factor.
fn dipping_geodesic(a: &ModelPoint, b: &ModelPoint) -> ModelPath {
    let l = model_distance(a, b).unwrap();
    let mut m = interpolate(a, b, 0.5);
    for (k, c) in m.coords.iter_mut().enumerate() {
        if let Coord::Line(u) = c {
            let s = line_s(a, k).min(line_s(b, k)) + 0.5 * l;
            *u = s.exp();
        }
    }
    ModelPath::new(vec![a.clone(), m, b.clone()]).unwrap()
}

/// Length of a path by summing sup distances over a fine resampling of
/// each factor separately.
fn dense_length(path: &ModelPath) -> f64 {
    let n = 400;
    let mut total = 0.0;
    for w in path.points.windows(2) {
        let mut prev = w[0].clone();
        for k in 1..=n {
            let cur = interpolate(&w[0], &w[1], k as f64 / n as f64);
            total += model_distance(&prev, &cur).unwrap();
            prev = cur;
        }
    }
    total
}

fn path_in_systole_set(space: &ModelSpace, path: &ModelPath, eps: f64) -> bool {
    let len = path.length();
    (0..=2000).all(|k| space.in_systole_set(&path.point_at(len * k as f64 / 2000.0), eps * (1.0 - 1e-12)))
}

#[test]
fn distance_examples() {
    let s = ModelSpace::new(vec![FactorKind::Plane, FactorKind::Line], 0.1).unwrap();
    let x = s.point(vec![Coord::Plane(Point::i()), Coord::Line(1.0)]).unwrap();
    let y = s.point(vec![Coord::Plane(Point::new(0.0, 1f64.exp()).unwrap()), Coord::Line(3f64.exp())]).unwrap();
    assert_eq!(model_distance(&x, &x).unwrap(), 0.0);
    assert!((model_distance(&x, &y).unwrap() - 3.0).abs() < 1e-12);
    let other = ModelSpace::new(vec![FactorKind::Line, FactorKind::Line], 0.1).unwrap();
    let z = other.point(vec![Coord::Line(1.0), Coord::Line(1.0)]).unwrap();
    assert!(model_distance(&x, &z).is_err());
}

#[test]
fn triangle_inequality_on_random_triples() {
    let s = mixed_space();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let (a, b, c) = (random_point(&s, &mut rng), random_point(&s, &mut rng), random_point(&s, &mut rng));
        let lhs = model_distance(&a, &c).unwrap();
        assert!(lhs <= model_distance(&a, &b).unwrap() + model_distance(&b, &c).unwrap() + 1e-9);
    }
}

#[test]
fn systole_projection_is_non_expansive() {
    let s = mixed_space();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let (a, b) = (random_point(&s, &mut rng), random_point(&s, &mut rng));
        let (pa, pb) = (s.systole_projection(&a), s.systole_projection(&b));
        assert!(model_distance(&pa, &pb).unwrap() <= model_distance(&a, &b).unwrap() + 1e-9);
        assert!(s.in_systole_set(&pa, s.eps_t));
        assert_eq!(s.systole_projection(&pa), pa);
    }
}

#[test]
fn systole_projection_examples() {
    let s = ModelSpace::new(vec![FactorKind::Plane, FactorKind::Line], 0.2).unwrap();
    let inside = s.point(vec![Coord::Plane(Point::i()), Coord::Line(2.0)]).unwrap();
    assert_eq!(s.systole_projection(&inside), inside);
    let deep = s.point(vec![Coord::Plane(Point::i()), Coord::Line(10.0 / 0.2)]).unwrap();
    assert_eq!(s.systole_projection(&deep).coords[1], Coord::Line(1.0 / 0.2));
}

#[test]
fn canonical_geodesics_realise_distance() {
    let s = mixed_space();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let (a, b) = (random_point(&s, &mut rng), random_point(&s, &mut rng));
        let p = ModelPath::new(vec![a.clone(), b.clone()]).unwrap();
        let d = model_distance(&a, &b).unwrap();
        assert!((p.length() - d).abs() < 1e-12);
        assert!((dense_length(&p) - d).abs() < 1e-6 * (1.0 + d));
        let m = p.point_at(0.3 * d);
        assert!((model_distance(&a, &m).unwrap() - 0.3 * d).abs() < 1e-7 * (1.0 + d));
    }
}

#[test]
fn homotopy_leaves_paths_in_the_set_alone() {
    let s = mixed_space();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (a, b) = (random_systole_point(&s, &mut rng), random_systole_point(&s, &mut rng));
    let p = ModelPath::new(vec![a, b]).unwrap();
    let h = weak_convexity_homotope(&s, &p, &HomotopyConfig::new(s.eps_t)).unwrap();
    assert_eq!(h.path, p);
    assert_eq!(h.ratio, 1.0);
    assert_eq!(h.moved, 0);
}

#[test]
fn homotopy_rejects_endpoints_outside_the_set() {
    let s = ModelSpace::new(vec![FactorKind::Line], 0.1).unwrap();
    let a = s.point(vec![Coord::Line(100.0)]).unwrap();
    let b = s.point(vec![Coord::Line(1.0)]).unwrap();
    let p = ModelPath::new(vec![a, b]).unwrap();
    assert!(weak_convexity_homotope(&s, &p, &HomotopyConfig::new(0.1)).is_err());
}

#[test]
fn line_dips_are_removed_without_inflation() {
    let s = ModelSpace::new(vec![FactorKind::Line, FactorKind::Line, FactorKind::Line], 0.1).unwrap();
    let cap = 10f64.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut dipped = 0;
    for _ in 0..300 {
        // first factor dominates: it travels far while the others stay near the cap
        let l = rng.gen_range(1.0..12.0);
        let s0 = rng.gen_range(cap - 14.0..cap - l);
        let mut coords = vec![Coord::Line(s0.exp())];
        let mut coords_b = vec![Coord::Line((s0 + l).exp())];
        for _ in 1..3 {
            let sa = rng.gen_range(cap - 1.0..cap);
            let sb = rng.gen_range((sa - l).max(cap - 1.5)..cap);
            coords.push(Coord::Line(sa.exp()));
            coords_b.push(Coord::Line(sb.exp()));
        }
        let (a, b) = (s.point(coords).unwrap(), s.point(coords_b).unwrap());
        let path = dipping_geodesic(&a, &b);
        let d = model_distance(&a, &b).unwrap();
        assert!((path.length() - d).abs() < 1e-9, "input must be a geodesic");
        if !path.points.iter().all(|p| s.in_systole_set(p, s.eps_t)) {
            dipped += 1;
        }
        let h = weak_convexity_homotope(&s, &path, &HomotopyConfig::new(s.eps_t)).unwrap();
        assert!(path_in_systole_set(&s, &h.path, s.eps_t));
        assert_eq!(h.path.points.first(), path.points.first());
        assert_eq!(h.path.points.last(), path.points.last());
        // no path in the set is shorter than the endpoint distance
        assert!(h.path.length() >= d - 1e-9);
        assert!(h.ratio <= 1.0 + 1e-12, "ratio {}", h.ratio);
    }
    assert!(dipped > 100);
}

#[test]
fn plane_dominated_segments_with_injected_error_inflate_by_at_most_eps_d() {
    let s = ModelSpace::new(vec![FactorKind::Plane, FactorKind::Line, FactorKind::Plane], 0.1).unwrap();
    let eps_d = 0.05;
    let kappa = 1.0;
    let eps = threshold_for_inflation(1.0, eps_d, kappa).unwrap();
    let c = kappa * eps;
    assert!(2.0 * c < eps_d);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cap = 10f64.ln();
    for k in 0..300 {
        let l = rng.gen_range(1.5..10.0);
        let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0)).unwrap();
        let q = p.exp(l, rng.gen_range(0.0..std::f64::consts::TAU));
        let r = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0)).unwrap();
        let r2 = r.exp(rng.gen_range(0.0..l), rng.gen_range(0.0..std::f64::consts::TAU));
        let sa = rng.gen_range(cap - 2.0..cap);
        let sb = rng.gen_range(cap - 2.0..cap);
        let a = s.point(vec![Coord::Plane(p), Coord::Line(sa.exp()), Coord::Plane(r)]).unwrap();
        let b = s.point(vec![Coord::Plane(q), Coord::Line(sb.exp()), Coord::Plane(r2)]).unwrap();
        let path = dipping_geodesic(&a, &b);
        let cfg = HomotopyConfig { delta: 1.0, eps: s.eps_t, injected_error: c, seed: k };
        let h = weak_convexity_homotope(&s, &path, &cfg).unwrap();
        assert!(path_in_systole_set(&s, &h.path, s.eps_t));
        let oracle = dense_length(&h.path) / dense_length(&path);
        assert!((oracle - h.ratio).abs() < 1e-5);
        assert!(h.ratio <= 1.0 + eps_d, "ratio {}", h.ratio);
    }
}

#[test]
fn small_ball_volume_matches_density_times_chart_volume() {
    let s = ModelSpace::new(vec![FactorKind::Plane, FactorKind::Line], 0.1).unwrap();
    let mu = NorburyMeasure::new(s.clone());
    let c = s.point(vec![Coord::Plane(Point::new(0.3, 1.7).unwrap()), Coord::Line(2.0)]).unwrap();
    let r = 0.01;
    let est = mc_ball_volume(&mu, &c, r, 200_000, 1, 4).unwrap();
    let approx = mu.density(&c) * mu.chart_ball_volume(&c, r);
    assert!((est.value / approx - 1.0).abs() < 0.1, "{} vs {approx}", est.value);
}

#[test]
fn plane_ball_volume_matches_closed_form() {
    let s = ModelSpace::new(vec![FactorKind::Plane], 0.1).unwrap();
    let mu = NorburyMeasure::new(s.clone());
    let c = s.point(vec![Coord::Plane(Point::new(-2.0, 0.4).unwrap())]).unwrap();
    for r in [0.5, 1.0, 2.0, 3.0] {
        let est = mc_ball_volume(&mu, &c, r, 100_000, 7, 3).unwrap();
        let exact = 2.0 * std::f64::consts::PI * (r.cosh() - 1.0);
        assert!(est.se > 0.0);
        assert!((est.value - exact).abs() < 3.0 * est.se, "r={r}: {} ± {} vs {exact}", est.value, est.se);
    }
}

#[test]
fn line_ball_volume_matches_quadrature() {
    let s = ModelSpace::new(vec![FactorKind::Line], 0.1).unwrap();
    let mu = NorburyMeasure::new(s.clone());
    let cap = 10f64.ln();
    for s0 in [-0.5, 1.0, 2.0] {
        let c = s.point(vec![Coord::Line(f64::exp(s0))]).unwrap();
        let r = 1.0;
        let est = mc_ball_volume(&mu, &c, r, 100_000, 3, 2).unwrap();
        // Simpson on ∫ coth(e^{-s}) e^{-s} ds over [s0 - r, min(s0 + r, cap)]
        let (lo, hi) = (s0 - r, (s0 + r).min(cap));
        let n = 2000;
        let h = (hi - lo) / n as f64;
        let f = |s: f64| {
            let l = (-s).exp();
            l / l.tanh()
        };
        let mut acc = f(lo) + f(hi);
        for k in 1..n {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(lo + k as f64 * h);
        }
        let exact = acc * h / 3.0;
        assert!((est.value - exact).abs() < 3.0 * est.se + 1e-12, "{} ± {} vs {exact}", est.value, est.se);
    }
}

#[test]
fn volume_is_deterministic_per_seed_and_workers() {
    let s = mixed_space();
    let mu = NorburyMeasure::new(s.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let c = random_systole_point(&s, &mut rng);
    let a = mc_ball_volume(&mu, &c, 1.0, 20_000, 42, 4).unwrap();
    let b = mc_ball_volume(&mu, &c, 1.0, 20_000, 42, 4).unwrap();
    assert_eq!(a, b);
}

#[test]
fn volume_ratio_over_systole_centres_is_bounded() {
    let s = ModelSpace::new(vec![FactorKind::Plane, FactorKind::Plane, FactorKind::Line], 0.1).unwrap();
    let mu = NorburyMeasure::new(s.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let vols: Vec<f64> = (0..50)
        .map(|k| mc_ball_volume(&mu, &random_systole_point(&s, &mut rng), 1.0, 20_000, k, 2).unwrap().value)
        .collect();
    let max = vols.iter().cloned().fold(f64::MIN, f64::max);
    let min = vols.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max / min <= 10.0, "{}", max / min);
}

#[test]
fn coth_sandwich_on_the_systole_set() {
    let eps_t = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10_000 {
        let l = eps_t * rng.gen_range(0.0f64..8.0).exp();
        let w = coth_weight(l);
        assert!((1.0..=coth_weight(eps_t)).contains(&w));
    }
}

#[test]
fn active_intervals_examples() {
    let s = ModelSpace::new(vec![FactorKind::Plane, FactorKind::Plane, FactorKind::Line], 0.1).unwrap();
    let eps = 0.2;
    let thick = s.point(vec![Coord::Plane(Point::i()), Coord::Plane(Point::i()), Coord::Line(1.0)]).unwrap();
    let flat = ModelPath::new(vec![thick.clone(), thick.clone()]).unwrap();
    assert!(active_intervals(&flat, eps).iter().all(|v| v.is_empty()));

    // first plane factor rises over a semicircle through height 1/eps
    let a = s.point(vec![Coord::Plane(Point::new(-20.0, 0.5).unwrap()), Coord::Plane(Point::new(0.0, 2.0).unwrap()), Coord::Line(1.0)]).unwrap();
    let b = s.point(vec![Coord::Plane(Point::new(20.0, 0.5).unwrap()), Coord::Plane(Point::new(0.0, 400.0).unwrap()), Coord::Line(2.0)]).unwrap();
    let path = ModelPath::new(vec![a.clone(), b.clone()]).unwrap();
    let iv = active_intervals(&path, eps);
    assert_eq!(iv[0].len(), 1);
    assert_eq!(iv[1].len(), 1);
    assert!(iv[2].is_empty());
    let len = path.length();
    for k in 0..=4000 {
        let t = len * k as f64 / 4000.0;
        let p = path.point_at(t);
        for f in 0..2 {
            let Coord::Plane(z) = p.coords[f] else { unreachable!() };
            let thin = 1.0 / z.y < eps;
            let inside = iv[f].iter().any(|&(lo, hi)| t >= lo - 1e-6 && t <= hi + 1e-6);
            let strictly = iv[f].iter().any(|&(lo, hi)| t > lo + 1e-6 && t < hi - 1e-6);
            assert!(!thin || inside, "t={t} factor {f}");
            assert!(thin || !strictly, "t={t} factor {f}");
        }
    }
    // both plane factors are thin around the middle of the path
    assert!(iv[0][0].0 < iv[1][0].1 && iv[1][0].0 < iv[0][0].1);
}

/// Nearest orbit index by brute force over a window of candidates.
fn nearest_orbit_index(z: &Point, twist: f64, y_p: f64) -> i64 {
    let guess = (z.x / twist).round() as i64;
    (guess - 50..=guess + 50)
        .min_by(|&a, &b| {
            let da = distance(z, &Point::new(a as f64 * twist, y_p).unwrap());
            let db = distance(z, &Point::new(b as f64 * twist, y_p).unwrap());
            da.total_cmp(&db)
        })
        .unwrap()
}

#[test]
fn dehn_twist_projection_matches_boundary_sampling() {
    for (r, twist) in [(1.0, 1.0), (2.5, 0.7), (4.0, 1.0)] {
        let y_p = 1.0;
        let got = dehn_twist_projection(r, twist, y_p).unwrap();
        let q = Point::new(0.0, y_p * f64::exp(r)).unwrap();
        let n = 20_000;
        let (mut lo, mut hi) = (i64::MAX, i64::MIN);
        for k in 0..n {
            let z = q.exp(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
            let m = nearest_orbit_index(&z, twist, y_p);
            lo = lo.min(m);
            hi = hi.max(m);
        }
        let oracle = distance(&Point::new(lo as f64 * twist, y_p).unwrap(), &Point::new(hi as f64 * twist, y_p).unwrap());
        assert!((got.diameter - oracle).abs() < 1e-9, "r={r}: {} vs {oracle}", got.diameter);
        assert!(got.orbit_distance >= r - 1e-12);
    }
    let d: Vec<f64> = [4.0, 6.0, 8.0].iter().map(|&r| dehn_twist_projection(r, 1.0, 1.0).unwrap().diameter).collect();
    for (k, r) in [4.0, 6.0, 8.0].iter().enumerate() {
        assert!(d[k] >= 1.5 * r);
    }
    assert!(d[2] > d[0] + 2.0);
}

#[test]
fn thick_and_systole_predicates() {
    let s = ModelSpace::new(vec![FactorKind::Plane, FactorKind::Line], 0.1).unwrap();
    let p = s.point(vec![Coord::Plane(Point::new(0.0, 20.0).unwrap()), Coord::Line(5.0)]).unwrap();
    assert!(!s.is_thick(&p, 0.1));
    assert!(s.is_thick(&p, 0.01));
    assert!(s.in_systole_set(&p, 0.1));
    assert!(!s.in_systole_set(&p, 0.5));
    let seg = GeodesicSegment::new(Point::i(), Point::new(0.0, 20.0).unwrap());
    assert!(seg.above_level(10.0).is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn homotopy_output_stays_in_set_and_keeps_endpoints(seed in any::<u64>(), delta in 0.3f64..2.0) {
        let s = mixed_space();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_systole_point(&s, &mut rng);
        let b = random_systole_point(&s, &mut rng);
        let mut m = random_point(&s, &mut rng);
        for c in m.coords.iter_mut() {
            if let Coord::Line(u) = c {
                *u *= 30.0;
            }
        }
        let path = ModelPath::new(vec![a, m, b]).unwrap();
        let cfg = HomotopyConfig { delta, eps: s.eps_t, injected_error: 0.0, seed };
        let h = weak_convexity_homotope(&s, &path, &cfg).unwrap();
        prop_assert!(path_in_systole_set(&s, &h.path, s.eps_t));
        prop_assert_eq!(h.path.points.first(), path.points.first());
        prop_assert_eq!(h.path.points.last(), path.points.last());
        prop_assert!(h.ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn density_is_positive_and_finite_on_the_systole_set(seed in any::<u64>()) {
        let s = mixed_space();
        let mu = NorburyMeasure::new(s.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_systole_point(&s, &mut rng);
        let d = mu.density(&p);
        prop_assert!(d > 0.0 && d.is_finite());
    }
}
