use proptest::prelude::*;
use scc_core::fuchsian::*;
use scc_core::hyperbolic::*;
use scc_core::Error;
use std::collections::HashSet;
use std::sync::OnceLock;

fn modular_orbit_12() -> &'static OrbitEnumeration {
    static O: OnceLock<OrbitEnumeration> = OnceLock::new();
    O.get_or_init(|| enumerate_orbit(&GroupPresentation::modular(), &Point::i(), &OrbitConfig::new(12.0)).unwrap())
}

fn wide_schottky() -> GroupPresentation {
    GroupPresentation::schottky(&[
        (Arc::new(0.35, 0.7).unwrap(), Arc::new(-0.7, -0.35).unwrap()),
        (Arc::new(1.5, 3.0).unwrap(), Arc::new(-3.0, -1.5).unwrap()),
    ])
    .unwrap()
}

fn mul(a: [i64; 4], b: [i64; 4]) -> [i64; 4] {
    [a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]]
}

fn canon(m: [i64; 4]) -> [i64; 4] {
    let lead = m.iter().copied().find(|v| *v != 0).unwrap();
    if lead < 0 {
        [-m[0], -m[1], -m[2], -m[3]]
    } else {
        m
    }
}

/// Number of elements of `PSL(2, Z)` with `d(i, γi) ≤ R`, from
/// `2 cosh d(i, γi) = a² + b² + c² + d²`.
fn modular_count_oracle(r: f64) -> usize {
    let bound = 2.0 * r.cosh();
    let m = bound.sqrt().floor() as i64;
    let mut n = 0usize;
    for a in -m..=m {
        for b in -m..=m {
            for c in -m..=m {
                let ds: Vec<i64> = if a == 0 {
                    if b * c == -1 {
                        (-m..=m).collect()
                    } else {
                        vec![]
                    }
                } else if (1 + b * c) % a == 0 {
                    vec![(1 + b * c) / a]
                } else {
                    vec![]
                };
                for d in ds {
                    if ((a * a + b * b + c * c + d * d) as f64) <= bound {
                        n += 1;
                    }
                }
            }
        }
    }
    n / 2
}

#[test]
fn modular_counts_match_integer_oracle() {
    let o = enumerate_orbit(&GroupPresentation::modular(), &Point::i(), &OrbitConfig::new(6.5)).unwrap();
    for r in [0.5, 1.5, 2.5, 4.0, 5.5, 6.5] {
        assert_eq!(o.count_within(r), modular_count_oracle(r), "R = {r}");
    }
}

#[test]
fn modular_stabiliser_of_i_by_word_enumeration() {
    let gens = [[0, -1, 1, 0], [1, 1, 0, 1], [1, -1, 0, 1]];
    let mut level = vec![[1i64, 0, 0, 1]];
    let mut all: HashSet<[i64; 4]> = level.iter().copied().collect();
    for _ in 0..6 {
        let mut next = Vec::new();
        for w in &level {
            for g in &gens {
                next.push(canon(mul(*w, *g)));
            }
        }
        all.extend(next.iter().copied());
        level = next;
    }
    let fixing = all.iter().filter(|m| m.iter().map(|v| v * v).sum::<i64>() == 2).count();
    let o = enumerate_orbit(&GroupPresentation::modular(), &Point::i(), &OrbitConfig::new(0.0)).unwrap();
    assert_eq!(fixing, 2);
    assert_eq!(o.count_within(0.0), fixing);
}

#[test]
fn modular_exponent_is_one() {
    let o = modular_orbit_12();
    let radii: Vec<f64> = (6..=12).map(|r| r as f64).collect();
    let e = estimate_critical_exponent(o, &radii).unwrap();
    assert!((e.value - 1.0).abs() <= 0.15, "{}", e.value);
    assert!(e.interval.0 <= e.value && e.value <= e.interval.1);
}

#[test]
fn cyclic_orbit_counts_are_linear() {
    let g = GroupPresentation::hyperbolic_cyclic(std::f64::consts::E).unwrap();
    let o = enumerate_orbit(&g, &Point::i(), &OrbitConfig::new(60.5)).unwrap();
    for r in [0.5, 1.9, 2.1, 7.3, 30.5, 60.5] {
        assert_eq!(o.count_within(r), 2 * (r / 2.0).floor() as usize + 1, "R = {r}");
    }
    let radii: Vec<f64> = (30..=60).step_by(5).map(|r| r as f64 + 0.5).collect();
    let e = estimate_critical_exponent(&o, &radii).unwrap();
    assert!(e.value.abs() <= 0.05, "{}", e.value);
}

#[test]
fn reduced_words_reproduce_free_group_elements() {
    let g = wide_schottky();
    let o = enumerate_orbit(&g, &Point::i(), &OrbitConfig::new(10.0)).unwrap();
    let gens = g.symmetric_generators();
    for &i in &o.within {
        let w = o.word(i as usize);
        for pair in w.windows(2) {
            assert_ne!((pair[0] as usize + 2) % 4, pair[1] as usize, "word {} is not reduced", o.word_string(i as usize));
        }
        let mut m = Isometry::IDENTITY;
        for l in &w {
            m = m.compose(&gens[*l as usize].iso);
        }
        let q = m.apply(&Point::i()).unwrap();
        assert!(distance(&q, &o.records[i as usize].point) < 1e-8);
    }
    // no two enumerated elements share an orbit point (trivial stabiliser)
    let pts: Vec<Point> = o.within.iter().map(|&i| o.records[i as usize].point).collect();
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            assert!(distance(&pts[a], &pts[b]) > 1e-7);
        }
    }
}

#[test]
fn schottky_exponent_lies_strictly_between_zero_and_one() {
    let o = enumerate_orbit(&wide_schottky(), &Point::i(), &OrbitConfig::new(20.0)).unwrap();
    let radii: Vec<f64> = (10..=20).map(|r| r as f64).collect();
    let e = estimate_critical_exponent(&o, &radii).unwrap();
    assert!(e.value > 0.0 && e.value < 1.0, "{}", e.value);
}

#[test]
fn degenerate_counts_are_rejected() {
    let o = enumerate_orbit(&GroupPresentation::trivial(), &Point::i(), &OrbitConfig::new(5.0)).unwrap();
    assert_eq!(o.len(), 1);
    assert!(matches!(estimate_critical_exponent(&o, &[1.0, 2.0, 3.0, 4.0]), Err(Error::Degenerate(_))));
    assert!(matches!(estimate_critical_exponent(&o, &[1.0, 2.0, 3.0]), Err(Error::InvalidInput(_))));
}

#[test]
fn submultiplicative_up_to_constant() {
    let o = modular_orbit_12();
    let mut worst: f64 = 0.0;
    for r1 in 1..=6 {
        for r2 in r1..=6 {
            let lhs = o.count_within((r1 + r2) as f64) as f64;
            let rhs = (o.count_within(r1 as f64) * o.count_within(r2 as f64)) as f64;
            worst = worst.max(lhs / rhs);
        }
    }
    assert!(worst <= 2.0, "{worst}");
}

#[test]
fn poincare_sums_cyclic_h_zero_counts_elements() {
    let g = GroupPresentation::hyperbolic_cyclic(std::f64::consts::E).unwrap();
    let o = enumerate_orbit(&g, &Point::i(), &OrbitConfig::new(40.5)).unwrap();
    let radii: Vec<f64> = (0..=40).map(|r| r as f64 + 0.5).collect();
    let s = poincare_partial_sum(&o, 0.0, &radii, 1e-6).unwrap();
    for (k, &r) in radii.iter().enumerate() {
        assert_eq!(s.partial_sums[k], o.count_within(r) as f64);
    }
    assert_eq!(s.verdict, SeriesVerdict::Divergent);
}

#[test]
fn poincare_modular_h_two_converges() {
    let o = modular_orbit_12();
    let radii: Vec<f64> = (0..=1200).map(|k| k as f64 * 0.01).collect();
    let s = poincare_partial_sum(o, 2.0, &radii, 1e-6).unwrap();
    assert_eq!(s.verdict, SeriesVerdict::Convergent);
    assert!(*s.increments.last().unwrap() < 1e-6);
    assert!(s.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    let s1 = poincare_partial_sum(o, 1.0, &radii, 1e-6).unwrap();
    assert_eq!(s1.verdict, SeriesVerdict::Divergent);
}

#[test]
fn poincare_radius_beyond_orbit_is_rejected() {
    let o = enumerate_orbit(&GroupPresentation::modular(), &Point::i(), &OrbitConfig::new(3.0)).unwrap();
    assert!(poincare_partial_sum(&o, 1.0, &[1.0, 4.0], 1e-6).is_err());
    assert!(poincare_partial_sum(&o, 1.0, &[2.0, 1.0], 1e-6).is_err());
}

#[test]
fn free_product_with_trivial_returns_factor() {
    let b = wide_schottky();
    assert_eq!(free_product(&GroupPresentation::trivial(), &b).unwrap(), b);
    assert_eq!(free_product(&b, &GroupPresentation::trivial()).unwrap(), b);
}

#[test]
fn crossed_hyperbolic_cyclic_groups_form_a_free_product() {
    let a = GroupPresentation::hyperbolic_cyclic(4.0).unwrap();
    let c = (std::f64::consts::PI / 4.0).cos();
    let rot = Isometry::new(c, c, -c, c).unwrap();
    let b = a.conjugate(&rot).unwrap();
    // axes cross at i
    let ga = b.generators[0].iso;
    assert!((ga.displacement(&Point::i()).unwrap() - 2.0 * 4f64.ln()).abs() < 1e-9);
    let fp = free_product(&a, &b).unwrap();
    assert_eq!(fp.kind, GroupKind::FreeProduct);
    assert_eq!(fp.generators.len(), 2);
    // unpowered generators overlap
    let a2 = GroupPresentation::hyperbolic_cyclic(1.5).unwrap();
    let b2 = a2.conjugate(&rot).unwrap();
    assert!(free_product(&a2, &b2).is_err());
}

#[test]
fn free_product_exponent_gap_and_geometric_lower_bound() {
    let a = GroupPresentation::hyperbolic_cyclic(4.0).unwrap();
    let b = wide_schottky();
    let fp = free_product(&a, &b).unwrap();
    let p = Point::i();
    let oa = enumerate_orbit(&a, &p, &OrbitConfig::new(9.0)).unwrap();
    let ob = enumerate_orbit(&b, &p, &OrbitConfig::new(22.0)).unwrap();
    let of = enumerate_orbit(&fp, &p, &OrbitConfig::new(18.0)).unwrap();
    let rb: Vec<f64> = (11..=22).map(|r| r as f64).collect();
    let rf: Vec<f64> = (9..=18).map(|r| r as f64).collect();
    let eb = estimate_critical_exponent(&ob, &rb).unwrap().value;
    let ef = estimate_critical_exponent(&of, &rf).unwrap().value;
    assert!(ef >= eb + 0.1, "free product {ef} vs factor {eb}");

    let h = eb + 0.05;
    let radii: Vec<f64> = (1..=18).map(|r| r as f64).collect();
    let s = poincare_partial_sum(&of, h, &radii, 1e-6).unwrap();
    for (k, &r) in radii.iter().enumerate() {
        let lb = free_product_lower_bound(&oa, &ob, h, r).unwrap();
        assert!(s.partial_sums[k] >= lb, "R = {r}: {} < {lb}", s.partial_sums[k]);
    }
}

/// For `⟨z ↦ z + 1⟩`, decides concavity of `T^n` by walking the circle
/// arc through `i` and `n + i` in angle and measuring arclength to `i`.
fn parabolic_concave_oracle(n: i64, s: f64, level: f64) -> bool {
    let nf = n as f64;
    let len = 2.0 * (nf.abs() / 2.0).asinh();
    if len <= 2.0 * s {
        return false;
    }
    let cx = 0.5 * nf;
    let r = (0.25 * nf * nf + 1.0).sqrt();
    let (a0, a1) = (1f64.atan2(-cx), 1f64.atan2(nf - cx));
    let steps = 20_000;
    let p = Point::i();
    for k in 0..=steps {
        let t = a0 + (a1 - a0) * k as f64 / steps as f64;
        let z = Point { x: cx + r * t.cos(), y: r * t.sin() };
        let d = distance(&p, &z);
        if d >= s && d <= len - s && z.y <= level {
            return false;
        }
    }
    true
}

#[test]
fn parabolic_concave_counts_match_sampling_oracle() {
    let g = GroupPresentation::parabolic(1.0).unwrap();
    let r_max = 14.0;
    let o = enumerate_orbit(&g, &Point::i(), &OrbitConfig::new(r_max)).unwrap();
    let eps = 0.5;
    let radii: Vec<f64> = (4..=14).map(|r| r as f64).collect();
    let c = count_concave_lattice_points(&g, &o, &ConcaveConfig::new(eps), &radii).unwrap();
    let n_max = (2.0 * (r_max / 2.0).sinh()).floor() as i64;
    let oracle: Vec<i64> = (-n_max..=n_max).filter(|&n| n != 0 && parabolic_concave_oracle(n, c.prefix, 1.0 / eps)).collect();
    for (k, &r) in radii.iter().enumerate() {
        let expect = oracle.iter().filter(|&&n| 2.0 * (n.abs() as f64 / 2.0).asinh() <= r).count();
        assert_eq!(c.counts[k], expect, "R = {r}");
    }
    // every long enough excursion is concave: the deficit stabilises
    let deficits: Vec<usize> = radii.iter().enumerate().map(|(k, &r)| o.count_within(r) - c.counts[k]).collect();
    let tail = &deficits[deficits.len() - 4..];
    assert!(tail.iter().all(|&d| d == tail[0]), "{deficits:?}");
}

#[test]
fn concave_points_are_rarer_than_lattice_points() {
    let o = modular_orbit_12();
    let g = GroupPresentation::modular();
    let radii: Vec<f64> = (6..=12).map(|r| r as f64).collect();
    let c = count_concave_lattice_points(&g, o, &ConcaveConfig::new(0.5), &radii).unwrap();
    for (k, &r) in radii.iter().enumerate() {
        assert!(c.counts[k] <= o.count_within(r));
    }
    let ys: Vec<f64> = c.counts.iter().map(|&v| v as f64).collect();
    let hc = scc_core::stats::fit_log_slope(&radii, &ys).unwrap().slope;
    let h = estimate_critical_exponent(o, &radii).unwrap().value;
    assert!(h - hc >= 0.2, "{h} vs {hc}");
}

#[test]
fn overlapping_schottky_domains_are_rejected() {
    let r = GroupPresentation::schottky(&[
        (Arc::new(0.3, 0.8).unwrap(), Arc::new(-0.8, -0.3).unwrap()),
        (Arc::new(0.6, 3.0).unwrap(), Arc::new(-3.0, -1.5).unwrap()),
    ]);
    assert!(r.is_err());
}

fn modular_word(letters: &[u8]) -> Isometry {
    let s = Isometry::new(0.0, -1.0, 1.0, 0.0).unwrap();
    let t = Isometry::new(1.0, 1.0, 0.0, 1.0).unwrap();
    let mut m = Isometry::IDENTITY;
    for l in letters {
        m = m.compose(match l % 3 {
            0 => &s,
            1 => &t,
            _ => &Isometry { a: 1.0, b: -1.0, c: 0.0, d: 1.0 },
        });
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn orbit_counts_are_basepoint_equivariant(x in -0.5f64..0.5, y in 1.05f64..2.0, word in proptest::collection::vec(0u8..3, 0..5)) {
        let g = GroupPresentation::modular();
        let p = Point::new(x, y).unwrap();
        let gp = modular_word(&word).apply(&p).unwrap();
        let cfg = OrbitConfig::new(5.0);
        let a = enumerate_orbit(&g, &p, &cfg).unwrap();
        let b = enumerate_orbit(&g, &gp, &cfg).unwrap();
        for r in [1.3, 2.7, 4.1, 5.0] {
            prop_assert_eq!(a.count_within(r), b.count_within(r));
        }
    }

    #[test]
    fn poincare_sums_decrease_in_h(h1 in 0.0f64..3.0, dh in 0.0f64..2.0) {
        let o = modular_orbit_12();
        let radii = [2.0, 5.0, 8.0, 12.0];
        let lo = poincare_partial_sum(o, h1, &radii, 1e-6).unwrap();
        let hi = poincare_partial_sum(o, h1 + dh, &radii, 1e-6).unwrap();
        for k in 0..radii.len() {
            prop_assert!(hi.partial_sums[k] <= lo.partial_sums[k]);
        }
    }

    #[test]
    fn orbit_distances_are_bounded_and_monotone(r in 0.0f64..5.0) {
        let o = enumerate_orbit(&GroupPresentation::modular(), &Point::i(), &OrbitConfig::new(r)).unwrap();
        let ds: Vec<f64> = o.distances().collect();
        prop_assert!(ds.iter().all(|&d| d <= r));
        prop_assert!(ds.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(o.count_within(r), modular_count_oracle(r));
    }
}
