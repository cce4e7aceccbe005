use super::group::{GroupKind, GroupPresentation};
use super::orbit::OrbitEnumeration;
use crate::error::{invalid, Result};
use crate::hyperbolic::{distance, GeodesicSegment, Point};
use crate::math;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcaveConfig {
    /// A point is thin when its reduced height exceeds `1/eps`.
    pub eps: f64,
    /// Length of the free prefix and suffix; defaults to twice the diameter
    /// of the thick part.
    pub prefix: Option<f64>,
    /// Sampling step along the connecting geodesic.
    pub spacing: f64,
}

impl ConcaveConfig {
    pub fn new(eps: f64) -> ConcaveConfig {
        ConcaveConfig { eps, prefix: None, spacing: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveCounts {
    pub radii: Vec<f64>,
    pub counts: Vec<usize>,
    /// Prefix/suffix length actually used.
    pub prefix: f64,
    /// Orbit indices (into `records`) of the concave elements.
    pub concave: Vec<u32>,
}

/// Diameter of the thick part `{height ≤ 1/eps}` of the group's standard
/// fundamental domain, taken over a dense boundary sample.
pub fn thick_diameter(group: &GroupPresentation, eps: f64, base: &Point) -> Result<f64> {
    if !(eps > 0.0) {
        return invalid("eps must be positive");
    }
    let top = 1.0 / eps;
    let n = 200;
    let mut pts = Vec::new();
    match group.kind {
        GroupKind::Modular => {
            let bottom = 0.5 * math::sqrt(3.0);
            if top <= bottom {
                return invalid("eps leaves no thick part");
            }
            for k in 0..=n {
                let t = k as f64 / n as f64;
                let phi = math::PI / 3.0 + t * math::PI / 3.0;
                pts.push(Point { x: math::cos(phi), y: math::sin(phi) });
                let y = bottom + t * (top - bottom);
                pts.push(Point { x: -0.5, y });
                pts.push(Point { x: 0.5, y });
                pts.push(Point { x: -0.5 + t, y: top });
            }
        }
        GroupKind::ParabolicCyclic { translation } => {
            let lo = base.y;
            if top <= lo {
                return invalid("eps leaves no thick part above the base point");
            }
            let (a, b) = (base.x - 0.5 * translation, base.x + 0.5 * translation);
            for k in 0..=n {
                let t = k as f64 / n as f64;
                let y = lo + t * (top - lo);
                pts.push(Point { x: a, y });
                pts.push(Point { x: b, y });
                pts.push(Point { x: a + t * translation, y: lo });
                pts.push(Point { x: a + t * translation, y: top });
            }
        }
        _ => return invalid("thick part is only defined for groups with a cusp"),
    }
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.max(distance(&pts[i], &pts[j]));
        }
    }
    Ok(best)
}

/// Counts orbit points `γp` whose connecting geodesic, outside a prefix and a
/// suffix of length `s`, stays thin at every sample.
pub fn count_concave_lattice_points(
    group: &GroupPresentation,
    orbit: &OrbitEnumeration,
    cfg: &ConcaveConfig,
    radii: &[f64],
) -> Result<ConcaveCounts> {
    if !(cfg.eps > 0.0) || !(cfg.spacing > 0.0) {
        return invalid("concave counting needs eps > 0 and spacing > 0");
    }
    if radii.iter().any(|&r| r > orbit.radius) {
        return invalid("radius exceeds the enumerated orbit");
    }
    if group.cusp_height(&orbit.base).is_none() {
        return invalid("concave counting needs a group with a cusp reduction");
    }
    let s = match cfg.prefix {
        Some(s) => s,
        None => 2.0 * thick_diameter(group, cfg.eps, &orbit.base)?,
    };
    let level = 1.0 / cfg.eps;
    let p = orbit.base;
    let mut concave = Vec::new();
    for &i in &orbit.within {
        let rec = &orbit.records[i as usize];
        let len = rec.distance;
        if len <= 2.0 * s {
            continue;
        }
        let seg = GeodesicSegment::new(p, rec.point);
        let mut t = s;
        let mut thin = true;
        loop {
            let tt = t.min(len - s);
            let z = seg.point_at(tt / len);
            if group.cusp_height(&z).unwrap() <= level {
                thin = false;
                break;
            }
            if tt >= len - s {
                break;
            }
            t += cfg.spacing;
        }
        if thin {
            concave.push(i);
        }
    }
    let counts = radii
        .iter()
        .map(|&r| concave.iter().filter(|&&i| orbit.records[i as usize].distance <= r).count())
        .collect();
    Ok(ConcaveCounts { radii: radii.to_vec(), counts, prefix: s, concave })
}

#[cfg(test)]
mod tests {
    use super::super::orbit::{enumerate_orbit, OrbitConfig};
    use super::*;

    #[test]
    fn short_radius_has_no_room() {
        let g = GroupPresentation::modular();
        let o = enumerate_orbit(&g, &Point::i(), &OrbitConfig::new(3.0)).unwrap();
        let c = count_concave_lattice_points(&g, &o, &ConcaveConfig::new(0.5), &[3.0]).unwrap();
        assert!(c.prefix > 1.5);
        assert_eq!(c.counts, [0]);
    }

    #[test]
    fn thick_diameter_grows_with_depth() {
        let g = GroupPresentation::modular();
        let a = thick_diameter(&g, 0.5, &Point::i()).unwrap();
        let b = thick_diameter(&g, 0.1, &Point::i()).unwrap();
        assert!(b > a + 1.0);
    }
}
