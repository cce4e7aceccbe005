use crate::error::{invalid, Result};
use crate::hyperbolic::{Ideal, Isometry, Point};
use crate::math;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// How discreteness of a presentation is certified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupKind {
    Trivial,
    /// `PSL(2, Z)` generated by `S` and `T`.
    Modular,
    /// `⟨z ↦ z + t⟩`.
    ParabolicCyclic { translation: f64 },
    /// Cyclic group of a single hyperbolic element.
    HyperbolicCyclic,
    /// Free group certified by ping-pong domains.
    Schottky,
    /// Free product of two ping-pong certified groups.
    FreeProduct,
}

/// Closed arc of the boundary circle running from `from` to `to` in the
/// increasing direction (through `∞` when `from > to`). It names the closed
/// half-plane bounded by the geodesic joining its ends on the arc's side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: f64,
    pub to: f64,
}

const TWO_PI: f64 = 2.0 * math::PI;

fn angle(t: Ideal) -> f64 {
    match t {
        Ideal::Finite(t) => 2.0 * math::atan(t),
        Ideal::Infinity => math::PI,
    }
}

fn wrap(a: f64) -> f64 {
    let r = a - TWO_PI * math::floor(a / TWO_PI);
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

impl Arc {
    pub fn new(from: f64, to: f64) -> Result<Arc> {
        if !from.is_finite() || !to.is_finite() || from == to {
            return invalid("arc endpoints must be distinct reals");
        }
        Ok(Arc { from, to })
    }

    fn start(&self) -> f64 {
        angle(Ideal::Finite(self.from))
    }

    fn span(&self) -> f64 {
        wrap(angle(Ideal::Finite(self.to)) - self.start())
    }

    /// Whether the boundary point with circle angle `phi` lies in the arc,
    /// enlarged by `tol` radians on both sides.
    fn contains_angle(&self, phi: f64, tol: f64) -> bool {
        wrap(phi - self.start() + tol) <= self.span() + 2.0 * tol
    }

    pub fn contains(&self, t: Ideal, tol: f64) -> bool {
        self.contains_angle(angle(t), tol)
    }

    /// Strict disjointness with angular gap larger than `tol`.
    pub fn disjoint(&self, o: &Arc, tol: f64) -> bool {
        !self.contains_angle(o.start(), tol) && !o.contains_angle(self.start(), tol)
    }

    /// Whether the interior point `z` lies in the half-plane of the arc.
    pub fn contains_point(&self, z: &Point) -> bool {
        let a = Ideal::Finite(self.from);
        let b = Ideal::Finite(self.to);
        let Ok(g) = crate::hyperbolic::Geodesic::from_endpoints(a, b) else {
            return false;
        };
        // to_axis sends the arc to the positive reals, hence the half-plane to Re > 0.
        g.to_axis().apply(z).map(|w| w.x > 0.0).unwrap_or(false)
    }

    /// An interior point of the arc (in the boundary circle).
    fn midpoint(&self) -> Ideal {
        let phi = self.start() + 0.5 * self.span();
        let phi = if phi > math::PI { phi - TWO_PI } else { phi };
        if math::abs(phi - math::PI) < 1e-15 {
            Ideal::Infinity
        } else {
            Ideal::Finite(math::tan(0.5 * phi))
        }
    }

    /// Möbius map sending `from ↦ 0`, `to ↦ ∞` and the arc onto the positive reals.
    fn normaliser(&self) -> Result<Isometry> {
        let (u, v) = (self.from, self.to);
        if v > u {
            Isometry::new(1.0, -u, -1.0, v)
        } else {
            Isometry::new(1.0, -u, 1.0, -v)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub name: String,
    pub iso: Isometry,
    /// Exact integer matrix when the generator lies in `PSL(2, Z)`.
    pub int: Option<[i64; 4]>,
    /// Ping-pong pair `(D_{g⁻¹}, D_g)`: `g` maps the complement of the first
    /// onto the interior of the second.
    pub domains: Option<(Arc, Arc)>,
}

impl Generator {
    pub fn real(name: &str, iso: Isometry) -> Generator {
        Generator { name: name.to_string(), iso, int: None, domains: None }
    }

    pub fn integer(name: &str, m: [i64; 4]) -> Result<Generator> {
        if m[0] * m[3] - m[1] * m[2] != 1 {
            return invalid(format!("integer generator {name} must have determinant 1"));
        }
        let iso = Isometry::new(m[0] as f64, m[1] as f64, m[2] as f64, m[3] as f64)?;
        Ok(Generator { name: name.to_string(), iso, int: Some(canonical_int(m)), domains: None })
    }

    pub fn inverse(&self) -> Generator {
        Generator {
            name: inverse_name(&self.name),
            iso: self.iso.inverse(),
            int: self.int.map(|m| canonical_int([m[3], -m[1], -m[2], m[0]])),
            domains: self.domains.map(|(a, b)| (b, a)),
        }
    }
}

fn inverse_name(n: &str) -> String {
    match n.strip_suffix("^-1") {
        Some(base) => base.to_string(),
        None => format!("{n}^-1"),
    }
}

pub(crate) fn canonical_int(m: [i64; 4]) -> [i64; 4] {
    let lead = m.into_iter().find(|v| *v != 0).unwrap_or(1);
    if lead < 0 {
        [-m[0], -m[1], -m[2], -m[3]]
    } else {
        m
    }
}

/// Finitely generated subgroup of `PSL(2, R)` with a discreteness certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPresentation {
    pub kind: GroupKind,
    pub generators: Vec<Generator>,
}

impl GroupPresentation {
    pub fn trivial() -> GroupPresentation {
        GroupPresentation { kind: GroupKind::Trivial, generators: Vec::new() }
    }

    pub fn modular() -> GroupPresentation {
        GroupPresentation {
            kind: GroupKind::Modular,
            generators: alloc::vec![
                Generator::integer("S", [0, -1, 1, 0]).unwrap(),
                Generator::integer("T", [1, 1, 0, 1]).unwrap(),
            ],
        }
    }

    pub fn parabolic(translation: f64) -> Result<GroupPresentation> {
        if !(translation > 0.0) || !translation.is_finite() {
            return invalid("parabolic translation must be positive");
        }
        let g = if translation == math::round(translation) && translation < 1e9 {
            Generator::integer("T", [1, translation as i64, 0, 1])?
        } else {
            Generator::real("T", Isometry::new(1.0, translation, 0.0, 1.0)?)
        };
        Ok(GroupPresentation { kind: GroupKind::ParabolicCyclic { translation }, generators: alloc::vec![g] })
    }

    /// `⟨diag(q, 1/q)⟩` with ping-pong domains `|z| ≤ 1/q` and `|z| ≥ q`.
    pub fn hyperbolic_cyclic(q: f64) -> Result<GroupPresentation> {
        if !(q > 1.0) || !q.is_finite() {
            return invalid("hyperbolic generator needs q > 1");
        }
        let mut g = Generator::real("A", Isometry::new(q, 0.0, 0.0, 1.0 / q)?);
        g.domains = Some((Arc::new(-1.0 / q, 1.0 / q)?, Arc::new(q, -q)?));
        let p = GroupPresentation { kind: GroupKind::HyperbolicCyclic, generators: alloc::vec![g] };
        p.certify()?;
        Ok(p)
    }

    /// Schottky group with one generator per pair of disjoint arcs `(I, J)`;
    /// the generator maps the outside of `I` onto the inside of `J`.
    pub fn schottky(pairs: &[(Arc, Arc)]) -> Result<GroupPresentation> {
        let mut gens = Vec::new();
        for (k, (i, j)) in pairs.iter().enumerate() {
            let s = Isometry::new(0.0, -1.0, 1.0, 0.0)?;
            let g = j.normaliser()?.inverse().compose(&s).compose(&i.normaliser()?);
            let mut gen = Generator::real(&format!("B{}", k + 1), g);
            gen.domains = Some((*i, *j));
            gens.push(gen);
        }
        let p = GroupPresentation { kind: GroupKind::Schottky, generators: gens };
        p.certify()?;
        Ok(p)
    }

    /// `h G h⁻¹`, with ping-pong domains carried along by `h`.
    pub fn conjugate(&self, h: &Isometry) -> Result<GroupPresentation> {
        let hi = h.inverse();
        let image = |t: f64| match h.apply_ideal(Ideal::Finite(t)) {
            Ideal::Finite(u) => Ok(u),
            Ideal::Infinity => invalid("conjugation sends a domain endpoint to infinity"),
        };
        let mut gens = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let mut c = Generator::real(&g.name, h.compose(&g.iso).compose(&hi));
            if let Some((i, j)) = g.domains {
                c.domains = Some((Arc::new(image(i.from)?, image(i.to)?)?, Arc::new(image(j.from)?, image(j.to)?)?));
            }
            gens.push(c);
        }
        let kind = match self.kind {
            GroupKind::Modular | GroupKind::ParabolicCyclic { .. } => {
                return invalid("conjugation is only supported for ping-pong presentations")
            }
            k => k,
        };
        let p = GroupPresentation { kind, generators: gens };
        p.certify()?;
        Ok(p)
    }

    /// General presentation; determinants must be `1 ± 1e-12`.
    pub fn from_generators(kind: GroupKind, generators: Vec<Generator>) -> Result<GroupPresentation> {
        for g in &generators {
            if math::abs(g.iso.det() - 1.0) > 1e-12 {
                return invalid(format!("generator {} has determinant {}", g.name, g.iso.det()));
            }
        }
        let p = GroupPresentation { kind, generators };
        p.certify()?;
        Ok(p)
    }

    /// Checks the discreteness certificate of the presentation.
    pub fn certify(&self) -> Result<()> {
        match self.kind {
            GroupKind::Trivial => {
                if !self.generators.is_empty() {
                    return invalid("trivial group with generators");
                }
            }
            GroupKind::Modular => {
                let ok = self.generators.len() == 2
                    && self.generators.iter().all(|g| g.int.is_some());
                if !ok {
                    return invalid("modular presentation must be S, T");
                }
            }
            GroupKind::ParabolicCyclic { .. } => {
                if self.generators.len() != 1 || math::abs(math::abs(self.generators[0].iso.trace()) - 2.0) > 1e-12 {
                    return invalid("parabolic cyclic group needs one parabolic generator");
                }
            }
            GroupKind::HyperbolicCyclic => {
                if self.generators.len() != 1 || math::abs(self.generators[0].iso.trace()) <= 2.0 {
                    return invalid("hyperbolic cyclic group needs one hyperbolic generator");
                }
            }
            GroupKind::Schottky | GroupKind::FreeProduct => certify_ping_pong(&self.generators)?,
        }
        Ok(())
    }

    /// Generators followed by the inverses that differ from them.
    pub fn symmetric_generators(&self) -> Vec<Generator> {
        let mut out = self.generators.clone();
        for g in &self.generators {
            let inv = g.inverse();
            let same = match (g.int, inv.int) {
                (Some(a), Some(b)) => a == b,
                _ => {
                    let (x, y) = (g.iso, inv.iso);
                    math::abs(x.a - y.a) + math::abs(x.b - y.b) + math::abs(x.c - y.c) + math::abs(x.d - y.d) < 1e-12
                }
            };
            if !same {
                out.push(inv);
            }
        }
        out
    }

    /// Height of `z` after reduction into the standard cusp neighbourhood,
    /// for groups that have one.
    pub fn cusp_height(&self, z: &Point) -> Option<f64> {
        match self.kind {
            GroupKind::Modular => Some(reduce_modular(z).0.y),
            GroupKind::ParabolicCyclic { .. } => Some(z.y),
            _ => None,
        }
    }

    pub fn is_integral(&self) -> bool {
        self.generators.iter().all(|g| g.int.is_some())
    }
}

fn certify_ping_pong(gens: &[Generator]) -> Result<()> {
    let tol = 1e-9;
    let mut arcs = Vec::new();
    for g in gens {
        let Some((i, j)) = g.domains else {
            return invalid(format!("generator {} has no ping-pong domains", g.name));
        };
        // g sends the ends of I to the ends of J with orientation swapped, and
        // the outside of I into J.
        let to_ideal = |t: f64| Ideal::Finite(t);
        let hits = |a: Ideal, b: f64| match a {
            Ideal::Finite(a) => math::abs(angle(Ideal::Finite(a)) - angle(Ideal::Finite(b))) < 1e-7,
            Ideal::Infinity => false,
        };
        if !hits(g.iso.apply_ideal(to_ideal(i.to)), j.from) || !hits(g.iso.apply_ideal(to_ideal(i.from)), j.to) {
            return invalid(format!("generator {} does not pair its domain boundaries", g.name));
        }
        let outside = Arc { from: i.to, to: i.from }.midpoint();
        if !j.contains(g.iso.apply_ideal(outside), tol) {
            return invalid(format!("generator {} does not map outside into its domain", g.name));
        }
        arcs.push(i);
        arcs.push(j);
    }
    for a in 0..arcs.len() {
        for b in a + 1..arcs.len() {
            if !arcs[a].disjoint(&arcs[b], tol) {
                return invalid("ping-pong domains overlap");
            }
        }
    }
    Ok(())
}

/// Free product of two ping-pong certified groups; a trivial factor returns
/// the other one.
pub fn free_product(a: &GroupPresentation, b: &GroupPresentation) -> Result<GroupPresentation> {
    if a.generators.is_empty() {
        return Ok(b.clone());
    }
    if b.generators.is_empty() {
        return Ok(a.clone());
    }
    let mut gens = a.generators.clone();
    for g in &b.generators {
        let mut g = g.clone();
        if gens.iter().any(|h| h.name == g.name) {
            g.name = format!("{}'", g.name);
        }
        gens.push(g);
    }
    certify_ping_pong(&gens)?;
    Ok(GroupPresentation { kind: GroupKind::FreeProduct, generators: gens })
}

/// Reduces `z` into `{|x| ≤ 1/2, |z| ≥ 1}`; returns the reduced point and an
/// integer matrix `γ` with `γ z` equal to it.
pub fn reduce_modular(z: &Point) -> (Point, [i64; 4]) {
    let (mut x, mut y) = (z.x, z.y);
    let mut m: [i64; 4] = [1, 0, 0, 1];
    for _ in 0..10_000 {
        let n = math::round(x);
        if n != 0.0 {
            x -= n;
            let n = n as i64;
            // T^{-n} · m
            m = [m[0] - n * m[2], m[1] - n * m[3], m[2], m[3]];
        }
        let r2 = x * x + y * y;
        if r2 < 1.0 - 1e-14 {
            x = -x / r2;
            y /= r2;
            // S · m
            m = [-m[2], -m[3], m[0], m[1]];
        } else {
            break;
        }
    }
    (Point { x, y }, canonical_int(m))
}
