//! Upper half-plane model of the hyperbolic plane.
//!
//! Points are `x + iy` with `y > 0`. Isometries are unit-determinant real
//! Möbius maps, stored up to sign with the first nonzero entry positive.

use crate::error::{degenerate, invalid, Result};
use crate::math;
use alloc::format;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Point> {
        if !x.is_finite() || !y.is_finite() || !(y > 0.0) {
            return invalid(format!("point ({x}, {y}) is not in the upper half-plane"));
        }
        Ok(Point { x, y })
    }

    pub const fn i() -> Point {
        Point { x: 0.0, y: 1.0 }
    }

    /// The point at distance `r` from `self` in direction `theta`, measured
    /// from the upward vertical.
    pub fn exp(&self, r: f64, theta: f64) -> Point {
        let (ch, sh) = (math::cosh(r), math::sinh(r));
        let den = ch - sh * math::cos(theta);
        Point {
            x: self.x + self.y * sh * math::sin(theta) / den,
            y: self.y / den,
        }
    }
}

/// `cosh` of the hyperbolic distance.
pub fn cosh_distance(p: &Point, q: &Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    (1.0 + (dx * dx + dy * dy) / (2.0 * p.y * q.y)).max(1.0)
}

/// Hyperbolic distance, evaluated through `2 asinh(|p - q| / (2 sqrt(y1 y2)))`
/// which keeps precision for nearby points.
pub fn distance(p: &Point, q: &Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    2.0 * math::asinh(math::sqrt(dx * dx + dy * dy) / (2.0 * math::sqrt(p.y * q.y)))
}

/// Area of a hyperbolic disc of radius `r`.
pub fn ball_area(r: f64) -> f64 {
    let s = math::sinh(0.5 * r);
    4.0 * math::PI * s * s
}

/// Euclidean centre `(cx, cy)` and radius of the hyperbolic disc `B_r(p)`.
pub fn ball_euclidean(p: &Point, r: f64) -> (f64, f64, f64) {
    (p.x, p.y * math::cosh(r), p.y * math::sinh(r))
}

/// A boundary point of the half-plane: a real number or `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ideal {
    Finite(f64),
    Infinity,
}

/// Orientation-preserving isometry `z ↦ (az + b)/(cz + d)` with `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    /// Normalises a positive-determinant matrix to determinant one.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Isometry> {
        let det = a * d - b * c;
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return invalid("isometry entries must be finite");
        }
        if !(det > 0.0) {
            return invalid(format!("determinant {det} is not positive"));
        }
        let s = math::sqrt(det);
        Ok(Isometry { a: a / s, b: b / s, c: c / s, d: d / s }.canonical())
    }

    /// Sign representative with the first nonzero entry positive.
    pub fn canonical(self) -> Isometry {
        let lead = [self.a, self.b, self.c, self.d]
            .into_iter()
            .find(|v| *v != 0.0)
            .unwrap_or(1.0);
        if lead < 0.0 {
            Isometry { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            self
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { a: self.d, b: -self.b, c: -self.c, d: self.a }.canonical()
    }

    /// `self ∘ other`.
    pub fn compose(&self, o: &Isometry) -> Isometry {
        Isometry {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
        .canonical()
    }

    pub fn apply(&self, z: &Point) -> Result<Point> {
        let re = self.c * z.x + self.d;
        let im = self.c * z.y;
        let den = re * re + im * im;
        let x = ((self.a * z.x + self.b) * re + self.a * self.c * z.y * z.y) / den;
        let y = z.y * self.det() / den;
        if !(den > 0.0) || !x.is_finite() || !y.is_finite() || !(y > 0.0) {
            return degenerate("image escapes to the boundary");
        }
        Ok(Point { x, y })
    }

    pub fn apply_ideal(&self, t: Ideal) -> Ideal {
        match t {
            Ideal::Infinity => {
                if self.c == 0.0 {
                    Ideal::Infinity
                } else {
                    Ideal::Finite(self.a / self.c)
                }
            }
            Ideal::Finite(t) => {
                let den = self.c * t + self.d;
                if den == 0.0 {
                    Ideal::Infinity
                } else {
                    Ideal::Finite((self.a * t + self.b) / den)
                }
            }
        }
    }

    /// Distance moved by `p`.
    pub fn displacement(&self, p: &Point) -> Result<f64> {
        Ok(distance(p, &self.apply(p)?))
    }
}

/// Oriented complete geodesic from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic {
    pub a: Ideal,
    pub b: Ideal,
    to_axis: Isometry,
}

impl Geodesic {
    pub fn from_endpoints(a: Ideal, b: Ideal) -> Result<Geodesic> {
        let to_axis = match (a, b) {
            (Ideal::Finite(a), Ideal::Finite(b)) => {
                if !(a.is_finite() && b.is_finite()) || a == b {
                    return invalid("geodesic endpoints must be distinct");
                }
                if b > a {
                    Isometry::new(1.0, -a, -1.0, b)?
                } else {
                    Isometry::new(1.0, -a, 1.0, -b)?
                }
            }
            (Ideal::Finite(a), Ideal::Infinity) => Isometry::new(1.0, -a, 0.0, 1.0)?,
            (Ideal::Infinity, Ideal::Finite(b)) => Isometry::new(0.0, -1.0, 1.0, -b)?,
            (Ideal::Infinity, Ideal::Infinity) => return invalid("geodesic endpoints must be distinct"),
        };
        Ok(Geodesic { a, b, to_axis })
    }

    /// The geodesic through `p` and `q`, oriented from `p` towards `q`.
    pub fn through(p: &Point, q: &Point) -> Result<Geodesic> {
        let dx = q.x - p.x;
        let scale = p.y.max(q.y);
        if math::abs(dx) <= 1e-14 * scale {
            if q.y == p.y {
                return invalid("geodesic through a single point is undefined");
            }
            let x = 0.5 * (p.x + q.x);
            return if q.y > p.y {
                Geodesic::from_endpoints(Ideal::Finite(x), Ideal::Infinity)
            } else {
                Geodesic::from_endpoints(Ideal::Infinity, Ideal::Finite(x))
            };
        }
        let c = ((q.x * q.x + q.y * q.y) - (p.x * p.x + p.y * p.y)) / (2.0 * dx);
        let r = math::hypot(p.x - c, p.y);
        if dx > 0.0 {
            Geodesic::from_endpoints(Ideal::Finite(c - r), Ideal::Finite(c + r))
        } else {
            Geodesic::from_endpoints(Ideal::Finite(c + r), Ideal::Finite(c - r))
        }
    }

    /// Isometry sending `a` to `0` and `b` to `∞`.
    pub fn to_axis(&self) -> Isometry {
        self.to_axis
    }

    /// Signed arclength coordinate of the nearest-point projection of `z`.
    pub fn coordinate(&self, z: &Point) -> f64 {
        let w = self.to_axis.apply(z).expect("isometry image of an interior point");
        0.5 * math::ln(w.x * w.x + w.y * w.y)
    }

    /// Point of the geodesic with arclength coordinate `s`.
    pub fn point_at(&self, s: f64) -> Point {
        self.to_axis
            .inverse()
            .apply(&Point { x: 0.0, y: math::exp(s) })
            .expect("axis point maps into the half-plane")
    }

    /// Distance from `z` to the geodesic.
    pub fn distance_to(&self, z: &Point) -> f64 {
        let w = self.to_axis.apply(z).expect("isometry image of an interior point");
        // sinh d = |u| / v for the imaginary axis
        math::asinh(math::abs(w.x) / w.y)
    }
}

/// Closest-point projection onto a complete geodesic.
pub fn project_to_geodesic(z: &Point, g: &Geodesic) -> Point {
    g.point_at(g.coordinate(z))
}

/// Diameter of the projection of a finite set onto a geodesic.
pub fn set_projection_diameter(points: &[Point], g: &Geodesic) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in points {
        let s = g.coordinate(p);
        lo = lo.min(s);
        hi = hi.max(s);
    }
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// Exact diameter of the projection of the closed disc `B_r(center)`.
pub fn ball_projection_diameter(center: &Point, r: f64, g: &Geodesic) -> f64 {
    let w = g.to_axis().apply(center).expect("isometry image of an interior point");
    let (cx, cy, rho) = ball_euclidean(&w, r);
    let d = math::hypot(cx, cy);
    math::ln((d + rho) / (d - rho))
}

/// Arclength-parameterised geodesic segment. Coincident endpoints give the
/// constant path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicSegment {
    pub p: Point,
    pub q: Point,
    geo: Option<(Geodesic, f64, f64)>,
}

impl GeodesicSegment {
    pub fn new(p: Point, q: Point) -> GeodesicSegment {
        let geo = if p == q {
            None
        } else {
            Geodesic::through(&p, &q).ok().map(|g| {
                let (s0, s1) = (g.coordinate(&p), g.coordinate(&q));
                (g, s0, s1)
            })
        };
        GeodesicSegment { p, q, geo }
    }

    pub fn length(&self) -> f64 {
        match self.geo {
            Some(_) => distance(&self.p, &self.q),
            None => 0.0,
        }
    }

    pub fn geodesic(&self) -> Option<&Geodesic> {
        self.geo.as_ref().map(|g| &g.0)
    }

    /// Point at fraction `t ∈ [0, 1]` of the arclength.
    pub fn point_at(&self, t: f64) -> Point {
        match &self.geo {
            None => self.p,
            Some(_) if t <= 0.0 => self.p,
            Some(_) if t >= 1.0 => self.q,
            Some((g, s0, s1)) => g.point_at(s0 + t * (s1 - s0)),
        }
    }

    /// Closest point of the segment to `z`.
    pub fn project(&self, z: &Point) -> Point {
        match &self.geo {
            None => self.p,
            Some((g, s0, s1)) => g.point_at(g.coordinate(z).clamp(*s0, *s1)),
        }
    }

    /// Arclength parameters (from `p`) where `Im > level`, as at most one
    /// interval: the height is unimodal along a geodesic.
    pub fn above_level(&self, level: f64) -> Option<(f64, f64)> {
        let len = self.length();
        let Some((g, s0, _)) = &self.geo else {
            return (self.p.y > level).then_some((0.0, 0.0));
        };
        let (lo, hi) = match (g.a, g.b) {
            (Ideal::Finite(_), Ideal::Finite(_)) => {
                // y = r / cosh(s - s*) along a semicircle
                let (Ideal::Finite(a), Ideal::Finite(b)) = (g.a, g.b) else { unreachable!() };
                let r = 0.5 * math::abs(b - a);
                if r <= level {
                    return None;
                }
                let top = g.coordinate(&Point { x: 0.5 * (a + b), y: r });
                let w = math::acosh(r / level);
                (top - w - s0, top + w - s0)
            }
            (Ideal::Finite(_), Ideal::Infinity) => (math::ln(level / self.p.y), f64::INFINITY),
            _ => (f64::NEG_INFINITY, -math::ln(level / self.p.y)),
        };
        let (lo, hi) = (lo.max(0.0), hi.min(len));
        (lo < hi).then_some((lo, hi))
    }
}

/// Horoball `{z : Im(g z) > level}`; `g` sends the base point to `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horoball {
    pub to_standard: Isometry,
    pub level: f64,
}

impl Horoball {
    pub fn at_infinity(level: f64) -> Result<Horoball> {
        if !(level > 0.0) {
            return invalid("horoball level must be positive");
        }
        Ok(Horoball { to_standard: Isometry::IDENTITY, level })
    }

    /// Horoball tangent to the real line at `xi` with Euclidean diameter `diam`.
    pub fn at_point(xi: f64, diam: f64) -> Result<Horoball> {
        if !(diam > 0.0) {
            return invalid("horoball diameter must be positive");
        }
        Ok(Horoball { to_standard: Isometry::new(0.0, -1.0, 1.0, -xi)?, level: 1.0 / diam })
    }

    pub fn contains(&self, z: &Point) -> bool {
        self.to_standard.apply(z).map(|w| w.y > self.level).unwrap_or(false)
    }
}

/// Measure of the horoball rectangle `[-X, X] × [1, Y]` with `X = C e^{bR/2}`
/// and `Y = e^{bR}`: `∫∫ dx dy / y² = 2X(1 - 1/Y)`.
pub fn horoball_ball_volume(r: f64, b: f64, c: f64) -> Result<f64> {
    if !(r >= 0.0) || !(b > 0.0) || !(c > 0.0) {
        return invalid("horoball volume needs R >= 0, b > 0, C > 0");
    }
    let x = c * math::exp(0.5 * b * r);
    Ok(2.0 * x * (1.0 - math::exp(-b * r)))
}
