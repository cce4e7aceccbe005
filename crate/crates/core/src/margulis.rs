//! The function `f = sqrt(1/shortest two-sided length)` on a model space,
//! its ball averages and the drift inequality `A_τ f ≤ c f + b`.
//!
//! On a plane factor the two-sided length is `1/y`, so `f` is the largest
//! `sqrt(y)` over plane factors.

use crate::error::{invalid, Error, Result};
use crate::hyperbolic::Point;
use crate::math;
use crate::model::{Coord, ModelPoint, ModelSpace, NorburyMeasure};
use crate::par;
use crate::stats::{fit_line, Accum};
use alloc::format;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct MargulisFn {
    pub space: ModelSpace,
    /// Lower bound `C_l` expected of `f` on the systole set.
    pub lower_bound: f64,
}

impl MargulisFn {
    pub fn new(space: ModelSpace) -> Result<MargulisFn> {
        if space.plane_count() == 0 {
            return invalid("the function needs at least one plane factor");
        }
        Ok(MargulisFn { space, lower_bound: 0.5 })
    }

    fn heights(x: &ModelPoint) -> impl Iterator<Item = f64> + '_ {
        x.coords.iter().filter_map(|c| match c {
            Coord::Plane(p) => Some(p.y),
            _ => None,
        })
    }

    pub fn evaluate(&self, x: &ModelPoint) -> f64 {
        Self::heights(x).map(math::sqrt).fold(0.0, f64::max)
    }

    /// `f′ = Σ sqrt(y)` over plane factors.
    pub fn comparison(&self, x: &ModelPoint) -> f64 {
        Self::heights(x).map(math::sqrt).sum()
    }

    /// Number of plane factors: `f′/c_g ≤ f ≤ f′`.
    pub fn c_g(&self) -> usize {
        self.space.plane_count()
    }

    pub fn meets_lower_bound(&self, x: &ModelPoint) -> bool {
        self.evaluate(x) >= self.lower_bound
    }
}

/// Periodic trapezoid rule, doubled until two successive values agree to
/// `tol` relative; the last two estimates are returned.
fn periodic_trapezoid(g: impl Fn(f64) -> f64, tol: f64) -> Result<(f64, f64)> {
    let mut n = 16usize;
    let mut sum: f64 = (0..n).map(|k| g(2.0 * math::PI * k as f64 / n as f64)).sum();
    let mut prev = sum / n as f64;
    while n < 1 << 22 {
        let h = 2.0 * math::PI / (2 * n) as f64;
        sum += (0..n).map(|k| g(h * (2 * k + 1) as f64)).sum::<f64>();
        n *= 2;
        let cur = sum / n as f64;
        if math::abs(cur - prev) <= tol * math::abs(cur) {
            return Ok((cur, prev));
        }
        prev = cur;
    }
    Err(Error::Degenerate("spherical quadrature did not converge".into()))
}

/// Mean of `sqrt(Im w)` over the hyperbolic circle of radius `tau` about `z`.
pub fn spherical_average(z: &Point, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return invalid("circle radius must be finite and non-negative");
    }
    if tau == 0.0 {
        return Ok(math::sqrt(z.y));
    }
    let (low, sh) = (math::exp(-tau), math::sinh(tau));
    // Im w = y / (cosh τ − sinh τ cos θ) = y / (e^{-τ} + 2 sinh τ sin²(θ/2))
    let (v, _) = periodic_trapezoid(
        |t| {
            let s = math::sin(0.5 * t);
            1.0 / math::sqrt(low + 2.0 * sh * s * s)
        },
        1e-13,
    )?;
    Ok(math::sqrt(z.y) * v)
}

/// `κ(τ)`: mean of `sqrt(Im w)/sqrt(Im z)` over the hyperbolic disc of
/// radius `tau`, from circle averages weighted by `sinh ρ`.
pub fn plane_ball_ratio(tau: f64) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return invalid("ball radius must be positive and finite");
    }
    let g = |r: f64| spherical_average(&Point::i(), r).map(|s| s * math::sinh(r));
    let simpson = |n: usize| -> Result<f64> {
        let h = tau / n as f64;
        let mut s = g(0.0)? + g(tau)?;
        for k in 1..n {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h)?;
        }
        Ok(s * h / 3.0)
    };
    let mut n = 32;
    let mut prev = simpson(n)?;
    loop {
        n *= 2;
        let cur = simpson(n)?;
        if math::abs(cur - prev) <= 1e-11 * math::abs(cur) {
            return Ok(cur / (math::cosh(tau) - 1.0));
        }
        if n > 1 << 14 {
            return Err(Error::Degenerate("ball quadrature did not converge".into()));
        }
        prev = cur;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallAverage {
    pub value: f64,
    pub se: f64,
    pub samples: u64,
    pub inside: u64,
}

/// `μ`-weighted Monte Carlo mean of `g` over the sup-ball `B_tau(x)`
/// intersected with the systole set.
pub fn ball_average_with<G>(
    mu: &NorburyMeasure,
    x: &ModelPoint,
    tau: f64,
    n_samples: usize,
    seed: u64,
    workers: usize,
    g: G,
) -> Result<BallAverage>
where
    G: Fn(&ModelPoint) -> f64 + Sync,
{
    if !(tau > 0.0) {
        return invalid("averaging radius must be positive");
    }
    if n_samples < 2 {
        return invalid("need at least two samples");
    }
    let parts = par::run(workers, |w| {
        let (a, b) = par::chunk(n_samples, workers, w);
        let mut rng = par::worker_rng(seed, w);
        let mut acc = Accum::default();
        let mut inside = 0u64;
        for _ in a..b {
            let (z, wt) = mu.sample_ball(x, tau, &mut rng);
            if wt > 0.0 {
                inside += 1;
                acc.push(wt, g(&z));
            } else {
                acc.push(0.0, 0.0);
            }
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
        return Err(Error::Degenerate("no sample landed in the ball".into()));
    }
    let (value, se) = acc.ratio();
    Ok(BallAverage { value, se, samples: acc.n, inside })
}

/// The averaging operator `(A_τ f)(x)`.
pub fn ball_average(
    f: &MargulisFn,
    mu: &NorburyMeasure,
    x: &ModelPoint,
    tau: f64,
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<BallAverage> {
    ball_average_with(mu, x, tau, n_samples, seed, workers, |z| f.evaluate(z))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftRegion {
    /// Exactly one plane factor is thin on the whole ball.
    R1,
    /// Two or more plane factors are thin on the whole ball.
    R2,
    R3,
}

/// A plane factor is thin throughout `B_τ(x)` when its lowest height on the
/// ball, `y e^{-τ}`, still exceeds `1/eps`.
pub fn classify_region(x: &ModelPoint, tau: f64, eps: f64) -> DriftRegion {
    let thin = MargulisFn::heights(x).filter(|y| y * math::exp(-tau) > 1.0 / eps).count();
    match thin {
        0 => DriftRegion::R3,
        1 => DriftRegion::R1,
        _ => DriftRegion::R2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftConfig {
    pub tau: f64,
    /// Thin threshold on two-sided lengths.
    pub eps: f64,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    /// `B` in `b = B · 1_{R3}`; defaults to `e^τ / sqrt(eps)`, the largest
    /// value `f` takes on a ball around an R3 point.
    pub bound: Option<f64>,
    /// Tolerance in standard errors before a point counts as a violation.
    pub sigmas: f64,
}

impl DriftConfig {
    pub fn new(tau: f64, eps: f64) -> DriftConfig {
        DriftConfig { tau, eps, samples: 20_000, seed: 1, workers: 1, bound: None, sigmas: 3.0 }
    }

    pub fn b_bound(&self) -> f64 {
        self.bound.unwrap_or(math::exp(self.tau) / math::sqrt(self.eps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftPoint {
    pub region: DriftRegion,
    pub tau: f64,
    pub f: f64,
    pub average: f64,
    pub se: f64,
    /// `average / f`.
    pub ratio: f64,
    pub c: f64,
    pub b: f64,
    pub holds: bool,
    /// For R3 points: `average ≤ b` without the `c f` term.
    pub holds_without_c: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub points: Vec<DriftPoint>,
    /// Indices of points violating the inequality beyond the tolerance.
    pub counterexamples: Vec<usize>,
    /// `c(τ) = c_g κ(τ)`.
    pub c: f64,
    pub b: f64,
}

/// Checks `A_τ f ≤ c f + b` at every point, with `c = c_g κ(τ)` from the
/// comparison `f ≤ f′` (averaging `f′` over a product ball multiplies it
/// by exactly `κ(τ)`) and `b = B` on R3.
pub fn verify_drift(f: &MargulisFn, mu: &NorburyMeasure, points: &[ModelPoint], cfg: &DriftConfig) -> Result<DriftReport> {
    if mu.space != f.space {
        return invalid("measure and function live on different spaces");
    }
    if !(cfg.eps > 0.0) {
        return invalid("thin threshold must be positive");
    }
    let c = f.c_g() as f64 * plane_ball_ratio(cfg.tau)?;
    let big_b = cfg.b_bound();
    let mut out = Vec::with_capacity(points.len());
    let mut bad = Vec::new();
    for (i, x) in points.iter().enumerate() {
        if !f.space.in_systole_set(x, f.space.eps_t) {
            return invalid(format!("test point {i} lies outside the systole set"));
        }
        let region = classify_region(x, cfg.tau, cfg.eps);
        let avg = ball_average(f, mu, x, cfg.tau, cfg.samples, cfg.seed.wrapping_add(1000 * i as u64), cfg.workers)?;
        let fx = f.evaluate(x);
        let b = if region == DriftRegion::R3 { big_b } else { 0.0 };
        let slack = cfg.sigmas * avg.se;
        let holds = avg.value <= c * fx + b + slack;
        if !holds {
            bad.push(i);
        }
        out.push(DriftPoint {
            region,
            tau: cfg.tau,
            f: fx,
            average: avg.value,
            se: avg.se,
            ratio: avg.value / fx,
            c,
            b,
            holds,
            holds_without_c: region != DriftRegion::R3 || avg.value <= b + slack,
        });
    }
    Ok(DriftReport { points: out, counterexamples: bad, c, b: big_b })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// `λ` in `log c ≈ α + β log τ + λ τ`.
    pub exponent: f64,
    /// `β`, the fitted polynomial power.
    pub poly_power: f64,
    /// Slope of the plain fit `log c ≈ α + s τ`.
    pub log_slope: f64,
}

/// Least-squares decay rate of `c(τ)`, with and without a polynomial
/// prefactor.
pub fn fit_decay(taus: &[f64], cs: &[f64]) -> Result<DecayFit> {
    if taus.len() != cs.len() || taus.len() < 4 {
        return invalid("decay fit needs at least four (tau, c) pairs");
    }
    if taus.iter().any(|&t| !(t > 0.0)) || cs.iter().any(|&c| !(c > 0.0)) {
        return invalid("decay fit needs positive tau and c");
    }
    let ys: Vec<f64> = cs.iter().map(|&c| math::ln(c)).collect();
    let plain = fit_line(taus, &ys)?;
    // normal equations for columns (1, ln τ, τ)
    let cols: Vec<[f64; 3]> = taus.iter().map(|&t| [1.0, math::ln(t), t]).collect();
    let mut a = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (row, y) in cols.iter().zip(&ys) {
        for i in 0..3 {
            rhs[i] += row[i] * y;
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    let sol = solve3(a, rhs).ok_or_else(|| Error::Degenerate("decay fit is singular".into()))?;
    Ok(DecayFit { exponent: sol[2], poly_power: sol[1], log_slope: plain.slope })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| math::abs(a[i][col]).total_cmp(&math::abs(a[j][col])))?;
        if math::abs(a[piv][col]) < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let m = a[r][col] / a[col][col];
            for k in col..3 {
                a[r][k] -= m * a[col][k];
            }
            b[r] -= m * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}
