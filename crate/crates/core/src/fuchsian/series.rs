use super::orbit::OrbitEnumeration;
use crate::error::{degenerate, invalid, Result};
use crate::math;
use crate::stats::{fit_line, fit_log_slope, LineFit};
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesVerdict {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareSeriesEstimate {
    pub h: f64,
    pub radii: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `S(R_k) - S(R_{k-1})`, the first entry being `S(R_0)`.
    pub increments: Vec<f64>,
    /// Exponential rate of the unit-shell sums over the outer half of the range.
    pub shell_rate: Option<LineFit>,
    pub verdict: SeriesVerdict,
}

/// Partial sums `Σ_{d(p,γp) ≤ R} exp(-h d(p,γp))` at increasing radii.
///
/// The verdict is convergent when the unit-shell sums decay at a rate that is
/// negative beyond two standard errors and the last grid increment is below
/// `tol`; divergent when the rate is not detectably below `-0.05`.
pub fn poincare_partial_sum(orbit: &OrbitEnumeration, h: f64, radii: &[f64], tol: f64) -> Result<PoincareSeriesEstimate> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("radii must be non-empty and increasing");
    }
    if *radii.last().unwrap() > orbit.radius {
        return invalid("radius exceeds the enumerated orbit");
    }
    if !(h >= 0.0) {
        return invalid("exponent must be non-negative");
    }
    let ds: Vec<f64> = orbit.distances().collect();
    let mut cum = Vec::with_capacity(ds.len());
    let mut acc = 0.0;
    for &d in &ds {
        acc += math::exp(-h * d);
        cum.push(acc);
    }
    let sum_to = |r: f64| -> f64 {
        let k = ds.partition_point(|&d| d <= r);
        if k == 0 {
            0.0
        } else {
            cum[k - 1]
        }
    };
    let partial_sums: Vec<f64> = radii.iter().map(|&r| sum_to(r)).collect();
    let mut increments = Vec::with_capacity(radii.len());
    for (k, s) in partial_sums.iter().enumerate() {
        increments.push(if k == 0 { *s } else { s - partial_sums[k - 1] });
    }

    let r_max = *radii.last().unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let first = math::floor(0.5 * r_max) as i64;
    let last = math::floor(r_max) as i64;
    for k in first..last {
        let v = sum_to(k as f64 + 1.0) - sum_to(k as f64);
        if v > 0.0 {
            xs.push(k as f64);
            ys.push(math::ln(v));
        }
    }
    let shell_rate = if xs.len() >= 3 { fit_line(&xs, &ys).ok() } else { None };
    let verdict = match shell_rate {
        None => SeriesVerdict::Inconclusive,
        Some(f) => {
            let last_inc = *increments.last().unwrap();
            if f.slope + 2.0 * f.slope_se < 0.0 && last_inc < tol {
                SeriesVerdict::Convergent
            } else if f.slope - 2.0 * f.slope_se > -0.05 {
                SeriesVerdict::Divergent
            } else {
                SeriesVerdict::Inconclusive
            }
        }
    };
    Ok(PoincareSeriesEstimate { h, radii: radii.to_vec(), partial_sums, increments, shell_rate, verdict })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalExponent {
    pub value: f64,
    /// Two-standard-error interval of the slope.
    pub interval: (f64, f64),
    pub radii: Vec<f64>,
    pub counts: Vec<usize>,
    pub fit: LineFit,
}

/// Least-squares slope of `log N_p(R)` against `R`.
pub fn estimate_critical_exponent(orbit: &OrbitEnumeration, radii: &[f64]) -> Result<CriticalExponent> {
    if radii.len() < 4 {
        return invalid("critical exponent needs at least four radii");
    }
    if radii.iter().any(|&r| r > orbit.radius) {
        return invalid("radius exceeds the enumerated orbit");
    }
    let counts: Vec<usize> = radii.iter().map(|&r| orbit.count_within(r)).collect();
    if counts.iter().all(|&c| c == counts[0]) {
        return degenerate("orbit counts are identical at every radius");
    }
    let ys: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let fit = fit_log_slope(radii, &ys)?;
    Ok(CriticalExponent {
        value: fit.slope,
        interval: fit.interval(2.0),
        radii: radii.to_vec(),
        counts,
        fit,
    })
}

/// `Σ_{e ≠ 1, d ≤ rho} exp(-h d)` over an orbit.
fn punctured_sum(orbit: &OrbitEnumeration, h: f64, rho: f64) -> f64 {
    orbit
        .distances()
        .take_while(|&d| d <= rho)
        .filter(|&d| d > 1e-12)
        .map(|d| math::exp(-h * d))
        .sum()
}

/// Lower bound for the partial Poincaré sum of `A * B` at radius `r`:
/// `Σ_k (P_A(h, r/2k) P_B(h, r/2k))^k`, where the factor sums skip the
/// identity and are truncated so that alternating words of length `2k`
/// stay inside the ball.
pub fn free_product_lower_bound(a: &OrbitEnumeration, b: &OrbitEnumeration, h: f64, r: f64) -> Result<f64> {
    if a.base != b.base {
        return invalid("factor orbits must share a base point");
    }
    if 0.5 * r > a.radius || 0.5 * r > b.radius {
        return invalid("factor orbits do not reach half the radius");
    }
    let mut total = 0.0;
    let mut k = 1;
    loop {
        let rho = r / (2.0 * k as f64);
        let q = punctured_sum(a, h, rho) * punctured_sum(b, h, rho);
        if q == 0.0 {
            break;
        }
        total += math::powf(q, k as f64);
        k += 1;
    }
    Ok(total)
}
