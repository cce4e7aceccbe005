//! Least-squares fits and sample summaries.

use crate::error::{degenerate, invalid, Result};
use crate::math;
use alloc::vec::Vec;

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero for an exact two-point fit).
    pub slope_se: f64,
    pub n: usize,
}

impl LineFit {
    /// Slope interval of half-width `k` standard errors.
    pub fn interval(&self, k: f64) -> (f64, f64) {
        (self.slope - k * self.slope_se, self.slope + k * self.slope_se)
    }
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return invalid("fit_line: length mismatch");
    }
    let n = xs.len();
    if n < 2 {
        return invalid("fit_line: need at least two points");
    }
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
        return degenerate("fit_line: non-finite value");
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return degenerate("fit_line: abscissae coincide");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if n > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        math::sqrt(rss / (nf - 2.0) / sxx)
    } else {
        0.0
    };
    Ok(LineFit { slope, intercept, slope_se, n })
}

/// Slope of `ln(y)` against `x`; every `y` must be positive.
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if ys.iter().any(|&y| !(y > 0.0)) {
        return degenerate("fit_log_slope: non-positive value");
    }
    let logs: Vec<f64> = ys.iter().map(|&y| math::ln(y)).collect();
    fit_line(xs, &logs)
}

/// Mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let m = values.iter().sum::<f64>() / nf;
    if n == 1 {
        return (m, 0.0);
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (nf - 1.0);
    (m, math::sqrt(var / nf))
}

/// Running sums for weighted and unweighted Monte Carlo estimates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accum {
    pub n: u64,
    pub sw: f64,
    pub sww: f64,
    pub swf: f64,
    pub swwff: f64,
    pub swwf: f64,
}

impl Accum {
    pub fn push(&mut self, w: f64, f: f64) {
        self.n += 1;
        self.sw += w;
        self.sww += w * w;
        self.swf += w * f;
        self.swwff += w * w * f * f;
        self.swwf += w * w * f;
    }

    pub fn merge(&mut self, o: &Accum) {
        self.n += o.n;
        self.sw += o.sw;
        self.sww += o.sww;
        self.swf += o.swf;
        self.swwff += o.swwff;
        self.swwf += o.swwf;
    }

    /// Mean of the weights and its standard error (plain importance sampling).
    pub fn weight_mean(&self) -> (f64, f64) {
        let n = self.n as f64;
        let m = self.sw / n;
        let var = (self.sww / n - m * m).max(0.0) * n / (n - 1.0).max(1.0);
        (m, math::sqrt(var / n))
    }

    /// Self-normalised ratio `Σ w f / Σ w` with a delta-method standard error.
    pub fn ratio(&self) -> (f64, f64) {
        let r = self.swf / self.sw;
        // Σ w² (f - r)²
        let s = self.swwff - 2.0 * r * self.swwf + r * r * self.sww;
        (r, math::sqrt(s.max(0.0)) / self.sw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!(f.slope_se < 1e-12);
    }

    #[test]
    fn degenerate_abscissae() {
        assert!(fit_line(&[1.0, 1.0], &[0.0, 2.0]).is_err());
        assert!(fit_log_slope(&[1.0, 2.0], &[0.0, 2.0]).is_err());
    }

    #[test]
    fn ratio_of_constant_is_exact() {
        let mut a = Accum::default();
        for i in 0..10 {
            a.push(1.0 + i as f64, 3.0);
        }
        let (r, se) = a.ratio();
        assert!((r - 3.0).abs() < 1e-12);
        assert!(se < 1e-9);
    }
}
