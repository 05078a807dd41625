//! Least-squares line fits in log2-log2 or log2-linear coordinates.

use serde::Serialize;

use crate::error::{param, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals.
    pub rms_residual: f64,
    /// Largest absolute residual.
    pub max_deviation: f64,
}

/// Ordinary least squares for `y = a x + b`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return param("fit needs equally many abscissae and ordinates");
    }
    if xs.len() < 2 {
        return param("fit needs at least two points");
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return param("fit data must be finite");
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return param("fit abscissae are all equal");
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    let rms_residual = (res.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    let max_deviation = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(LineFit { slope, intercept, rms_residual, max_deviation })
}

/// Fit of `log2 y` against `log2 x`; all values must be positive.
pub fn fit_log2_log2(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return param("log-log fit needs positive data");
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.log2()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.log2()).collect();
    fit_line(&lx, &ly)
}

/// Fit of `log2 y` against the step index `x` (e.g. `y ~ 2^{slope k}`).
pub fn fit_log2_linear(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if ys.iter().any(|&v| !(v > 0.0)) {
        return param("log fit needs positive data");
    }
    let ly: Vec<f64> = ys.iter().map(|v| v.log2()).collect();
    fit_line(xs, &ly)
}
