use serde::Serialize;

use super::WeightSpec;
use crate::error::{param, LabError, Result};
use crate::scalar::Real;

/// A real function on R^d that the moderate-class check can sample.
pub trait PointFunction<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, p: &[T]) -> T;
    /// `ln F(p)`; override when `F` itself overflows.
    fn ln_eval(&self, p: &[T]) -> T {
        self.eval(p).ln()
    }
}

impl<T: Real> PointFunction<T> for WeightSpec<T> {
    fn dim(&self) -> usize {
        2 * self.dim()
    }
    fn eval(&self, p: &[T]) -> T {
        self.eval_unchecked(p)
    }
}

type BoxedFn<T> = Box<dyn Fn(&[T]) -> T + Send + Sync>;

/// Closure-backed [`PointFunction`].
pub struct PointFn<T> {
    dim: usize,
    f: BoxedFn<T>,
    log_form: bool,
}

impl<T: Real> PointFn<T> {
    pub fn new(dim: usize, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self { dim, f: Box::new(f), log_form: false }
    }

    /// Function given through its logarithm, e.g. `|xi|^2` for `exp(|xi|^2)`.
    pub fn from_ln(dim: usize, ln_f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self { dim, f: Box::new(ln_f), log_form: true }
    }
}

impl<T: Real> PointFunction<T> for PointFn<T> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, p: &[T]) -> T {
        if self.log_form {
            (self.f)(p).exp()
        } else {
            (self.f)(p)
        }
    }
    fn ln_eval(&self, p: &[T]) -> T {
        if self.log_form {
            (self.f)(p)
        } else {
            (self.f)(p).ln()
        }
    }
}

/// Sampling and quadrature parameters for [`moderate_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModerateConfig {
    /// Kernel exponent `N` in `<.>^{-N}`; must exceed the dimension.
    pub exponent: f64,
    /// Samples lie in `[-radius, radius]^d`.
    pub sample_radius: f64,
    pub sample_step: f64,
    /// Quadrature step, at most 1/4.
    pub quad_step: f64,
    /// Pass threshold on max/min ratio.
    pub threshold: f64,
}

impl ModerateConfig {
    /// Default `N = 2d + 2`, unit sample spacing, quadrature step 1/4, threshold 100.
    pub fn for_dim(d: usize, sample_radius: f64) -> Self {
        Self { exponent: (2 * d + 2) as f64, sample_radius, sample_step: 1.0, quad_step: 0.25, threshold: 100.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModerateReport {
    pub config: ModerateConfig,
    pub dim: usize,
    /// Padding added around the sample box for the quadrature.
    pub padding: f64,
    pub samples: Vec<Vec<f64>>,
    /// `(F^2 * <.>^{-N})(xi) / F(xi)^2` per sample; may be `inf` on overflow.
    pub ratios: Vec<f64>,
    pub ln_ratios: Vec<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub spread: f64,
    pub ln_spread: f64,
    pub passed: bool,
}

fn on_step(x: f64, h: f64) -> Option<i64> {
    let k = (x / h).round();
    if ((k * h) - x).abs() <= 1e-9 * h.max(x.abs()) {
        Some(k as i64)
    } else {
        None
    }
}

/// Smallest padding `P` with relative kernel tail below `1e-6`.
///
/// Uses `int_{|z|>P} <z>^{-N} <= w_d P^{d-N}/(N-d)` against the mass lower
/// bound `vol_d 2^{-N/2}` from the unit ball, and `w_d / vol_d = d`.
fn padding(d: usize, n: f64) -> f64 {
    let d = d as f64;
    (d * 2f64.powf(n / 2.0) / (1e-6 * (n - d))).powf(1.0 / (n - d)).max(1.0)
}

/// Riemann-sum check of `F^2 * <.>^{-N} ~ F^2` on a sample box.
pub fn moderate_check<T: Real, F: PointFunction<T> + ?Sized>(f: &F, cfg: &ModerateConfig) -> Result<ModerateReport> {
    let d = f.dim();
    if d == 0 {
        return param("dimension must be positive");
    }
    if !(cfg.exponent > d as f64) {
        return param(format!("kernel exponent N = {} must exceed d = {d}", cfg.exponent));
    }
    if !(cfg.quad_step > 0.0 && cfg.quad_step <= 0.25) {
        return param(format!("quadrature step must lie in (0, 1/4], got {}", cfg.quad_step));
    }
    if !(cfg.sample_radius >= 0.0 && cfg.sample_step > 0.0 && cfg.threshold >= 1.0) {
        return param("sample radius, sample step and threshold must be positive");
    }
    let h = cfg.quad_step;
    let (Some(r_steps), Some(s_steps)) = (on_step(cfg.sample_radius, h), on_step(cfg.sample_step, h)) else {
        return param("sample radius and sample step must be multiples of the quadrature step");
    };
    let pad = padding(d, cfg.exponent);
    let p_steps = (pad / h).ceil() as i64;
    let side_nodes = (2 * (r_steps + p_steps) + 1) as usize;
    let total_nodes = (side_nodes as f64).powi(d as i32);
    let per_axis_samples = (2 * r_steps / s_steps + 1) as usize;
    let total_samples = (per_axis_samples as f64).powi(d as i32);
    if total_nodes * total_samples > 5.0e9 {
        return Err(LabError::Resource(format!(
            "moderate check would need {total_samples:.0} samples x {total_nodes:.0} nodes"
        )));
    }
    let total_nodes = total_nodes as usize;
    let lo = -(r_steps + p_steps);

    let node_index = |mut i: usize, out: &mut [i64]| {
        for c in out.iter_mut().rev() {
            *c = lo + (i % side_nodes) as i64;
            i /= side_nodes;
        }
    };

    // 2 ln F at every node
    let mut ln_f2 = Vec::with_capacity(total_nodes);
    let mut idx = vec![0i64; d];
    let mut pt = vec![T::zero(); d];
    for i in 0..total_nodes {
        node_index(i, &mut idx);
        for (p, &k) in pt.iter_mut().zip(&idx) {
            *p = T::lit(k as f64 * h);
        }
        let v = f.ln_eval(&pt).as_f64();
        if v.is_nan() {
            return Err(LabError::Domain(format!("weight is negative or undefined at {:?}", idx)));
        }
        ln_f2.push(2.0 * v);
    }

    let half_n = cfg.exponent / 2.0;
    let mut samples = Vec::new();
    let mut ln_ratios = Vec::new();
    let mut sidx = vec![0i64; d];
    let n_samples = total_samples as usize;
    let mut terms = vec![0f64; total_nodes];
    for si in 0..n_samples {
        let mut rem = si;
        for c in sidx.iter_mut().rev() {
            *c = -r_steps + (rem % per_axis_samples) as i64 * s_steps;
            rem /= per_axis_samples;
        }
        for (p, &k) in pt.iter_mut().zip(&sidx) {
            *p = T::lit(k as f64 * h);
        }
        let ln_here = f.ln_eval(&pt).as_f64();
        if !(ln_here > f64::NEG_INFINITY) || ln_here.is_nan() {
            return Err(LabError::Domain(format!(
                "weight must be positive at samples; F = {} at {:?}",
                ln_here.exp(),
                sidx.iter().map(|&k| k as f64 * h).collect::<Vec<_>>()
            )));
        }
        let mut best = f64::NEG_INFINITY;
        for (i, t) in terms.iter_mut().enumerate() {
            node_index(i, &mut idx);
            let dist2: f64 = idx.iter().zip(&sidx).map(|(&a, &b)| ((a - b) as f64 * h).powi(2)).sum();
            *t = ln_f2[i] - half_n * dist2.ln_1p();
            if *t > best {
                best = *t;
            }
        }
        let s: f64 = terms.iter().map(|&t| (t - best).exp()).sum();
        let ln_conv = best + s.ln() + d as f64 * h.ln();
        ln_ratios.push(ln_conv - 2.0 * ln_here);
        samples.push(sidx.iter().map(|&k| k as f64 * h).collect());
    }
    let ln_min = ln_ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let ln_max = ln_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ratios: Vec<f64> = ln_ratios.iter().map(|&l| l.exp()).collect();
    let ln_spread = ln_max - ln_min;
    let spread = ln_spread.exp();
    Ok(ModerateReport {
        config: cfg.clone(),
        dim: d,
        padding: p_steps as f64 * h,
        samples,
        ratios,
        ln_ratios,
        min_ratio: ln_min.exp(),
        max_ratio: ln_max.exp(),
        spread,
        ln_spread,
        passed: ln_spread.is_finite() && spread <= cfg.threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::parse_weight;

    #[test]
    fn constant_weight_has_unit_spread() {
        let w: WeightSpec<f64> = parse_weight("const:1").unwrap();
        let rep = moderate_check(&w, &ModerateConfig::for_dim(2, 4.0)).unwrap();
        assert!(rep.spread >= 1.0);
        assert!(rep.spread <= 1.01, "spread {}", rep.spread);
        assert!(rep.passed);
    }

    #[test]
    fn bracket_power_is_moderate() {
        let w: WeightSpec<f64> = parse_weight("bracket-power:-1").unwrap();
        let cfg = ModerateConfig { exponent: 8.0, threshold: 10.0, ..ModerateConfig::for_dim(2, 8.0) };
        let rep = moderate_check(&w, &cfg).unwrap();
        assert!(rep.spread <= 10.0, "spread {}", rep.spread);
        assert!(rep.ratios.iter().all(|&r| r > 0.0));
    }

    #[test]
    fn gaussian_growth_is_not_moderate() {
        let f = PointFn::<f64>::from_ln(1, |p| p[0] * p[0]);
        let rep = moderate_check(&f, &ModerateConfig::for_dim(1, 6.0)).unwrap();
        assert!(rep.ln_spread >= 1e3f64.ln());
        assert!(!rep.passed);
    }

    #[test]
    fn enlarging_exponent_keeps_relation() {
        let w: WeightSpec<f64> = parse_weight("bracket-power:-1").unwrap();
        for n in [6.0, 8.0, 12.0] {
            let cfg = ModerateConfig { exponent: n, ..ModerateConfig::for_dim(2, 6.0) };
            assert!(moderate_check(&w, &cfg).unwrap().passed, "N = {n}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let w: WeightSpec<f64> = parse_weight("const:1").unwrap();
        let bad_n = ModerateConfig { exponent: 2.0, ..ModerateConfig::for_dim(2, 2.0) };
        assert!(moderate_check(&w, &bad_n).is_err());
        let bad_h = ModerateConfig { quad_step: 0.5, ..ModerateConfig::for_dim(2, 2.0) };
        assert!(moderate_check(&w, &bad_h).is_err());
        let zero = WeightSpec::<f64>::delta(vec![5, 5], 1.0).unwrap();
        assert!(matches!(moderate_check(&zero, &ModerateConfig::for_dim(2, 1.0)), Err(LabError::Domain(_))));
    }
}
