use super::{PointFunction, WeightSpec};
use crate::error::{param, LabError, Result};
use crate::lattice::{IndexBox, SeqFunction};
use crate::scalar::{CompensatedSum, Real};

/// The smoothed weight `V*(xi) = (sum_mu V(mu)^2 <xi - mu>^{-2N})^{1/2}`.
///
/// The lattice sum runs over the sup-norm window of half-width `window`
/// around the nearest lattice point of `xi`.
#[derive(Clone, Debug)]
pub struct VStar<T> {
    weight: WeightSpec<T>,
    exponent: T,
    window: i64,
    sup_sq: f64,
}

/// Values of `V*` at requested points with truncation diagnostics.
#[derive(Clone, Debug)]
pub struct VStarSample<T> {
    pub points: Vec<Vec<T>>,
    pub values: Vec<T>,
    /// `V` at each point when the point is on the lattice.
    pub base_values: Vec<Option<T>>,
    pub window: i64,
    /// Absolute bound on the omitted part of `V*^2`.
    pub tail_bound: f64,
    /// Largest `tail_bound / V*(xi)^2` over the points.
    pub max_relative_tail: f64,
}

/// Bound on `sum <xi - mu>^{-2N}` over lattice `mu` outside the window of
/// half-width `p` around the nearest lattice point of `xi`, in `D` dimensions.
fn kernel_tail(dim: usize, n: f64, p: i64) -> f64 {
    let d = dim as f64;
    let shell = |s: f64| 2.0 * d * (2.0 * s + 1.0).powf(d - 1.0) * (1.0 + (s - 0.5).powi(2)).powf(-n);
    let last = p + 20_000;
    let mut acc = 0.0;
    for s in ((p + 1)..=last).rev() {
        acc += shell(s as f64);
    }
    let big_s = last as f64;
    acc + 2.0 * d * 3f64.powf(d - 1.0) * 4f64.powf(n) * big_s.powf(d - 2.0 * n) / (2.0 * n - d)
}

impl<T: Real> VStar<T> {
    pub fn new(weight: WeightSpec<T>, exponent: T, window: i64) -> Result<Self> {
        let n = weight.dim();
        if !(exponent > T::from_usize_lossy(2 * n)) {
            return param(format!("V* needs N > 2n = {}, got {exponent}", 2 * n));
        }
        if window < 0 {
            return param("window must be nonnegative");
        }
        let sup = weight.sup_bound().as_f64();
        if !sup.is_finite() {
            return Err(LabError::Domain("V* needs a bounded weight".into()));
        }
        if sup == 0.0 {
            return Err(LabError::Degenerate("V is identically zero, so V* would vanish".into()));
        }
        if (2 * window + 1) as f64 > 1e9f64.powf(1.0 / (2 * n) as f64) {
            return Err(LabError::Resource(format!("window {window} is too large in dimension {}", 2 * n)));
        }
        Ok(Self { weight, exponent, window, sup_sq: sup * sup })
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn exponent(&self) -> T {
        self.exponent
    }

    /// Absolute bound on the omitted part of `V*^2` at any point.
    pub fn tail_bound(&self) -> f64 {
        self.sup_sq * kernel_tail(2 * self.weight.dim(), self.exponent.as_f64(), self.window)
    }

    fn value_sq(&self, xi: &[T]) -> T {
        let dd = xi.len();
        let center: Vec<i64> = xi.iter().map(|&v| v.round().to_i64().unwrap_or(0)).collect();
        let side = (2 * self.window + 1) as usize;
        let total = side.pow(dd as u32);
        let mut mu = vec![0i64; dd];
        let mut acc = CompensatedSum::new();
        let neg_n = -self.exponent;
        for i in 0..total {
            let mut rem = i;
            for (k, m) in mu.iter_mut().enumerate().rev() {
                *m = center[k] - self.window + (rem % side) as i64;
                rem /= side;
            }
            let v = self.weight.eval_int_unchecked(&mu);
            if v == T::zero() {
                continue;
            }
            let dist2 = xi.iter().zip(&mu).fold(T::zero(), |s, (&x, &m)| {
                let t = x - T::from_i64_lossy(m);
                s + t * t
            });
            acc.add(v * v * (T::one() + dist2).powf(neg_n));
        }
        acc.value()
    }

    pub fn value(&self, xi: &[T]) -> Result<T> {
        if xi.len() != 2 * self.weight.dim() {
            return Err(LabError::Dimension { expected: 2 * self.weight.dim(), got: xi.len() });
        }
        Ok(self.value_sq(xi).sqrt())
    }

    /// `V*` restricted to the lattice points of a box on Z^{2n}.
    pub fn restrict(&self, b: &IndexBox) -> Result<SeqFunction<T>> {
        if b.dim() != 2 * self.weight.dim() {
            return Err(LabError::Dimension { expected: 2 * self.weight.dim(), got: b.dim() });
        }
        SeqFunction::from_fn(b, |p| {
            let q: Vec<T> = p.iter().map(|&v| T::from_i64_lossy(v)).collect();
            self.value_sq(&q).sqrt()
        })
    }
}

impl<T: Real> PointFunction<T> for VStar<T> {
    fn dim(&self) -> usize {
        2 * self.weight.dim()
    }
    fn eval(&self, p: &[T]) -> T {
        self.value_sq(p).sqrt()
    }
    fn ln_eval(&self, p: &[T]) -> T {
        self.value_sq(p).ln() / T::lit(2.0)
    }
}

/// Builds `V*` and evaluates it, doubling the window until the omitted tail is
/// below `1e-8` of the retained sum at every requested point.
pub fn v_star<T: Real>(v: &WeightSpec<T>, exponent: T, points: &[Vec<T>]) -> Result<(VStar<T>, VStarSample<T>)> {
    let dd = 2 * v.dim();
    for p in points {
        if p.len() != dd {
            return Err(LabError::Dimension { expected: dd, got: p.len() });
        }
    }
    let mut window = 4i64;
    loop {
        let vs = VStar::new(v.clone(), exponent, window)?;
        let values: Vec<T> = points.iter().map(|p| vs.value_sq(p).sqrt()).collect();
        let tail = vs.tail_bound();
        let rel = values.iter().map(|&x| tail / x.as_f64().powi(2)).fold(0.0, f64::max);
        let side_next = (4 * window + 1) as f64;
        if rel < 1e-8 || side_next.powi(dd as i32) > 1e8 {
            let base_values = points
                .iter()
                .map(|p| {
                    let q: Option<Vec<i64>> =
                        p.iter().map(|&x| if x.round() == x { x.to_i64() } else { None }).collect();
                    q.map(|q| v.eval_int_unchecked(&q))
                })
                .collect();
            let sample = VStarSample {
                points: points.to_vec(),
                values,
                base_values,
                window,
                tail_bound: tail,
                max_relative_tail: rel,
            };
            return Ok((vs, sample));
        }
        window *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{moderate_check, parse_weight, ModerateConfig};

    #[test]
    fn delta_gives_pure_kernel() {
        let v = WeightSpec::<f64>::delta(vec![0, 0], 1.0).unwrap();
        let pts = vec![vec![0.0, 0.0], vec![0.3, -1.7], vec![2.5, 4.0]];
        let (_, s) = v_star(&v, 4.0, &pts).unwrap();
        for (p, val) in pts.iter().zip(&s.values) {
            let expect = (1.0 + p[0] * p[0] + p[1] * p[1]).powf(-2.0);
            assert!((val - expect).abs() <= 1e-14 * expect, "{p:?}");
        }
    }

    #[test]
    fn dominates_on_lattice() {
        let v: WeightSpec<f64> = parse_weight("sum-power:-0.5").unwrap();
        let pts: Vec<Vec<f64>> = (-5..=5).flat_map(|a| (-5..=5).map(move |b| vec![a as f64 * 3.0, b as f64 * 2.0])).collect();
        let (_, s) = v_star(&v, 4.0, &pts).unwrap();
        assert!(s.max_relative_tail < 1e-8);
        for (val, base) in s.values.iter().zip(&s.base_values) {
            assert!(*val >= base.unwrap());
        }
    }

    #[test]
    fn zero_weight_is_degenerate() {
        let v = WeightSpec::<f64>::constant(1, 0.0).unwrap();
        assert!(matches!(v_star(&v, 4.0, &[vec![0.0, 0.0]]), Err(LabError::Degenerate(_))));
        let v = WeightSpec::<f64>::constant(1, 1.0).unwrap();
        assert!(v_star(&v, 2.0, &[vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn v_star_is_moderate() {
        let v: WeightSpec<f64> = parse_weight("sum-power:-0.5").unwrap();
        let vs = VStar::new(v, 4.0, 24).unwrap();
        let cfg = ModerateConfig { exponent: 11.0, ..ModerateConfig::for_dim(2, 4.0) };
        let rep = moderate_check(&vs, &cfg).unwrap();
        assert!(rep.passed, "spread {}", rep.spread);
    }
}
