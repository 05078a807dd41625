//! Discretized bilinear pseudo-differential operators
//! `T(f1, f2)(x) = (2 pi)^{-2n} int int e^{i x.(xi_1 + xi_2)} sigma(x, xi_1, xi_2) f1^(xi_1) f2^(xi_2)`
//! and empirical operator-norm sweeps.
//!
//! The frequency integrals are rectangle sums on the grid's frequency
//! samples, matched to [`GridFunction::grid_ft`], so `sigma = 1` reproduces the
//! pointwise product up to transform round-off.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{param, LabError, Result};
use crate::fieldgrid::{Domain, Grid, GridFunction};
use crate::fit::{fit_log2_log2, LineFit};
use crate::scalar::Real;
use crate::symbol::SymbolSpec;
use crate::trilinear::derive_seed;

/// Spectral samples below this fraction of the maximum are skipped.
pub const SPECTRAL_FLOOR: f64 = 1e-16;

/// Largest grid (total samples) accepted by [`apply_general`].
pub const GENERAL_MAX_SAMPLES: usize = 1024;

struct Support<T> {
    slots: Vec<Vec<usize>>,
    flat: Vec<usize>,
    freqs: Vec<Vec<T>>,
    values: Vec<Complex<T>>,
}

fn support<T: Real>(fh: &GridFunction<T>) -> Support<T> {
    let g = fh.grid();
    let max = fh.data().iter().fold(T::zero(), |m, v| m.max(v.norm()));
    let cut = max * T::lit(SPECTRAL_FLOOR);
    let mut s = Support { slots: Vec::new(), flat: Vec::new(), freqs: Vec::new(), values: Vec::new() };
    let mut idx = vec![0usize; g.dim()];
    for (i, &v) in fh.data().iter().enumerate() {
        if v.norm() > cut {
            g.unflatten(i, &mut idx);
            s.freqs.push(idx.iter().map(|&m| g.freq(m)).collect());
            s.slots.push(idx.clone());
            s.flat.push(i);
            s.values.push(v);
        }
    }
    s
}

fn check_pair<T: Real>(f1: &GridFunction<T>, f2: &GridFunction<T>) -> Result<Grid> {
    if f1.grid() != f2.grid() {
        return Err(LabError::GridMismatch("f1 and f2 live on different grids".into()));
    }
    if f1.domain() != f2.domain() {
        return Err(LabError::GridMismatch("f1 and f2 are in different domains".into()));
    }
    Ok(*f1.grid())
}

fn spectra<T: Real>(f1: &GridFunction<T>, f2: &GridFunction<T>) -> Result<(GridFunction<T>, GridFunction<T>)> {
    Ok(match f1.domain() {
        Domain::Space => (f1.grid_ft()?, f2.grid_ft()?),
        Domain::Frequency => (f1.clone(), f2.clone()),
    })
}

/// `T_sigma(f1, f2)` for an x-independent symbol: anti-diagonal accumulation
/// of `sigma f1^ f2^` followed by one inverse transform, `O(|supp f1^| |supp f2^|)`.
///
/// Inputs may be given in either domain (both the same); the result is spatial.
pub fn apply_xindep<T: Real>(sigma: &SymbolSpec<T>, f1: &GridFunction<T>, f2: &GridFunction<T>) -> Result<GridFunction<T>> {
    let grid = check_pair(f1, f2)?;
    sigma.check_grid(&grid)?;
    if sigma.is_x_dependent() {
        return param(format!("symbol {:?} depends on x; use apply_general", sigma.label()));
    }
    let (h1, h2) = spectra(f1, f2)?;
    let (s1, s2) = (support(&h1), support(&h2));
    let n = grid.dim();
    let np = grid.points();
    let x0 = vec![T::zero(); n];
    let mut acc = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    for a in 0..s1.flat.len() {
        for b in 0..s2.flat.len() {
            let sv = sigma.eval_on_grid(&grid, s1.flat[a], s2.flat[b], &x0, &s1.freqs[a], &s2.freqs[b]);
            let slot = s1.slots[a].iter().zip(&s2.slots[b]).fold(0usize, |f, (&p, &q)| f * np + ((p + q) % np));
            acc[slot] = acc[slot] + sv * s1.values[a] * s2.values[b];
        }
    }
    let scale = (grid.freq_step::<T>() / (T::lit(2.0) * T::PI())).powi(n as i32);
    acc.iter_mut().for_each(|v| *v = *v * scale);
    GridFunction::from_samples(grid, Domain::Frequency, acc)?.grid_ift()
}

/// `T_sigma(f1, f2)` by direct summation per output point; accepts x-dependent symbols.
pub fn apply_general<T: Real>(sigma: &SymbolSpec<T>, f1: &GridFunction<T>, f2: &GridFunction<T>) -> Result<GridFunction<T>> {
    let grid = check_pair(f1, f2)?;
    sigma.check_grid(&grid)?;
    if grid.len() > GENERAL_MAX_SAMPLES {
        return Err(LabError::Resource(format!(
            "direct evaluation on {} samples exceeds the limit of {GENERAL_MAX_SAMPLES}",
            grid.len()
        )));
    }
    let (h1, h2) = spectra(f1, f2)?;
    let (s1, s2) = (support(&h1), support(&h2));
    let n = grid.dim();
    let scale = (grid.freq_step::<T>() / (T::lit(2.0) * T::PI())).powi(2 * n as i32);
    let phase = |x: &[T], xi: &[T]| {
        let p = x.iter().zip(xi).fold(T::zero(), |s, (&a, &b)| s + a * b);
        Complex::new(p.cos(), p.sin())
    };
    let mut idx = vec![0usize; n];
    let mut x = vec![T::zero(); n];
    let mut out = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        grid.unflatten(j, &mut idx);
        for (xv, &i) in x.iter_mut().zip(&idx) {
            *xv = grid.coord(i);
        }
        let u2: Vec<Complex<T>> = s2.values.iter().zip(&s2.freqs).map(|(&v, xi)| v * phase(&x, xi)).collect();
        let mut total = Complex::new(T::zero(), T::zero());
        for a in 0..s1.flat.len() {
            let u1 = s1.values[a] * phase(&x, &s1.freqs[a]);
            let mut inner = Complex::new(T::zero(), T::zero());
            for b in 0..s2.flat.len() {
                inner = inner + sigma.eval_on_grid(&grid, s1.flat[a], s2.flat[b], &x, &s1.freqs[a], &s2.freqs[b]) * u2[b];
            }
            total = total + u1 * inner;
        }
        out.push(total * scale);
    }
    GridFunction::from_samples(grid, Domain::Space, out)
}

/// Picks [`apply_xindep`] or [`apply_general`] from the symbol.
pub fn apply<T: Real>(sigma: &SymbolSpec<T>, f1: &GridFunction<T>, f2: &GridFunction<T>) -> Result<GridFunction<T>> {
    if sigma.is_x_dependent() {
        apply_general(sigma, f1, f2)
    } else {
        apply_xindep(sigma, f1, f2)
    }
}

/// Dense midpoint quadrature of the defining double integral, independent of
/// any FFT: frequencies on `points` cells per axis of `[-half_width, half_width)`.
pub fn quadrature_oracle<T, F1, F2>(
    sigma: &SymbolSpec<T>,
    fhat1: F1,
    fhat2: F2,
    xs: &[Vec<T>],
    half_width: T,
    points: usize,
) -> Result<Vec<Complex<T>>>
where
    T: Real,
    F1: Fn(&[T]) -> Complex<T>,
    F2: Fn(&[T]) -> Complex<T>,
{
    let n = sigma.dim();
    if points == 0 || !(half_width > T::zero()) {
        return param("quadrature needs a positive window and at least one point");
    }
    let total = points.checked_pow(n as u32).ok_or_else(|| LabError::Resource("quadrature grid too large".into()))?;
    if total.saturating_mul(total) > 1 << 26 {
        return Err(LabError::Resource("quadrature grid too large".into()));
    }
    let d = T::lit(2.0) * half_width / T::from_usize_lossy(points);
    let nodes: Vec<Vec<T>> = (0..total)
        .map(|mut i| {
            let mut p = vec![T::zero(); n];
            for v in p.iter_mut().rev() {
                *v = -half_width + (T::from_usize_lossy(i % points) + T::lit(0.5)) * d;
                i /= points;
            }
            p
        })
        .collect();
    let a1: Vec<Complex<T>> = nodes.iter().map(|p| fhat1(p)).collect();
    let a2: Vec<Complex<T>> = nodes.iter().map(|p| fhat2(p)).collect();
    let scale = (d / (T::lit(2.0) * T::PI())).powi(2 * n as i32);
    xs.iter()
        .map(|x| {
            if x.len() != n {
                return Err(LabError::Dimension { expected: n, got: x.len() });
            }
            let mut acc = Complex::new(T::zero(), T::zero());
            for (p, &v1) in nodes.iter().zip(&a1) {
                for (q, &v2) in nodes.iter().zip(&a2) {
                    let ph = x.iter().zip(p.iter().zip(q)).fold(T::zero(), |s, (&xv, (&pv, &qv))| s + xv * (pv + qv));
                    acc = acc + sigma.eval(x, p, q)? * v1 * v2 * Complex::new(ph.cos(), ph.sin());
                }
            }
            Ok(acc * scale)
        })
        .collect()
}

/// Norm on the output side of an operator-norm estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetNorm {
    /// `L^r`
    Lebesgue(f64),
    /// `(L^2, l^{r_1} .. l^{r_n})`
    Amalgam(Vec<f64>),
}

impl TargetNorm {
    pub fn eval<T: Real>(&self, f: &GridFunction<T>) -> Result<T> {
        match self {
            TargetNorm::Lebesgue(r) => f.lr_norm(T::lit(*r)),
            TargetNorm::Amalgam(rs) => {
                let qs: Vec<T> = rs.iter().map(|&r| T::lit(r)).collect();
                f.amalgam_norm(T::lit(2.0), &qs)
            }
        }
    }

    pub fn describe(&self) -> String {
        let f = |r: f64| if r.is_infinite() { "inf".to_string() } else { format!("{r}") };
        match self {
            TargetNorm::Lebesgue(r) => format!("L^{}", f(*r)),
            TargetNorm::Amalgam(rs) => format!("(L^2,{})", rs.iter().map(|&r| format!("l^{}", f(r))).collect::<Vec<_>>().join(" ")),
        }
    }
}

/// Per-bandwidth maxima over random trials of `||T(f1, f2)|| / (||f1|| ||f2||)`.
///
/// This is an empirical lower envelope of the operator norm: the true norm is
/// a supremum over all inputs.
#[derive(Clone, Debug, Serialize)]
pub struct OperatorRatioSweep {
    pub schema: u32,
    pub kind: String,
    pub symbol: String,
    pub target: String,
    pub grid: Grid,
    pub bandwidths: Vec<f64>,
    pub ratios: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub trial_seeds: Vec<Vec<[u64; 2]>>,
    pub fit: Option<LineFit>,
    pub wraparound_warnings: usize,
}

impl OperatorRatioSweep {
    pub fn slope(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.slope)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["bandwidth", "ratio"])?;
        for (b, r) in self.bandwidths.iter().zip(&self.ratios) {
            wr.write_record([format!("{b:e}"), format!("{r:e}")])?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn op_ratio_sweep<T: Real>(
    sigma: &SymbolSpec<T>,
    target: &TargetNorm,
    grid: Grid,
    bandwidths: &[T],
    trials: usize,
    seed: u64,
) -> Result<OperatorRatioSweep> {
    if trials < 8 {
        return param(format!("at least 8 trials are needed, got {trials}"));
    }
    if bandwidths.is_empty() || bandwidths.windows(2).any(|w| !(w[1] > w[0])) {
        return param("bandwidth schedule must be nonempty and strictly increasing");
    }
    if let Some(b) = bandwidths.iter().find(|&&b| b > grid.nyquist()) {
        return param(format!("bandwidth {b} exceeds the grid Nyquist frequency {}", grid.nyquist::<T>()));
    }
    if let TargetNorm::Amalgam(rs) = target {
        if rs.len() != grid.dim() {
            return Err(LabError::Dimension { expected: grid.dim(), got: rs.len() });
        }
    }
    let mut ratios = Vec::with_capacity(bandwidths.len());
    let mut trial_seeds = Vec::with_capacity(bandwidths.len());
    let mut warnings = 0;
    for (bi, &band) in bandwidths.iter().enumerate() {
        let mut best = 0f64;
        let mut seeds = Vec::with_capacity(trials);
        for t in 0..trials {
            let sa = derive_seed(seed, bi as u64, 2 * t as u64);
            let sb = derive_seed(seed, bi as u64, 2 * t as u64 + 1);
            seeds.push([sa, sb]);
            let f1 = GridFunction::random_band_limited(grid, band, sa)?;
            let f2 = GridFunction::random_band_limited(grid, band, sb)?;
            let out = apply(sigma, &f1, &f2)?;
            if out.wraparound_warning() {
                warnings += 1;
            }
            let den = f1.lr_norm(T::lit(2.0))? * f2.lr_norm(T::lit(2.0))?;
            best = best.max((target.eval(&out)? / den).as_f64());
        }
        ratios.push(best);
        trial_seeds.push(seeds);
    }
    let bws: Vec<f64> = bandwidths.iter().map(|b| b.as_f64()).collect();
    let fit = if bws.len() >= 2 && ratios.iter().all(|&r| r > 0.0) { fit_log2_log2(&bws, &ratios).ok() } else { None };
    Ok(OperatorRatioSweep {
        schema: 1,
        kind: "empirical lower envelope".into(),
        symbol: sigma.label().into(),
        target: target.describe(),
        grid,
        bandwidths: bws,
        ratios,
        trials,
        seed,
        trial_seeds,
        fit,
        wraparound_warnings: warnings,
    })
}
