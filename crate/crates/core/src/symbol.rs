//! Symbols `sigma(x, xi_1, xi_2)` on `(R^n)^3` and their samples on 3n-axis grids.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{param, LabError, Result};
use crate::fieldgrid::{fft_axes, Grid};
use crate::scalar::Real;
use crate::weights::{parse_weight, WeightSpec};

pub type SymbolFn<T> = Arc<dyn Fn(&[T], &[T], &[T]) -> Complex<T> + Send + Sync>;

#[derive(Clone)]
enum Kind<T> {
    Closed(SymbolFn<T>),
    /// x-independent values on the frequency pairs of `grid`, `values[m1 * N^n + m2]`.
    Table { grid: Grid, values: Arc<Vec<Complex<T>>> },
}

/// A bilinear symbol: a closed form, or an x-independent table tied to a grid.
///
/// Catalog symbols carry known derivative bounds (every derivative is bounded
/// by the symbol's own decay), which [`crate::lpcalc::derivative_decay_check`]
/// relies on.
#[derive(Clone)]
pub struct SymbolSpec<T> {
    n: usize,
    label: String,
    x_dependent: bool,
    catalog: bool,
    kind: Kind<T>,
}

impl<T: Real> fmt::Debug for SymbolSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolSpec")
            .field("n", &self.n)
            .field("label", &self.label)
            .field("x_dependent", &self.x_dependent)
            .field("catalog", &self.catalog)
            .finish()
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return param("symbol dimension must be positive");
    }
    Ok(())
}

fn sq<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |s, &a| s + a * a)
}

impl<T: Real> SymbolSpec<T> {
    fn closed(n: usize, label: String, x_dependent: bool, catalog: bool, f: SymbolFn<T>) -> Self {
        Self { n, label, x_dependent, catalog, kind: Kind::Closed(f) }
    }

    pub fn constant(n: usize, c: T) -> Result<Self> {
        check_dim(n)?;
        let v = Complex::new(c, T::zero());
        Ok(Self::closed(n, format!("const:{c}"), false, true, Arc::new(move |_, _, _| v)))
    }

    /// `<(xi_1, xi_2)>^m`.
    pub fn bracket_power(n: usize, m: T) -> Result<Self> {
        check_dim(n)?;
        if !m.is_finite() {
            return param("bracket-power exponent must be finite");
        }
        let half = m / T::lit(2.0);
        Ok(Self::closed(
            n,
            format!("bracket-power:{m}"),
            false,
            true,
            Arc::new(move |_, a, b| Complex::new((T::one() + sq(a) + sq(b)).powf(half), T::zero())),
        ))
    }

    /// `exp(-(|xi_1|^2 + |xi_2|^2) / 2)`.
    pub fn gaussian(n: usize) -> Result<Self> {
        check_dim(n)?;
        let h = T::lit(0.5);
        Ok(Self::closed(
            n,
            "gauss".into(),
            false,
            true,
            Arc::new(move |_, a, b| Complex::new((-(sq(a) + sq(b)) * h).exp(), T::zero())),
        ))
    }

    /// The weight itself as an x-independent symbol, `W(xi_1, xi_2)`.
    pub fn from_weight(w: WeightSpec<T>) -> Self {
        let n = w.dim();
        let label = format!("weight:{}", w.describe());
        let buf_len = 2 * n;
        Self::closed(
            n,
            label,
            false,
            false,
            Arc::new(move |_, a, b| {
                let mut p = Vec::with_capacity(buf_len);
                p.extend_from_slice(a);
                p.extend_from_slice(b);
                Complex::new(w.eval_unchecked(&p), T::zero())
            }),
        )
    }

    /// `m1(xi_1) m2(xi_2)`.
    pub fn separable<F1, F2>(n: usize, label: impl Into<String>, m1: F1, m2: F2) -> Result<Self>
    where
        F1: Fn(&[T]) -> Complex<T> + Send + Sync + 'static,
        F2: Fn(&[T]) -> Complex<T> + Send + Sync + 'static,
    {
        check_dim(n)?;
        Ok(Self::closed(n, label.into(), false, false, Arc::new(move |_, a, b| m1(a) * m2(b))))
    }

    pub fn xindep<F>(n: usize, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&[T], &[T]) -> Complex<T> + Send + Sync + 'static,
    {
        check_dim(n)?;
        Ok(Self::closed(n, label.into(), false, false, Arc::new(move |_, a, b| f(a, b))))
    }

    pub fn general<F>(n: usize, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&[T], &[T], &[T]) -> Complex<T> + Send + Sync + 'static,
    {
        check_dim(n)?;
        Ok(Self::closed(n, label.into(), true, false, Arc::new(f)))
    }

    /// Frequency-pair table for x-independent symbols sampled on `grid`.
    pub fn table(grid: Grid, values: Vec<Complex<T>>, label: impl Into<String>) -> Result<Self> {
        let expected = grid.len() * grid.len();
        if values.len() != expected {
            return Err(LabError::Dimension { expected, got: values.len() });
        }
        Ok(Self { n: grid.dim(), label: label.into(), x_dependent: false, catalog: false, kind: Kind::Table { grid, values: Arc::new(values) } })
    }

    /// `e^{i a.x} sigma(x, xi_1, xi_2)`.
    pub fn modulate_x(self, a: Vec<T>) -> Result<Self> {
        if a.len() != self.n {
            return Err(LabError::Dimension { expected: self.n, got: a.len() });
        }
        let Kind::Closed(inner) = self.kind else {
            return param("only closed-form symbols can be modulated");
        };
        let label = format!("modx({};{})", a.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","), self.label);
        let f: SymbolFn<T> = Arc::new(move |x, p, q| {
            let ph = x.iter().zip(&a).fold(T::zero(), |s, (&xv, &av)| s + xv * av);
            Complex::new(ph.cos(), ph.sin()) * inner(x, p, q)
        });
        Ok(Self::closed(self.n, label, true, self.catalog, f))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_x_dependent(&self) -> bool {
        self.x_dependent
    }

    pub fn is_catalog(&self) -> bool {
        self.catalog
    }

    pub fn table_grid(&self) -> Option<&Grid> {
        match &self.kind {
            Kind::Table { grid, .. } => Some(grid),
            Kind::Closed(_) => None,
        }
    }

    pub fn eval(&self, x: &[T], xi1: &[T], xi2: &[T]) -> Result<Complex<T>> {
        for v in [x, xi1, xi2] {
            if v.len() != self.n {
                return Err(LabError::Dimension { expected: self.n, got: v.len() });
            }
        }
        match &self.kind {
            Kind::Closed(f) => Ok(f(x, xi1, xi2)),
            Kind::Table { .. } => param("tabulated symbols are only defined on their grid"),
        }
    }

    /// Evaluation at frequency slots of `grid`; `xi1`, `xi2` hold the matching frequencies.
    pub(crate) fn eval_on_grid(&self, grid: &Grid, m1: usize, m2: usize, x: &[T], xi1: &[T], xi2: &[T]) -> Complex<T> {
        match &self.kind {
            Kind::Closed(f) => f(x, xi1, xi2),
            Kind::Table { values, .. } => values[m1 * grid.len() + m2],
        }
    }

    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.n {
            return Err(LabError::Dimension { expected: self.n, got: grid.dim() });
        }
        if let Kind::Table { grid: g, .. } = &self.kind {
            if g != grid {
                return Err(LabError::GridMismatch("symbol table was sampled on another grid".into()));
            }
        }
        Ok(())
    }

    /// Samples on the 3n-axis grid with `x_axis` for every x-coordinate and
    /// `xi_axis` for every frequency coordinate.
    pub fn sample(&self, x_axis: Grid, xi_axis: Grid) -> Result<SymbolSample<T>> {
        let mut axes = vec![x_axis; self.n];
        axes.extend(std::iter::repeat_n(xi_axis, 2 * self.n));
        self.sample_axes(axes)
    }

    pub fn sample_axes(&self, axes: Vec<Grid>) -> Result<SymbolSample<T>> {
        let Kind::Closed(f) = &self.kind else {
            return param("tabulated symbols cannot be resampled");
        };
        let n = self.n;
        SymbolSample::from_fn(n, axes, self.label.clone(), |p| f(&p[..n], &p[n..2 * n], &p[2 * n..]))
    }
}

pub const SYMBOL_GRAMMAR: &str = "\
symbol := atom ['@' n]
atom   := 'const:' C | 'bracket-power:' M | 'gauss' | 'weight:' WEIGHT
          (WEIGHT uses the weight grammar, evaluated at real frequencies)";

/// Parses `const:1`, `bracket-power:-0.5`, `gauss`, `weight:step(sum-power:-0.5)`,
/// with an optional `@n` suffix on the first three (default `n = 1`).
pub fn parse_symbol<T: Real>(s: &str) -> Result<SymbolSpec<T>> {
    let s = s.trim();
    if let Some(w) = s.strip_prefix("weight:") {
        return Ok(SymbolSpec::from_weight(parse_weight(w)?));
    }
    let (body, n) = match s.rsplit_once('@') {
        Some((b, d)) => (b, d.trim().parse::<usize>().map_err(|_| LabError::Parse(format!("bad dimension in {s:?}")))?),
        None => (s, 1),
    };
    let num = |v: &str| -> Result<T> {
        v.trim().parse::<f64>().map(T::lit).map_err(|_| LabError::Parse(format!("bad number {v:?} in {s:?}")))
    };
    if let Some(c) = body.strip_prefix("const:") {
        SymbolSpec::constant(n, num(c)?)
    } else if let Some(m) = body.strip_prefix("bracket-power:") {
        SymbolSpec::bracket_power(n, num(m)?)
    } else if body == "gauss" {
        SymbolSpec::gaussian(n)
    } else {
        Err(LabError::Parse(format!("unknown symbol {s:?}\n{SYMBOL_GRAMMAR}")))
    }
}

/// A symbol sampled on a product of one-dimensional grids, axis order
/// `(x_1..x_n, xi_{1,1}..xi_{1,n}, xi_{2,1}..xi_{2,n})`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolSample<T> {
    n: usize,
    axes: Vec<Grid>,
    label: String,
    data: Vec<Complex<T>>,
}

impl<T: Real> SymbolSample<T> {
    pub fn from_fn<F: FnMut(&[T]) -> Complex<T>>(n: usize, axes: Vec<Grid>, label: String, mut f: F) -> Result<Self> {
        check_dim(n)?;
        if axes.len() != 3 * n {
            return Err(LabError::Dimension { expected: 3 * n, got: axes.len() });
        }
        if axes.iter().any(|g| g.dim() != 1) {
            return param("symbol axes must be one-dimensional grids");
        }
        let shape: Vec<usize> = axes.iter().map(|g| g.points()).collect();
        let total: usize = shape.iter().product();
        if total > 1 << 24 {
            return Err(LabError::Resource(format!("symbol tensor of {total} samples is too large")));
        }
        let mut p = vec![T::zero(); 3 * n];
        let mut idx = vec![0usize; 3 * n];
        let mut data = Vec::with_capacity(total);
        for flat in 0..total {
            unflatten(&shape, flat, &mut idx);
            for ((pv, &j), g) in p.iter_mut().zip(&idx).zip(&axes) {
                *pv = g.coord(j);
            }
            data.push(f(&p));
        }
        Ok(Self { n, axes, label, data })
    }

    pub fn from_data(n: usize, axes: Vec<Grid>, label: String, data: Vec<Complex<T>>) -> Result<Self> {
        let total: usize = axes.iter().map(|g| g.points()).product();
        if axes.len() != 3 * n {
            return Err(LabError::Dimension { expected: 3 * n, got: axes.len() });
        }
        if data.len() != total {
            return Err(LabError::Dimension { expected: total, got: data.len() });
        }
        Ok(Self { n, axes, label, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn axes(&self) -> &[Grid] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|g| g.points()).collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.axes != other.axes {
            return Err(LabError::GridMismatch("symbol samples live on different grids".into()));
        }
        Ok(self.data.iter().zip(&other.data).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm())))
    }

    /// Plain `l^2` sum of the samples times the cell volume.
    pub fn l2_norm(&self) -> T {
        let vol = self.axes.iter().fold(T::one(), |v, g| v * g.step::<T>());
        (self.data.iter().fold(T::zero(), |s, v| s + v.norm_sqr()) * vol).sqrt()
    }

    pub(crate) fn with_data(&self, data: Vec<Complex<T>>) -> Self {
        Self { n: self.n, axes: self.axes.clone(), label: self.label.clone(), data }
    }

    /// Unnormalized DFT over every axis.
    pub(crate) fn spectrum(&self) -> Vec<Complex<T>> {
        let mut d = self.data.clone();
        fft_axes(&mut d, &self.shape(), &vec![true; 3 * self.n], false);
        d
    }

    /// Sample tensor from a spectrum produced by [`SymbolSample::spectrum`].
    pub(crate) fn from_spectrum(&self, mut spec: Vec<Complex<T>>) -> Self {
        fft_axes(&mut spec, &self.shape(), &vec![true; 3 * self.n], true);
        let scale = T::one() / T::from_usize_lossy(spec.len());
        spec.iter_mut().for_each(|v| *v = *v * scale);
        self.with_data(spec)
    }
}

pub(crate) fn unflatten(shape: &[usize], mut flat: usize, out: &mut [usize]) {
    for (o, &len) in out.iter_mut().zip(shape).rev() {
        *o = flat % len;
        flat /= len;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_evaluations() {
        let s = SymbolSpec::<f64>::bracket_power(1, -0.5).unwrap();
        let v = s.eval(&[0.0], &[3.0], &[4.0]).unwrap();
        assert!((v.re - 26f64.powf(-0.25)).abs() < 1e-15);
        assert!(s.is_catalog() && !s.is_x_dependent());
        let m = s.clone().modulate_x(vec![1.0]).unwrap();
        let w = m.eval(&[std::f64::consts::PI], &[0.0], &[0.0]).unwrap();
        assert!((w.re + 1.0).abs() < 1e-15 && m.is_x_dependent() && m.is_catalog());
        assert!(s.eval(&[0.0, 0.0], &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn parses_symbols() {
        let s = parse_symbol::<f64>("const:2.5").unwrap();
        assert_eq!(s.eval(&[1.0], &[2.0], &[3.0]).unwrap().re, 2.5);
        let w = parse_symbol::<f64>("weight:step(sum-power:-0.5)").unwrap();
        assert_eq!(w.eval(&[0.0], &[0.4], &[-0.4]).unwrap().re, 1.0);
        assert_eq!(parse_symbol::<f64>("gauss@2").unwrap().dim(), 2);
        assert!(parse_symbol::<f64>("nope").is_err());
    }

    #[test]
    fn sample_layout_and_spectrum_round_trip() {
        let x = Grid::new(1, 1, 4).unwrap();
        let xi = Grid::new(1, 2, 8).unwrap();
        let s = SymbolSpec::<f64>::general(1, "t", |x, a, b| Complex::new(x[0] + 10.0 * a[0] + 100.0 * b[0], 0.0)).unwrap();
        let smp = s.sample(x, xi).unwrap();
        assert_eq!(smp.len(), 4 * 8 * 8);
        // last axis fastest
        assert_eq!(smp.data()[1].re - smp.data()[0].re, 100.0 * 0.5);
        let back = smp.from_spectrum(smp.spectrum());
        assert!(back.max_abs_diff(&smp).unwrap() < 1e-12);
    }
}
