//! Periodic grids on `[-L, L)^n`, the Fourier transform with
//! `f^(xi) = int e^{-i xi x} f(x) dx`, and Lebesgue, amalgam and uniformly
//! local norms of sampled functions.

use std::io::{Read, Write};

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{param, LabError, Result};
use crate::scalar::{CompensatedSum, Real};

/// Uniform grid with `points` samples per axis on `[-half_width, half_width)^dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Grid {
    dim: usize,
    half_width: u32,
    points: usize,
}

/// Placement of the unit cubes used by amalgam and uniformly local norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub enum CubeAnchor {
    /// `nu + [-1/2, 1/2)^n`
    #[default]
    Centered,
    /// `nu + [0, 1)^n`
    Corner,
}

impl Grid {
    pub fn new(dim: usize, half_width: u32, points: usize) -> Result<Self> {
        if dim == 0 {
            return param("grid dimension must be positive");
        }
        if half_width == 0 {
            return param("half-width L must be positive");
        }
        if points < 2 || !points.is_power_of_two() {
            return param(format!("points per axis must be a power of two, got {points}"));
        }
        if points % (2 * half_width as usize) != 0 {
            return param(format!("step 2L/N = {}/{} must divide 1", 2 * half_width, points));
        }
        if (points as f64).powi(dim as i32) > 2.0e8 {
            return Err(LabError::Resource(format!("{points}^{dim} samples exceed the grid budget")));
        }
        Ok(Self { dim, half_width, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> u32 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of samples `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Samples per unit length, `1/h`.
    pub fn per_unit(&self) -> usize {
        self.points / (2 * self.half_width as usize)
    }

    pub fn step<T: Real>(&self) -> T {
        T::lit(2.0 * self.half_width as f64 / self.points as f64)
    }

    /// Frequency spacing `pi / L`.
    pub fn freq_step<T: Real>(&self) -> T {
        T::PI() / T::lit(self.half_width as f64)
    }

    /// `pi / h`; the frequency grid covers `[-pi/h, pi/h)`.
    pub fn nyquist<T: Real>(&self) -> T {
        T::PI() * T::lit(self.per_unit() as f64)
    }

    /// Spatial coordinate of index `j` along an axis.
    pub fn coord<T: Real>(&self, j: usize) -> T {
        T::lit(-(self.half_width as f64) + j as f64 * 2.0 * self.half_width as f64 / self.points as f64)
    }

    /// Signed frequency index of FFT slot `m`.
    pub fn freq_index(&self, m: usize) -> i64 {
        signed_index(m, self.points)
    }

    /// Frequency of FFT slot `m` along an axis.
    pub fn freq<T: Real>(&self, m: usize) -> T {
        T::from_i64_lossy(self.freq_index(m)) * self.freq_step()
    }

    /// Multi-index of a flat position (last axis fastest).
    pub fn unflatten(&self, mut idx: usize, out: &mut [usize]) {
        for o in out.iter_mut().rev() {
            *o = idx % self.points;
            idx /= self.points;
        }
    }

    fn check_cubes(&self, anchor: CubeAnchor) -> Result<()> {
        if anchor == CubeAnchor::Centered && self.per_unit() % 2 != 0 {
            return param("centered unit cubes need an even number of samples per unit length");
        }
        Ok(())
    }

    /// Cube slot in `0..2L` of sample `j` along an axis.
    pub(crate) fn cube_slot(&self, j: usize, anchor: CubeAnchor) -> usize {
        let pu = self.per_unit();
        let nc = 2 * self.half_width as usize;
        match anchor {
            CubeAnchor::Corner => j / pu,
            CubeAnchor::Centered => ((j + pu / 2) / pu) % nc,
        }
    }
}

/// Signed index of FFT slot `m` for length `n`.
pub fn signed_index(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Domain {
    Space,
    Frequency,
}

/// Complex samples on a [`Grid`], row-major with the last axis fastest.
///
/// Frequency-domain samples are stored in FFT order along every axis.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    grid: Grid,
    domain: Domain,
    data: Vec<Complex<T>>,
}

/// In-place multi-axis FFT over a row-major array of the given shape.
///
/// `axes[a]` selects which axes are transformed. The transform is
/// unnormalized in both directions.
pub fn fft_axes<T: Real>(data: &mut [Complex<T>], shape: &[usize], axes: &[bool], inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let total: usize = shape.iter().product();
    debug_assert_eq!(total, data.len());
    for (a, &len) in shape.iter().enumerate() {
        if !axes[a] || len <= 1 {
            continue;
        }
        let fft: std::sync::Arc<dyn Fft<T>> =
            if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        let stride: usize = shape[a + 1..].iter().product();
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let outer = total / (len * stride);
        let mut line = vec![Complex::new(T::zero(), T::zero()); len];
        for o in 0..outer {
            let base = o * len * stride;
            for s in 0..stride {
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[base + k * stride + s];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride + s] = *v;
                }
            }
        }
    }
}

/// Nested norm over a row-major array: `exps[a]` is applied over axis `a`,
/// innermost first in `order`.
fn nested_reduce(values: Vec<f64>, shape: &[usize], order: &[usize], exps: &[f64], weights: &[f64]) -> f64 {
    let mut vals = values;
    let mut shape = shape.to_vec();
    let mut alive: Vec<usize> = (0..shape.len()).collect();
    for &ax in order {
        let pos = alive.iter().position(|&a| a == ax).expect("axis listed once");
        let len = shape[pos];
        let stride: usize = shape[pos + 1..].iter().product();
        let outer: usize = shape[..pos].iter().product();
        let q = exps[ax];
        let w = weights[ax];
        let mut out = Vec::with_capacity(outer * stride);
        for o in 0..outer {
            for s in 0..stride {
                let it = (0..len).map(|k| vals[o * len * stride + k * stride + s]);
                out.push(lq(it, q, w));
            }
        }
        vals = out;
        shape.remove(pos);
        alive.remove(pos);
    }
    vals[0]
}

/// `(sum w |v|^q)^{1/q}` or the max for `q = inf`; values are nonnegative.
fn lq<I: Iterator<Item = f64>>(it: I, q: f64, w: f64) -> f64 {
    if q.is_infinite() {
        return it.fold(0.0, f64::max);
    }
    let mut acc = CompensatedSum::<f64>::new();
    if q == 1.0 {
        for v in it {
            acc.add(v);
        }
        return acc.value() * w;
    }
    if q == 2.0 {
        for v in it {
            acc.add(v * v);
        }
        return (acc.value() * w).sqrt();
    }
    let mut vals: Vec<f64> = it.collect();
    let m = vals.iter().fold(0.0f64, |a, &b| a.max(b));
    if m == 0.0 {
        return 0.0;
    }
    vals.iter_mut().for_each(|v| *v /= m);
    for v in vals {
        acc.add(v.powf(q));
    }
    m * (acc.value() * w).powf(1.0 / q)
}

impl<T: Real> GridFunction<T> {
    pub fn zeros(grid: Grid, domain: Domain) -> Self {
        Self { grid, domain, data: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    pub fn from_samples(grid: Grid, domain: Domain, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(LabError::Dimension { expected: grid.len(), got: data.len() });
        }
        Ok(Self { grid, domain, data })
    }

    /// Samples `f` at the spatial grid points.
    pub fn from_fn<F: FnMut(&[T]) -> Complex<T>>(grid: Grid, mut f: F) -> Self {
        let mut idx = vec![0usize; grid.dim()];
        let mut x = vec![T::zero(); grid.dim()];
        let data = (0..grid.len())
            .map(|i| {
                grid.unflatten(i, &mut idx);
                for (xv, &j) in x.iter_mut().zip(&idx) {
                    *xv = grid.coord(j);
                }
                f(&x)
            })
            .collect();
        Self { grid, domain: Domain::Space, data }
    }

    pub fn from_real_fn<F: FnMut(&[T]) -> T>(grid: Grid, mut f: F) -> Self {
        Self::from_fn(grid, |x| Complex::new(f(x), T::zero()))
    }

    /// Samples a spectrum `g(xi)` at the frequency grid points (FFT order).
    pub fn from_spectrum_fn<F: FnMut(&[T]) -> Complex<T>>(grid: Grid, mut g: F) -> Self {
        let mut idx = vec![0usize; grid.dim()];
        let mut xi = vec![T::zero(); grid.dim()];
        let data = (0..grid.len())
            .map(|i| {
                grid.unflatten(i, &mut idx);
                for (v, &m) in xi.iter_mut().zip(&idx) {
                    *v = grid.freq(m);
                }
                g(&xi)
            })
            .collect();
        Self { grid, domain: Domain::Frequency, data }
    }

    /// Random function with complex Gaussian spectral coefficients on
    /// `|xi_j| <= band` for every axis, normalized to unit `L^2` norm.
    pub fn random_band_limited(grid: Grid, band: T, seed: u64) -> Result<Self> {
        if !(band > T::zero()) {
            return param("band must be positive");
        }
        if band > grid.nyquist() {
            return param(format!("band {band} exceeds the grid Nyquist frequency {}", grid.nyquist::<T>()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = Self::from_spectrum_fn(grid, |xi| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if xi.iter().all(|v| v.abs() <= band) {
                Complex::new(T::lit(re), T::lit(im))
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        let mut f = spec.grid_ift()?;
        let nrm = f.lr_norm(T::lit(2.0))?;
        if nrm == T::zero() {
            return Err(LabError::Degenerate("band contains no grid frequency".into()));
        }
        f.data.iter_mut().for_each(|v| *v = *v / nrm);
        Ok(f)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    fn cell_measure(&self) -> T {
        let h = match self.domain {
            Domain::Space => self.grid.step::<T>(),
            Domain::Frequency => self.grid.freq_step::<T>(),
        };
        h.powi(self.grid.dim() as i32)
    }

    fn sign_flip(&mut self) {
        let n = self.grid.points();
        let mut idx = vec![0usize; self.grid.dim()];
        for i in 0..self.data.len() {
            self.grid.unflatten(i, &mut idx);
            if idx.iter().map(|&m| signed_index(m, n)).sum::<i64>() % 2 != 0 {
                self.data[i] = -self.data[i];
            }
        }
    }

    /// `f^(xi_m) ~ h^n (-1)^{|m|} DFT[f](m)`, the Riemann sum of `int e^{-i xi x} f(x) dx`.
    pub fn grid_ft(&self) -> Result<Self> {
        if self.domain != Domain::Space {
            return Err(LabError::GridMismatch("grid_ft expects spatial samples".into()));
        }
        let mut out = self.clone();
        let shape = vec![self.grid.points(); self.grid.dim()];
        fft_axes(&mut out.data, &shape, &vec![true; self.grid.dim()], false);
        out.domain = Domain::Frequency;
        out.sign_flip();
        let h = self.cell_measure();
        out.data.iter_mut().for_each(|v| *v = *v * h);
        Ok(out)
    }

    /// Inverse of [`GridFunction::grid_ft`], `(2 pi)^{-n} int e^{i xi x} g(xi) d xi`.
    pub fn grid_ift(&self) -> Result<Self> {
        if self.domain != Domain::Frequency {
            return Err(LabError::GridMismatch("grid_ift expects frequency samples".into()));
        }
        let mut out = self.clone();
        out.sign_flip();
        let shape = vec![self.grid.points(); self.grid.dim()];
        fft_axes(&mut out.data, &shape, &vec![true; self.grid.dim()], true);
        out.domain = Domain::Space;
        let scale = (T::lit(self.grid.points() as f64) * self.grid.step::<T>()).powi(self.grid.dim() as i32).recip();
        out.data.iter_mut().for_each(|v| *v = *v * scale);
        Ok(out)
    }

    /// Riemann-sum `L^r` norm, `r` in `(0, inf]`.
    pub fn lr_norm(&self, r: T) -> Result<T> {
        if r.is_nan() || r <= T::zero() {
            return param(format!("L^r exponent must be positive, got {r}"));
        }
        let mags = self.data.iter().map(|v| v.norm().as_f64());
        let meas = self.cell_measure().as_f64();
        Ok(T::lit(lq(mags, r.as_f64(), meas)))
    }

    /// Per-cube `L^p` norms indexed by cube slot (row-major over `2L` slots per axis).
    fn cube_norms(&self, p: f64, anchor: CubeAnchor) -> Result<Vec<f64>> {
        if self.domain != Domain::Space {
            return Err(LabError::GridMismatch("amalgam norms are spatial".into()));
        }
        self.grid.check_cubes(anchor)?;
        let d = self.grid.dim();
        let nc = 2 * self.grid.half_width() as usize;
        let ncubes = nc.pow(d as u32);
        let meas = self.cell_measure().as_f64();
        let mut acc: Vec<CompensatedSum<f64>> = vec![CompensatedSum::new(); ncubes];
        let mut maxes = vec![0f64; ncubes];
        let mut idx = vec![0usize; d];
        for (i, v) in self.data.iter().enumerate() {
            self.grid.unflatten(i, &mut idx);
            let c = idx.iter().fold(0usize, |s, &j| s * nc + self.grid.cube_slot(j, anchor));
            let m = v.norm().as_f64();
            if p.is_infinite() {
                maxes[c] = maxes[c].max(m);
            } else if p == 2.0 {
                acc[c].add(m * m);
            } else {
                acc[c].add(m.powf(p));
            }
        }
        Ok(if p.is_infinite() { maxes } else { acc.iter().map(|a| (a.value() * meas).powf(1.0 / p)).collect() })
    }

    /// `(L^p, l^{q_1} .. l^{q_n})` norm with centered cubes `nu + [-1/2, 1/2)^n`.
    pub fn amalgam_norm(&self, p: T, qs: &[T]) -> Result<T> {
        self.amalgam_norm_anchored(p, qs, CubeAnchor::Centered)
    }

    /// Amalgam norm with the `l^{q_1}` sum over `nu_1` innermost.
    pub fn amalgam_norm_anchored(&self, p: T, qs: &[T], anchor: CubeAnchor) -> Result<T> {
        let d = self.grid.dim();
        if qs.len() != d {
            return Err(LabError::Dimension { expected: d, got: qs.len() });
        }
        if p.is_nan() || p < T::one() || qs.iter().any(|q| q.is_nan() || *q < T::one()) {
            return param("amalgam exponents must lie in [1, inf]");
        }
        let cubes = self.cube_norms(p.as_f64(), anchor)?;
        let nc = 2 * self.grid.half_width() as usize;
        let shape = vec![nc; d];
        let exps: Vec<f64> = qs.iter().map(|q| q.as_f64()).collect();
        let order: Vec<usize> = (0..d).collect();
        Ok(T::lit(nested_reduce(cubes, &shape, &order, &exps, &vec![1.0; d])))
    }

    /// `sup_nu ||f||_{L^2(nu + Q)}`.
    pub fn l2ul_norm(&self) -> Result<T> {
        self.l2ul_norm_anchored(CubeAnchor::Centered)
    }

    pub fn l2ul_norm_anchored(&self, anchor: CubeAnchor) -> Result<T> {
        Ok(T::lit(self.cube_norms(2.0, anchor)?.into_iter().fold(0.0, f64::max)))
    }

    /// Mixed Lebesgue norm `|| .. ||f||_{L^{r_1}_{x_{a_1}}} .. ||_{L^{r_k}_{x_{a_k}}}`,
    /// applying `order[0]` innermost. Every axis must appear once.
    pub fn mixed_norm(&self, order: &[(usize, T)]) -> Result<T> {
        let d = self.grid.dim();
        if order.len() != d {
            return Err(LabError::Dimension { expected: d, got: order.len() });
        }
        let mut seen = vec![false; d];
        let mut exps = vec![0f64; d];
        for &(a, r) in order {
            if a >= d || seen[a] {
                return param("mixed norm needs each axis exactly once");
            }
            if r.is_nan() || r <= T::zero() {
                return param("mixed norm exponents must be positive");
            }
            seen[a] = true;
            exps[a] = r.as_f64();
        }
        let h = match self.domain {
            Domain::Space => self.grid.step::<f64>(),
            Domain::Frequency => self.grid.freq_step::<f64>(),
        };
        let mags: Vec<f64> = self.data.iter().map(|v| v.norm().as_f64()).collect();
        let shape = vec![self.grid.points(); d];
        let axes: Vec<usize> = order.iter().map(|&(a, _)| a).collect();
        Ok(T::lit(nested_reduce(mags, &shape, &axes, &exps, &vec![h; d])))
    }

    /// True when `max |f|` within one unit of the boundary exceeds `1e-6 ||f||_{L^2}`,
    /// i.e. periodization may have distorted the result.
    pub fn wraparound_warning(&self) -> bool {
        if self.domain != Domain::Space {
            return false;
        }
        let pu = self.grid.per_unit();
        let n = self.grid.points();
        let mut idx = vec![0usize; self.grid.dim()];
        let mut edge = 0f64;
        for (i, v) in self.data.iter().enumerate() {
            self.grid.unflatten(i, &mut idx);
            if idx.iter().any(|&j| j < pu || j >= n - pu) {
                edge = edge.max(v.norm().as_f64());
            }
        }
        let l2 = self.lr_norm(T::lit(2.0)).map(|x| x.as_f64()).unwrap_or(0.0);
        edge > 1e-6 * l2
    }

    /// Pointwise combination of two functions on the same grid and domain.
    pub fn zip_with<F: Fn(Complex<T>, Complex<T>) -> Complex<T>>(&self, other: &Self, f: F) -> Result<Self> {
        if self.grid != other.grid || self.domain != other.domain {
            return Err(LabError::GridMismatch("operands live on different grids".into()));
        }
        Ok(Self {
            grid: self.grid,
            domain: self.domain,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn map<F: Fn(Complex<T>) -> Complex<T>>(&self, f: F) -> Self {
        Self { grid: self.grid, domain: self.domain, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Largest pointwise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.grid != other.grid || self.domain != other.domain {
            return Err(LabError::GridMismatch("operands live on different grids".into()));
        }
        Ok(self.data.iter().zip(&other.data).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm())))
    }

    /// Writes the binary container: magic `BLGF`, version, header, then
    /// little-endian `(re, im)` f64 pairs.
    pub fn write_container<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"BLGF")?;
        w.write_all(&1u16.to_le_bytes())?;
        w.write_all(&(self.grid.dim() as u16).to_le_bytes())?;
        w.write_all(&self.grid.half_width().to_le_bytes())?;
        w.write_all(&(self.grid.points() as u32).to_le_bytes())?;
        w.write_all(b"c128")?;
        // axis order 0: row-major, last axis fastest
        w.write_all(&[0u8, if self.domain == Domain::Space { 0 } else { 1 }])?;
        for v in &self.data {
            w.write_all(&v.re.as_f64().to_le_bytes())?;
            w.write_all(&v.im.as_f64().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_container<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 22];
        r.read_exact(&mut head)?;
        if &head[0..4] != b"BLGF" {
            return Err(LabError::Parse("not a grid-function container".into()));
        }
        let version = u16::from_le_bytes([head[4], head[5]]);
        if version != 1 {
            return Err(LabError::Parse(format!("unsupported container version {version}")));
        }
        let dim = u16::from_le_bytes([head[6], head[7]]) as usize;
        let half_width = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes"));
        let points = u32::from_le_bytes(head[12..16].try_into().expect("4 bytes")) as usize;
        if &head[16..20] != b"c128" || head[20] != 0 {
            return Err(LabError::Parse("unsupported dtype or axis order".into()));
        }
        let domain = match head[21] {
            0 => Domain::Space,
            1 => Domain::Frequency,
            d => return Err(LabError::Parse(format!("unknown domain tag {d}"))),
        };
        let grid = Grid::new(dim, half_width, points)?;
        let mut buf = vec![0u8; 16 * grid.len()];
        r.read_exact(&mut buf)?;
        let data = buf
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[0..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..16].try_into().expect("8 bytes"));
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect();
        Ok(Self { grid, domain, data })
    }

    /// CSV export for one-dimensional functions: `x,re,im` (or `xi,re,im`).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        if self.grid.dim() != 1 {
            return param("CSV export is for one-dimensional grids");
        }
        let mut wr = csv::Writer::from_writer(w);
        let (label, spectral) = match self.domain {
            Domain::Space => ("x", false),
            Domain::Frequency => ("xi", true),
        };
        wr.write_record([label, "re", "im"])?;
        let n = self.grid.points();
        let order: Vec<usize> = if spectral { (n / 2..n).chain(0..n / 2).collect() } else { (0..n).collect() };
        for j in order {
            let c: f64 = if spectral { self.grid.freq::<f64>(j) } else { self.grid.coord::<f64>(j) };
            let v = self.data[j];
            wr.write_record([format!("{c:e}"), format!("{:e}", v.re.as_f64()), format!("{:e}", v.im.as_f64())])?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(l: u32, n: usize) -> Grid {
        Grid::new(1, l, n).unwrap()
    }

    #[test]
    fn grid_invariants() {
        assert!(Grid::new(1, 16, 500).is_err());
        assert!(Grid::new(1, 3, 16).is_err());
        let g = g1(16, 512);
        assert_eq!(g.step::<f64>(), 1.0 / 16.0);
        assert_eq!(g.per_unit(), 16);
        assert!((g.nyquist::<f64>() - 16.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(g.freq::<f64>(256), -g.nyquist::<f64>());
    }

    #[test]
    fn gaussian_transform_pair() {
        let g = g1(16, 512);
        let f = GridFunction::<f64>::from_real_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
        let fh = f.grid_ft().unwrap();
        let exact = GridFunction::from_spectrum_fn(g, |xi: &[f64]| {
            Complex::new((2.0 * std::f64::consts::PI).sqrt() * (-xi[0] * xi[0] / 2.0).exp(), 0.0)
        });
        assert!(fh.max_abs_diff(&exact).unwrap() <= 1e-8);
        assert!(!f.wraparound_warning());
    }

    #[test]
    fn delta_like_has_unimodular_transform() {
        let g = g1(4, 64);
        let mut f = GridFunction::<f64>::zeros(g, Domain::Space);
        f.data_mut()[20] = Complex::new(1.0 / g.step::<f64>(), 0.0);
        let fh = f.grid_ft().unwrap();
        for v in fh.data() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let g = Grid::new(2, 4, 32).unwrap();
        let f = GridFunction::<f64>::random_band_limited(g, 5.0, 7).unwrap();
        let back = f.grid_ft().unwrap().grid_ift().unwrap();
        let scale = f.data().iter().fold(0.0f64, |m, v| m.max(v.norm()));
        assert!(f.max_abs_diff(&back).unwrap() <= 1e-12 * scale);
    }

    #[test]
    fn lebesgue_norms() {
        let g = g1(16, 512);
        let ind = GridFunction::<f64>::from_real_fn(g, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 });
        assert!((ind.lr_norm(2.0).unwrap() - 1.0).abs() < 1e-14);
        let gauss = GridFunction::<f64>::from_real_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
        assert!((gauss.lr_norm(2.0).unwrap() - std::f64::consts::PI.powf(0.25)).abs() < 1e-8);
        let sum: f64 = gauss.data().iter().map(|v| v.re).sum::<f64>() * g.step::<f64>();
        assert!((gauss.lr_norm(1.0).unwrap() - sum).abs() < 1e-13);
        assert!(gauss.lr_norm(0.0).is_err());
        assert_eq!(gauss.lr_norm(f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn amalgam_examples_corner_cubes() {
        let g = g1(8, 128);
        let unit = GridFunction::<f64>::from_real_fn(g, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 });
        for p in [1.0, 2.0, f64::INFINITY] {
            for q in [1.0, 2.0, 3.0, f64::INFINITY] {
                let v = unit.amalgam_norm_anchored(p, &[q], CubeAnchor::Corner).unwrap();
                assert!((v - 1.0).abs() < 1e-14, "p={p} q={q}: {v}");
            }
        }
        let two = GridFunction::<f64>::from_real_fn(g, |x| if (0.0..2.0).contains(&x[0]) { 1.0 } else { 0.0 });
        assert!((two.amalgam_norm_anchored(2.0, &[1.0], CubeAnchor::Corner).unwrap() - 2.0).abs() < 1e-14);
        assert!((two.amalgam_norm_anchored(2.0, &[2.0], CubeAnchor::Corner).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let three = GridFunction::<f64>::from_real_fn(g, |x| if (0.0..3.0).contains(&x[0]) { 1.0 } else { 0.0 });
        assert!((three.l2ul_norm_anchored(CubeAnchor::Corner).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn amalgam_examples_centered_cubes() {
        let g = g1(8, 128);
        let unit = GridFunction::<f64>::from_real_fn(g, |x| if (-0.5..0.5).contains(&x[0]) { 1.0 } else { 0.0 });
        for q in [1.0, 2.0, f64::INFINITY] {
            assert!((unit.amalgam_norm(2.0, &[q]).unwrap() - 1.0).abs() < 1e-14);
        }
        // [0, 1) straddles two centered cubes with mass 1/2 each
        let off = GridFunction::<f64>::from_real_fn(g, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 });
        assert!((off.amalgam_norm(2.0, &[1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        // cube -L wraps around the period
        let edge = GridFunction::<f64>::from_real_fn(g, |x| if x[0] < -7.5 || x[0] >= 7.5 { 1.0 } else { 0.0 });
        assert!((edge.amalgam_norm(2.0, &[1.0]).unwrap() - 1.0).abs() < 1e-14);
        let c = GridFunction::<f64>::from_real_fn(g, |_| 2.5);
        assert!((c.l2ul_norm().unwrap() - 2.5).abs() < 1e-14);
        assert!(c.wraparound_warning());
    }

    #[test]
    fn centered_cubes_need_even_resolution() {
        let g = g1(8, 16);
        let f = GridFunction::<f64>::from_real_fn(g, |_| 1.0);
        assert!(f.amalgam_norm(2.0, &[1.0]).is_err());
        assert!(f.amalgam_norm_anchored(2.0, &[1.0], CubeAnchor::Corner).is_ok());
    }

    #[test]
    fn container_and_csv_round_trip() {
        let g = g1(2, 16);
        let f = GridFunction::<f64>::random_band_limited(g, 3.0, 1).unwrap();
        let mut buf = Vec::new();
        f.write_container(&mut buf).unwrap();
        assert_eq!(buf.len(), 22 + 16 * 16);
        let back = GridFunction::<f64>::read_container(buf.as_slice()).unwrap();
        assert_eq!(f, back);
        let mut csv = Vec::new();
        f.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("x,re,im"));
        assert_eq!(text.lines().count(), 17);
        assert!(GridFunction::<f64>::read_container(&b"nope"[..]).is_err());
    }

    #[test]
    fn f32_transform_round_trip() {
        let g = g1(4, 64);
        let f = GridFunction::<f32>::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let back = f.grid_ft().unwrap().grid_ift().unwrap();
        assert!(f.max_abs_diff(&back).unwrap() < 1e-5);
    }
}
