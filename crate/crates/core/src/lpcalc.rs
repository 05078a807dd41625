//! Littlewood-Paley partitions, dyadic symbol pieces and Besov-type symbol norms.
//!
//! `phi(r) = g(2 - r) / (g(2 - r) + g(r - 1))` with `g(t) = exp(-1/t)` for
//! `t > 0`, `psi_0 = phi`, `psi_k = phi(. / 2^k) - phi(. / 2^{k-1})`.

use serde::Serialize;

use crate::error::{param, LabError, Result};
use crate::fieldgrid::{CubeAnchor, Grid};
use crate::fit::fit_line;
use crate::scalar::{CompensatedSum, Real};
use crate::symbol::{unflatten, SymbolSample, SymbolSpec};
use crate::weights::WeightSpec;

fn glue<T: Real>(t: T) -> T {
    if t > T::zero() {
        (-t.recip()).exp()
    } else {
        T::zero()
    }
}

/// Smooth radial cutoff: 1 on `[0, 1]`, 0 on `[2, inf)`.
pub fn lp_phi<T: Real>(r: T) -> T {
    let two = T::lit(2.0);
    if r <= T::one() {
        return T::one();
    }
    if r >= two {
        return T::zero();
    }
    let a = glue(two - r);
    a / (a + glue(r - T::one()))
}

/// `psi_k(r)` for the radius `r = |xi|`.
pub fn lp_psi<T: Real>(k: usize, r: T) -> T {
    if k == 0 {
        return lp_phi(r);
    }
    let s = T::lit(2f64.powi(k as i32));
    lp_phi(r / s) - lp_phi(r * T::lit(2.0) / s)
}

/// `psi_0 .. psi_K` sampled on the frequency grid of a [`Grid`].
#[derive(Clone, Debug)]
pub struct PartitionOfUnity<T> {
    grid: Grid,
    max_k: usize,
    values: Vec<Vec<T>>,
}

/// Builds the partition on `grid`'s frequency samples; needs Nyquist `>= 2^{K+1}`.
pub fn lp_partition<T: Real>(grid: Grid, max_k: usize) -> Result<PartitionOfUnity<T>> {
    let nyq = grid.nyquist::<f64>();
    if max_k > 60 || 2f64.powi(max_k as i32 + 1) > nyq {
        return param(format!("K = {max_k} needs Nyquist >= 2^(K+1) but the grid resolves {nyq:.3}"));
    }
    let mut idx = vec![0usize; grid.dim()];
    let radii: Vec<T> = (0..grid.len())
        .map(|i| {
            grid.unflatten(i, &mut idx);
            idx.iter().fold(T::zero(), |s, &m| s + grid.freq::<T>(m).powi(2)).sqrt()
        })
        .collect();
    let values = (0..=max_k).map(|k| radii.iter().map(|&r| lp_psi(k, r)).collect()).collect();
    Ok(PartitionOfUnity { grid, max_k, values })
}

impl<T: Real> PartitionOfUnity<T> {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    pub fn psi(&self, k: usize) -> Option<&[T]> {
        self.values.get(k).map(|v| v.as_slice())
    }

    /// `sum_k psi_k` at every grid frequency.
    pub fn total(&self) -> Vec<T> {
        (0..self.grid.len()).map(|i| self.values.iter().fold(T::zero(), |s, v| s + v[i])).collect()
    }

    /// Radius on which the partition sums to one: `2^K`.
    pub fn resolved_radius(&self) -> T {
        T::lit(2f64.powi(self.max_k as i32))
    }
}

/// Largest `K` with `2^{K+1}` at most `nyquist`.
pub fn max_shell(nyquist: f64) -> usize {
    let l = nyquist.log2().floor();
    if l < 1.0 {
        0
    } else {
        l as usize - 1
    }
}

/// Groups of axes filtered jointly by one radial `psi_k`.
struct Filters<T> {
    /// `tables[g][k][group-multi-index]`
    tables: Vec<Vec<Vec<T>>>,
    /// group multi-index of every flat sample
    gidx: Vec<Vec<u32>>,
    max_k: Vec<usize>,
}

impl<T: Real> Filters<T> {
    fn new(axes: &[Grid], groups: Vec<Vec<usize>>) -> Self {
        let shape: Vec<usize> = axes.iter().map(|g| g.points()).collect();
        let total: usize = shape.iter().product();
        let mut tables = Vec::new();
        let mut max_k = Vec::new();
        let mut gidx = Vec::new();
        let mut idx = vec![0usize; shape.len()];
        for grp in &groups {
            let gshape: Vec<usize> = grp.iter().map(|&a| shape[a]).collect();
            let gtotal: usize = gshape.iter().product();
            let nyq = grp.iter().map(|&a| axes[a].nyquist::<f64>()).fold(f64::INFINITY, f64::min);
            let kmax = max_shell(nyq);
            let mut gi = vec![0usize; grp.len()];
            let radii: Vec<T> = (0..gtotal)
                .map(|i| {
                    unflatten(&gshape, i, &mut gi);
                    grp.iter().zip(&gi).fold(T::zero(), |s, (&a, &m)| s + axes[a].freq::<T>(m).powi(2)).sqrt()
                })
                .collect();
            tables.push((0..=kmax).map(|k| radii.iter().map(|&r| lp_psi(k, r)).collect()).collect());
            max_k.push(kmax);
            let mut map = Vec::with_capacity(total);
            for flat in 0..total {
                unflatten(&shape, flat, &mut idx);
                let g = grp.iter().fold(0usize, |s, &a| s * shape[a] + idx[a]);
                map.push(g as u32);
            }
            gidx.push(map);
        }
        Self { tables, gidx, max_k }
    }

    fn apply(&self, spec: &[num_complex::Complex<T>], k: &[usize]) -> Vec<num_complex::Complex<T>> {
        spec.iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut w = T::one();
                for (g, &kg) in k.iter().enumerate() {
                    w = w * match self.tables[g].get(kg) {
                        Some(t) => t[self.gidx[g][i] as usize],
                        None => T::zero(),
                    };
                }
                v * w
            })
            .collect()
    }
}

fn star_groups(n: usize) -> Vec<Vec<usize>> {
    (0..3).map(|i| (i * n..(i + 1) * n).collect()).collect()
}

fn vec_groups(n: usize) -> Vec<Vec<usize>> {
    (0..3 * n).map(|a| vec![a]).collect()
}

fn filtered<T: Real>(s: &SymbolSample<T>, groups: Vec<Vec<usize>>, k: &[usize]) -> Result<SymbolSample<T>> {
    if k.len() != groups.len() {
        return Err(LabError::Dimension { expected: groups.len(), got: k.len() });
    }
    let filters = Filters::new(s.axes(), groups);
    let spec = filters.apply(&s.spectrum(), k);
    Ok(s.from_spectrum(spec))
}

/// `psi_{k0}(D_x) psi_{k1}(D_{xi_1}) psi_{k2}(D_{xi_2}) sigma` with radial `n`-dimensional filters.
pub fn delta_star<T: Real>(s: &SymbolSample<T>, k: [usize; 3]) -> Result<SymbolSample<T>> {
    filtered(s, star_groups(s.dim()), &k)
}

/// Per-coordinate filtering with `psi_{k_{i,j}}` on axis `(i, j)`; `k` has length `3n`.
pub fn delta_vec<T: Real>(s: &SymbolSample<T>, k: &[usize]) -> Result<SymbolSample<T>> {
    filtered(s, vec_groups(s.dim()), k)
}

#[derive(Clone, Debug, Serialize)]
pub struct BesovConfig {
    /// Unit cubes excluded next to each edge of the frequency windows, so the
    /// periodization seam does not enter the uniformly local norm.
    pub margin: usize,
    /// Increments below `floor * partial sum` count as converged.
    pub floor: f64,
}

impl Default for BesovConfig {
    fn default() -> Self {
        Self { margin: 2, floor: 1e-12 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShellTerm {
    pub k: Vec<usize>,
    /// `||W^{-1} Delta_k sigma||_{L^2_ul}` before the `2^{s.k}` factor.
    pub norm: f64,
    pub weighted: f64,
}

/// Partial sums of a Besov-type symbol norm, grouped by shell `max_i k_i`.
#[derive(Clone, Debug, Serialize)]
pub struct BesovReport {
    pub schema: u32,
    pub mode: String,
    pub symbol: String,
    pub weight: String,
    pub s: Vec<f64>,
    #[serde(rename = "K")]
    pub max_k: Vec<usize>,
    pub margin: usize,
    pub terms: Vec<ShellTerm>,
    pub partial_sums: Vec<f64>,
    pub increments: Vec<f64>,
    /// `increments[l] / increments[l-1]`, 0 once the increment is below the floor.
    pub ratios: Vec<f64>,
    /// Fitted log2 decay slope of the unweighted norms along each group with the others at 0.
    pub slopes: Vec<Option<f64>>,
}

impl BesovReport {
    pub fn total(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }

    pub fn last_increment(&self) -> f64 {
        self.increments.last().copied().unwrap_or(0.0)
    }

    /// Largest increment ratio over shells `l > shell`.
    pub fn max_ratio_beyond(&self, shell: usize) -> Option<f64> {
        self.ratios.iter().enumerate().filter(|(l, _)| *l > shell).map(|(_, &r)| r).reduce(f64::max)
    }
}

struct WeightedCubes {
    winv: Vec<f64>,
    cube_of: Vec<u32>,
    inside: Vec<bool>,
    cell: f64,
    ncubes: usize,
}

impl WeightedCubes {
    fn new<T: Real>(s: &SymbolSample<T>, w: &WeightSpec<T>, margin: usize) -> Result<Self> {
        let n = s.dim();
        if w.dim() != n {
            return Err(LabError::Dimension { expected: n, got: w.dim() });
        }
        let axes = s.axes();
        let shape = s.shape();
        for g in axes {
            if g.per_unit() % 2 != 0 {
                return param("symbol axes need an even number of samples per unit length");
            }
        }
        let slots: Vec<usize> = axes.iter().map(|g| 2 * g.half_width() as usize).collect();
        let ncubes: usize = slots.iter().product();
        let mut inside_cube = vec![true; ncubes];
        let mut ci = vec![0usize; shape.len()];
        for (c, ok) in inside_cube.iter_mut().enumerate() {
            unflatten(&slots, c, &mut ci);
            for a in n..3 * n {
                let s = ci[a];
                if margin > 0 && (s < margin + 1 || s + margin + 1 > slots[a]) {
                    *ok = false;
                }
            }
        }
        if !inside_cube.iter().any(|&b| b) {
            return param(format!("margin {margin} leaves no interior unit cube"));
        }
        let mut idx = vec![0usize; shape.len()];
        let mut p = vec![T::zero(); 2 * n];
        let mut winv = Vec::with_capacity(s.len());
        let mut cube_of = Vec::with_capacity(s.len());
        for flat in 0..s.len() {
            unflatten(&shape, flat, &mut idx);
            for a in 0..2 * n {
                p[a] = axes[n + a].coord(idx[n + a]);
            }
            let wv = w.eval(&p)?.as_f64();
            if !(wv > 0.0) {
                return Err(LabError::Domain(format!("weight is not positive at {:?}", p.iter().map(|v| v.as_f64()).collect::<Vec<_>>())));
            }
            winv.push(1.0 / wv);
            let c = idx.iter().zip(axes).zip(&slots).fold(0usize, |acc, ((&j, g), &ns)| acc * ns + g.cube_slot(j, CubeAnchor::Centered));
            cube_of.push(c as u32);
        }
        let cell = axes.iter().map(|g| g.step::<f64>()).product();
        Ok(Self { winv, cube_of, inside: inside_cube, cell, ncubes })
    }

    fn l2ul<T: Real>(&self, data: &[num_complex::Complex<T>]) -> f64 {
        let mut acc = vec![CompensatedSum::<f64>::new(); self.ncubes];
        for ((v, &w), &c) in data.iter().zip(&self.winv).zip(&self.cube_of) {
            let a = v.norm().as_f64() * w;
            acc[c as usize].add(a * a);
        }
        let top = acc.iter().zip(&self.inside).filter(|(_, &ok)| ok).map(|(a, _)| a.value()).fold(0.0, f64::max);
        (top * self.cell).sqrt()
    }
}

fn besov<T: Real>(
    mode: &str,
    s: &SymbolSample<T>,
    w: &WeightSpec<T>,
    exps: &[f64],
    groups: Vec<Vec<usize>>,
    cfg: &BesovConfig,
) -> Result<BesovReport> {
    if exps.len() != groups.len() {
        return Err(LabError::Dimension { expected: groups.len(), got: exps.len() });
    }
    if exps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return param("smoothness exponents must be finite and nonnegative");
    }
    let cubes = WeightedCubes::new(s, w, cfg.margin)?;
    let filters = Filters::new(s.axes(), groups);
    let spec = s.spectrum();
    let kmax = filters.max_k.clone();
    let ng = kmax.len();
    let count: usize = kmax.iter().map(|k| k + 1).product();
    let mut terms = Vec::with_capacity(count);
    let mut k = vec![0usize; ng];
    let dims: Vec<usize> = kmax.iter().map(|k| k + 1).collect();
    for flat in 0..count {
        unflatten(&dims, flat, &mut k);
        let piece = s.from_spectrum(filters.apply(&spec, &k));
        let norm = cubes.l2ul(piece.data());
        let sk: f64 = exps.iter().zip(&k).map(|(e, &kk)| e * kk as f64).sum();
        terms.push(ShellTerm { k: k.clone(), norm, weighted: 2f64.powf(sk) * norm });
    }
    let top = kmax.iter().copied().max().unwrap_or(0);
    let mut increments = vec![0.0; top + 1];
    for t in &terms {
        let l = t.k.iter().copied().max().unwrap_or(0);
        increments[l] += t.weighted;
    }
    let mut partial_sums = Vec::with_capacity(top + 1);
    let mut acc = 0.0;
    for inc in &increments {
        acc += inc;
        partial_sums.push(acc);
    }
    let mut ratios = vec![0.0; top + 1];
    for l in 1..=top {
        let floor = cfg.floor * partial_sums[l];
        ratios[l] = if increments[l] <= floor {
            0.0
        } else if increments[l - 1] > 0.0 {
            increments[l] / increments[l - 1]
        } else {
            f64::INFINITY
        };
    }
    let slopes = (0..ng)
        .map(|g| {
            let along: Vec<f64> = terms.iter().filter(|t| t.k.iter().enumerate().all(|(i, &v)| i == g || v == 0)).map(|t| t.norm).collect();
            decay_slope(&along, cfg.floor)
        })
        .collect();
    Ok(BesovReport {
        schema: 1,
        mode: mode.into(),
        symbol: s.label().into(),
        weight: w.describe(),
        s: exps.to_vec(),
        max_k: kmax,
        margin: cfg.margin,
        terms,
        partial_sums,
        increments,
        ratios,
        slopes,
    })
}

/// Decay slope `-d log2 v_k / dk` over `k >= 1`; values below `floor * v_0` are
/// treated as zero. `None` when fewer than two shells exist, `+inf` when
/// every shell beyond 0 vanishes.
fn decay_slope(v: &[f64], floor: f64) -> Option<f64> {
    if v.len() < 2 {
        return None;
    }
    let cut = floor * v[0].max(f64::MIN_POSITIVE);
    let pts: Vec<(f64, f64)> = v.iter().enumerate().skip(1).filter(|(_, &x)| x > cut).map(|(k, &x)| (k as f64, x.log2())).collect();
    match pts.len() {
        0 => Some(f64::INFINITY),
        1 => {
            // a single surviving shell decays at least as fast as its drop from shell 0
            let (k, l) = pts[0];
            if v[0] > 0.0 {
                Some((v[0].log2() - l) / k)
            } else {
                Some(f64::INFINITY)
            }
        }
        _ => {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            fit_line(&xs, &ys).ok().map(|f| -f.slope)
        }
    }
}

/// Star-form norm: `sum_k 2^{s0 k0 + s1 k1 + s2 k2} ||W^{-1} Delta*_k sigma||_{L^2_ul}`.
pub fn besov_norm_star<T: Real>(s: &SymbolSample<T>, w: &WeightSpec<T>, exps: [f64; 3], cfg: &BesovConfig) -> Result<BesovReport> {
    besov("star", s, w, &exps, star_groups(s.dim()), cfg)
}

/// Vector-form norm with one exponent per axis (`3n` entries).
pub fn besov_norm_vec<T: Real>(s: &SymbolSample<T>, w: &WeightSpec<T>, exps: &[f64], cfg: &BesovConfig) -> Result<BesovReport> {
    besov("vec", s, w, exps, vec_groups(s.dim()), cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub schema: u32,
    pub symbol: String,
    pub weight: String,
    /// Unweighted shell norms along `k0`, `k1`, `k2` with the other indices 0.
    pub values: Vec<Vec<f64>>,
    /// Fitted decay slopes; `inf` when every shell beyond 0 vanishes.
    pub slopes: Vec<Option<f64>>,
    pub orders: Vec<Option<f64>>,
    /// Per axis: `slope >= order - 0.5`, or `None` when no order was asserted.
    pub passed: Vec<Option<bool>>,
}

impl DecayReport {
    pub fn all_passed(&self) -> bool {
        self.passed.iter().all(|p| p.unwrap_or(true))
    }
}

/// Measures shell decay along each of `k0`, `k1`, `k2` for a catalog symbol
/// and compares with the asserted derivative orders.
pub fn derivative_decay_check<T: Real>(
    sigma: &SymbolSpec<T>,
    w: &WeightSpec<T>,
    orders: [Option<f64>; 3],
    x_axis: Grid,
    xi_axis: Grid,
    cfg: &BesovConfig,
) -> Result<DecayReport> {
    if !sigma.is_catalog() {
        return param(format!("symbol {:?} is not a catalog entry; its derivative bounds cannot be verified", sigma.label()));
    }
    let smp = sigma.sample(x_axis, xi_axis)?;
    let cubes = WeightedCubes::new(&smp, w, cfg.margin)?;
    let filters = Filters::new(smp.axes(), star_groups(smp.dim()));
    let spec = smp.spectrum();
    let mut values = Vec::new();
    let mut slopes = Vec::new();
    for g in 0..3 {
        let v: Vec<f64> = (0..=filters.max_k[g])
            .map(|kg| {
                let mut k = [0usize; 3];
                k[g] = kg;
                cubes.l2ul(smp.from_spectrum(filters.apply(&spec, &k)).data())
            })
            .collect();
        slopes.push(decay_slope(&v, cfg.floor));
        values.push(v);
    }
    let passed = orders.iter().zip(&slopes).map(|(o, s)| o.map(|o| s.is_some_and(|s| s >= o - 0.5))).collect();
    Ok(DecayReport { schema: 1, symbol: sigma.label().into(), weight: w.describe(), values, slopes, orders: orders.to_vec(), passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_profile() {
        assert_eq!(lp_phi(0.5f64), 1.0);
        assert_eq!(lp_phi(1.0f64), 1.0);
        assert_eq!(lp_phi(2.0f64), 0.0);
        assert!((lp_phi(1.5f64) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = lp_phi(1.0 + i as f64 / 100.0);
            assert!(v <= prev && v >= 0.0);
            prev = v;
        }
    }

    #[test]
    fn psi_support_and_dilation() {
        for i in 0..400 {
            let r = i as f64 * 0.0125;
            if r <= 1.0 || r >= 4.0 {
                assert_eq!(lp_psi(1, r), 0.0, "r = {r}");
            }
            for k in 0..5 {
                if k >= 1 {
                    assert_eq!(lp_psi(k + 1, 2.0 * r), lp_psi(k, r));
                }
            }
        }
    }

    #[test]
    fn partition_needs_resolution() {
        let g = Grid::new(1, 8, 64).unwrap();
        // Nyquist 4 pi resolves 2^{K+1} = 8 but not 16
        assert!(lp_partition::<f64>(g, 2).is_ok());
        assert!(lp_partition::<f64>(g, 3).is_err());
        assert_eq!(max_shell(g.nyquist::<f64>()), 2);
    }

    #[test]
    fn decay_slope_sentinels() {
        assert_eq!(decay_slope(&[1.0, 0.0, 0.0], 1e-12), Some(f64::INFINITY));
        let s = decay_slope(&[1.0, 0.25, 0.0625, 0.015625], 1e-12).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
        assert_eq!(decay_slope(&[1.0], 1e-12), None);
    }
}
