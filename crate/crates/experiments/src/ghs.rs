//! Dyadic decomposition `sigma = sum_k psi_k(D) sigma` of x-independent symbols.

use bilab_core::bilinop::{apply_xindep, TargetNorm};
use bilab_core::fieldgrid::{fft_axes, signed_index, Grid, GridFunction};
use bilab_core::fit::fit_line;
use bilab_core::lpcalc::{lp_psi, max_shell};
use bilab_core::symbol::SymbolSpec;
use bilab_core::trilinear::{derive_seed, DEFAULT_SEED};
use num_complex::Complex;
use serde::Serialize;

use crate::error::{param, ExpError, Result};

type C = Complex<f64>;

/// Increment ratio the per-piece surrogates must stay below beyond [`CAUCHY_FROM`].
pub const CAUCHY_RATIO: f64 = 0.8;
pub const CAUCHY_FROM: usize = 3;

/// Surrogates below this fraction of the partial sum are at round-off level;
/// their increment ratios are not reported.
pub const SURROGATE_FLOOR: f64 = 1e-12;

/// Symbols with a known closed form for `V = sup_x |sigma|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GhsSymbol {
    /// `<(xi1, xi2)>^m`, `m < 0`.
    BracketPower { m: f64 },
    /// `exp(-|(xi1, xi2)|^2 / 2)`.
    Gaussian,
}

impl GhsSymbol {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "gaussian" {
            return Ok(GhsSymbol::Gaussian);
        }
        if let Some(m) = s.strip_prefix("bracket-power:") {
            let m: f64 = m.trim().parse().map_err(|_| ExpError::Parameter(format!("bad exponent in {s:?}")))?;
            return Ok(GhsSymbol::BracketPower { m });
        }
        param(format!("unknown decomposition symbol {s:?}; expected bracket-power:<m> or gaussian"))
    }

    pub fn describe(&self) -> String {
        match self {
            GhsSymbol::BracketPower { m } => format!("bracket-power:{m}"),
            GhsSymbol::Gaussian => "gaussian".into(),
        }
    }

    pub fn symbol(&self) -> Result<SymbolSpec<f64>> {
        Ok(match *self {
            GhsSymbol::BracketPower { m } => SymbolSpec::bracket_power(1, m)?,
            GhsSymbol::Gaussian => SymbolSpec::gaussian(1)?,
        })
    }

    /// `V` lies in `L^q(R^{2n})` exactly for `q` above this value.
    pub fn lq_threshold(&self, n: usize) -> f64 {
        match *self {
            GhsSymbol::BracketPower { m } if m < 0.0 => 2.0 * n as f64 / -m,
            GhsSymbol::BracketPower { .. } => f64::INFINITY,
            GhsSymbol::Gaussian => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhsConfig {
    pub q: f64,
    pub grid: Grid,
    /// Band of the random test functions.
    pub band: f64,
    pub trials: usize,
    pub seed: u64,
    /// Decay exponent `N` of the kernel `2^{2kn} (1 + 2^k|.|)^{-N}` in `V_k`.
    pub kernel_exponent: f64,
}

impl Default for GhsConfig {
    fn default() -> Self {
        Self {
            q: 3.6,
            grid: Grid::new(1, 128, 2048).expect("default grid is valid"),
            band: 8.0,
            trials: 8,
            seed: DEFAULT_SEED,
            kernel_exponent: 6.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhsReport {
    pub schema: u32,
    pub symbol: String,
    pub q: f64,
    pub lq_threshold: f64,
    pub grid: Grid,
    pub max_k: usize,
    /// `sup |sigma_k|` over the inner half of the frequency box.
    pub sup_norms: Vec<f64>,
    /// Fitted log2 slope of `sup |sigma_k|` in `k` over `k >= 1` above round-off;
    /// `None` when fewer than two such pieces remain.
    pub decay_slope: Option<f64>,
    /// `sup |sigma_k| / V_k` per piece.
    pub vk_ratios: Vec<f64>,
    /// Smallest `C` with `|sigma_k| <= C V_k` for all pieces.
    pub vk_constant: f64,
    /// Per-piece max over trials of `||T_{sigma_k}(f1, f2)||_{(L^2, l^1)} / (||f1|| ||f2||)`.
    pub surrogates: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `surrogate_k / surrogate_{k-1}`; `None` at round-off level.
    pub increment_ratios: Vec<Option<f64>>,
    /// Increment ratios beyond shell 3 stay below 0.8.
    pub cauchy: bool,
    /// `max |sigma - sum_k sigma_k|` over the inner half of the frequency box.
    pub reconstruction_error: f64,
    pub band: f64,
    pub trials: usize,
    pub kernel_exponent: f64,
    pub seeds: Vec<[u64; 2]>,
    pub notes: Vec<String>,
}

/// `sigma_k = psi_k(D) sigma` for a frequency-pair table on `grid` (index `m1 * N + m2`),
/// filtering the 2-axis spectrum radially. Returns the pieces for `k <= K`,
/// `K = max_shell` of the dual Nyquist radius.
pub fn dyadic_pieces(grid: &Grid, values: &[C]) -> Result<Vec<Vec<C>>> {
    if grid.dim() != 1 {
        return param("dyadic pieces are implemented for n = 1");
    }
    let n = grid.points();
    if values.len() != n * n {
        return Err(bilab_core::LabError::Dimension { expected: n * n, got: values.len() }.into());
    }
    let h = grid.step::<f64>();
    let max_k = max_shell(grid.half_width() as f64);
    let mut spec = values.to_vec();
    fft_axes(&mut spec, &[n, n], &[true, true], false);
    let dual: Vec<f64> = (0..n).map(|p| signed_index(p, n) as f64 * h).collect();
    let scale = 1.0 / (n * n) as f64;
    let mut pieces = Vec::with_capacity(max_k + 1);
    for k in 0..=max_k {
        let mut piece: Vec<C> = spec
            .iter()
            .enumerate()
            .map(|(i, v)| v * (lp_psi(k, dual[i / n].hypot(dual[i % n])) * scale))
            .collect();
        fft_axes(&mut piece, &[n, n], &[true, true], true);
        pieces.push(piece);
    }
    Ok(pieces)
}

/// Samples an x-independent symbol on the frequency pairs of `grid` (index `m1 * N + m2`).
pub fn symbol_table(grid: &Grid, sigma: &SymbolSpec<f64>) -> Result<Vec<C>> {
    let n = grid.points();
    let xi: Vec<f64> = (0..n).map(|m| grid.freq(m)).collect();
    (0..n * n).map(|i| Ok(sigma.eval(&[0.0], &[xi[i / n]], &[xi[i % n]])?)).collect()
}

fn inner_mask(grid: &Grid) -> Vec<bool> {
    let n = grid.points();
    let half = grid.nyquist::<f64>() / 2.0;
    let inner: Vec<bool> = (0..n).map(|m| grid.freq::<f64>(m).abs() <= half).collect();
    (0..n * n).map(|i| inner[i / n] && inner[i % n]).collect()
}

/// `V_k = V * 2^{2k} (1 + 2^k |z1| + 2^k |z2|)^{-N}` as a periodic Riemann sum.
fn smoothed_weight(grid: &Grid, v_hat: &[C], k: usize, exponent: f64) -> Vec<f64> {
    let n = grid.points();
    let d = grid.freq_step::<f64>();
    let s = 2f64.powi(k as i32);
    let off: Vec<f64> = (0..n).map(|m| signed_index(m, n) as f64 * d * s).collect();
    let mut ker: Vec<C> = (0..n * n)
        .map(|i| C::new(s * s * (1.0 + off[i / n].abs() + off[i % n].abs()).powf(-exponent) * d * d, 0.0))
        .collect();
    fft_axes(&mut ker, &[n, n], &[true, true], false);
    ker.iter_mut().zip(v_hat).for_each(|(a, b)| *a *= b);
    fft_axes(&mut ker, &[n, n], &[true, true], true);
    let scale = 1.0 / (n * n) as f64;
    ker.iter().map(|v| v.re * scale).collect()
}

pub fn exp_ghs(sym: GhsSymbol, cfg: &GhsConfig) -> Result<GhsReport> {
    if cfg.q >= 4.0 {
        return Err(ExpError::Refused(format!("the dyadic decay argument needs q < 4, got {}", cfg.q)));
    }
    let threshold = sym.lq_threshold(1);
    if !(cfg.q > threshold) {
        return param(format!("V = |{}| is not in L^q for q = {} (needs q > {threshold})", sym.describe(), cfg.q));
    }
    if cfg.trials < 1 {
        return param("at least one trial is needed");
    }
    let grid = cfg.grid;
    let sigma = sym.symbol()?;
    let values = symbol_table(&grid, &sigma)?;
    let pieces = dyadic_pieces(&grid, &values)?;
    let max_k = pieces.len() - 1;
    let mask = inner_mask(&grid);
    let mut notes = Vec::new();

    let mut recon = vec![C::new(0.0, 0.0); values.len()];
    for p in &pieces {
        recon.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    let reconstruction_error =
        recon.iter().zip(&values).zip(&mask).filter(|(_, &m)| m).map(|((a, b), _)| (a - b).norm()).fold(0.0, f64::max);

    let mut v_hat: Vec<C> = values.iter().map(|v| C::new(v.norm(), 0.0)).collect();
    fft_axes(&mut v_hat, &[grid.points(), grid.points()], &[true, true], false);

    let seeds: Vec<[u64; 2]> =
        (0..cfg.trials).map(|t| [derive_seed(cfg.seed, 0, 2 * t as u64), derive_seed(cfg.seed, 0, 2 * t as u64 + 1)]).collect();
    let inputs = seeds
        .iter()
        .map(|s| Ok((GridFunction::random_band_limited(grid, cfg.band, s[0])?, GridFunction::random_band_limited(grid, cfg.band, s[1])?)))
        .collect::<Result<Vec<_>>>()?;
    let target = TargetNorm::Amalgam(vec![1.0]);

    let mut sup_norms = Vec::new();
    let mut vk_ratios = Vec::new();
    let mut surrogates = Vec::new();
    for (k, p) in pieces.into_iter().enumerate() {
        let vk = smoothed_weight(&grid, &v_hat, k, cfg.kernel_exponent);
        let mut sup = 0f64;
        let mut ratio = 0f64;
        for i in (0..p.len()).filter(|&i| mask[i]) {
            sup = sup.max(p[i].norm());
            ratio = ratio.max(p[i].norm() / vk[i]);
        }
        sup_norms.push(sup);
        vk_ratios.push(ratio);
        let sk = SymbolSpec::table(grid, p, format!("{} piece {k}", sym.describe()))?;
        let mut best = 0f64;
        for (f1, f2) in &inputs {
            let out = apply_xindep(&sk, f1, f2)?;
            best = best.max(target.eval(&out)? / (f1.lr_norm(2.0)? * f2.lr_norm(2.0)?));
        }
        surrogates.push(best);
    }
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    for s in &surrogates {
        acc += s;
        partial_sums.push(acc);
    }
    let increment_ratios: Vec<Option<f64>> = (0..=max_k)
        .map(|k| {
            if k == 0 || surrogates[k - 1] <= SURROGATE_FLOOR * partial_sums[k] {
                None
            } else {
                Some(surrogates[k] / surrogates[k - 1])
            }
        })
        .collect();
    let cauchy = increment_ratios.iter().skip(CAUCHY_FROM + 1).flatten().all(|&r| r <= CAUCHY_RATIO);
    if max_k <= CAUCHY_FROM {
        notes.push(format!("only {max_k} shells resolved; the increment test beyond shell {CAUCHY_FROM} is empty"));
    }
    let floor = SURROGATE_FLOOR * sup_norms[0];
    let decaying: Vec<(f64, f64)> =
        sup_norms.iter().enumerate().skip(1).filter(|(_, &v)| v > floor).map(|(k, &v)| (k as f64, v.log2())).collect();
    let decay_slope = if decaying.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = decaying.into_iter().unzip();
        Some(fit_line(&xs, &ys)?.slope)
    } else {
        None
    };
    let vk_constant = vk_ratios.iter().cloned().fold(0.0, f64::max);
    Ok(GhsReport {
        schema: 1,
        symbol: sym.describe(),
        q: cfg.q,
        lq_threshold: threshold,
        grid,
        max_k,
        sup_norms,
        decay_slope,
        vk_ratios,
        vk_constant,
        surrogates,
        partial_sums,
        increment_ratios,
        cauchy,
        reconstruction_error,
        band: cfg.band,
        trials: cfg.trials,
        kernel_exponent: cfg.kernel_exponent,
        seeds,
        notes,
    })
}
