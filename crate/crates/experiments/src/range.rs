//! Sharpness of the target exponent: lacunary symbol of order `-n/2` tested
//! on dilated annular data.

use std::f64::consts::PI;

use bilab_core::bilinop::apply_xindep;
use bilab_core::fieldgrid::{Grid, GridFunction};
use bilab_core::symbol::SymbolSpec;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{param, ExpError, Result};
use crate::profiles::{range_data, range_outer, Plateau};
use crate::report::{Abscissa, Expectation, GrowthReport};

/// Largest grid the auto-sizer will build.
pub const MAX_POINTS: usize = 1 << 17;

/// Allowed relative drift of `||f_k||_{L^2}` from the continuum value.
pub const DRIFT_TOL: f64 = 1e-6;

/// Samples across the support of the `k = 0` data; fewer makes the Riemann
/// sums for the `L^2` norm drift by more than [`DRIFT_TOL`].
const SAMPLES_PER_BUMP: f64 = 40.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeConfig {
    pub max_k: usize,
    /// Symbol profile `Psi`.
    pub outer: Plateau,
    /// Data profile `psi`.
    pub data: Plateau,
    /// Explicit grid; auto-sized when `None`.
    pub grid: Option<Grid>,
}

impl Default for RangeConfig {
    fn default() -> Self {
        Self { max_k: 5, outer: range_outer(), data: range_data(), grid: None }
    }
}

/// Checks that `Psi(2^{-j} .)` equals 1 on the data support for `j = k` and vanishes for `j != k`.
pub fn check_supports(outer: &Plateau, data: &Plateau) -> Result<()> {
    let eps = 1e-12;
    let (lo, hi) = data.support();
    let (p_lo, p_hi) = outer.plateau();
    let (s_lo, s_hi) = outer.support();
    let r2 = 2f64.sqrt();
    let fail = |m: &str| Err(ExpError::Construction(m.into()));
    if lo <= 0.0 {
        return fail("data profile must vanish near the origin");
    }
    if r2 * lo < p_lo - eps || r2 * hi > p_hi + eps {
        return fail("symbol profile is not 1 on the pair support of the data");
    }
    if r2 * hi > 2.0 * s_lo + eps {
        return fail("the next dyadic piece of the symbol overlaps the data");
    }
    if r2 * lo < s_hi / 2.0 - eps {
        return fail("the previous dyadic piece of the symbol overlaps the data");
    }
    Ok(())
}

/// `sum_{j >= 0} 2^{-j/2} Psi(2^{-j} |zeta|)`.
pub fn lacunary_symbol(outer: Plateau) -> Result<SymbolSpec<f64>> {
    Ok(SymbolSpec::xindep(1, "lacunary order -1/2", move |a: &[f64], b: &[f64]| {
        let rho = a[0].hypot(b[0]);
        if rho == 0.0 {
            return Complex::new(0.0, 0.0);
        }
        let j0 = (rho / outer.d).log2().floor().max(0.0) as i32;
        let j1 = (rho / outer.a).log2().ceil() as i32;
        let mut s = 0.0;
        for j in j0..=j1 {
            let t = 2f64.powi(-j);
            s += t.sqrt() * outer.eval(t * rho);
        }
        Complex::new(s, 0.0)
    })?)
}

/// Grid and (possibly truncated) schedule length for the configuration.
pub fn auto_grid(cfg: &RangeConfig) -> Result<(Grid, usize, Vec<String>)> {
    let (lo, hi) = cfg.data.support();
    let mut notes = Vec::new();
    let width_l = (SAMPLES_PER_BUMP * PI / (hi - lo)).max(1.0);
    let mut k = cfg.max_k;
    loop {
        // products reach twice the data band; keep them below Nyquist
        let band = 2.0 * 2f64.powi(k as i32) * hi;
        let per_unit = (band / PI).log2().ceil().max(0.0) as u32;
        let l = (width_l.max(2f64.powi(k as i32 + 2))).log2().ceil() as u32;
        let points = 2usize << (l + per_unit);
        if points <= MAX_POINTS {
            if k < cfg.max_k {
                notes.push(format!("schedule truncated from K = {} to K = {k}: grid cap of {MAX_POINTS} points", cfg.max_k));
            }
            return Ok((Grid::new(1, 1 << l, points)?, k, notes));
        }
        if k == 3 {
            return Err(ExpError::Lab(bilab_core::LabError::Resource(format!(
                "even K = 3 needs more than {MAX_POINTS} grid points"
            ))));
        }
        k -= 1;
    }
}

struct Construction {
    grid: Grid,
    max_k: usize,
    data_norms: Vec<f64>,
    reference_norm: f64,
    outputs: Vec<GridFunction<f64>>,
    notes: Vec<String>,
}

fn construct(cfg: &RangeConfig) -> Result<Construction> {
    check_supports(&cfg.outer, &cfg.data)?;
    let (grid, max_k, mut notes) = match cfg.grid {
        Some(g) => {
            if g.dim() != 1 {
                return param("the range experiment runs in one dimension");
            }
            (g, cfg.max_k, Vec::new())
        }
        None => auto_grid(cfg)?,
    };
    if max_k < 3 {
        return param("K must be at least 3 for a four-point fit");
    }
    let hi = cfg.data.support().1;
    if 2f64.powi(max_k as i32) * hi >= grid.nyquist::<f64>() {
        return param(format!("data at K = {max_k} exceeds the grid Nyquist frequency {}", grid.nyquist::<f64>()));
    }
    let sigma = lacunary_symbol(cfg.outer)?;
    let reference_norm = (cfg.data.line_integral(2) / (2.0 * PI)).sqrt();
    let mut data_norms = Vec::new();
    let mut outputs = Vec::new();
    for k in 0..=max_k {
        let s = 2f64.powi(-(k as i32));
        let data = cfg.data;
        let fh = GridFunction::from_spectrum_fn(grid, |xi: &[f64]| Complex::new(s.sqrt() * data.eval(s * xi[0].abs()), 0.0));
        data_norms.push(fh.grid_ift()?.lr_norm(2.0)?);
        let out = apply_xindep(&sigma, &fh, &fh)?;
        if out.wraparound_warning() {
            notes.push(format!("k = {k}: output reaches the periodic boundary"));
        }
        outputs.push(out);
    }
    let drift = data_norms.iter().map(|v| (v / reference_norm - 1.0).abs()).fold(0.0, f64::max);
    if drift > DRIFT_TOL {
        notes.push(format!("data norm drift {drift:.2e} exceeds {DRIFT_TOL:e}; refine the frequency step"));
    }
    Ok(Construction { grid, max_k, data_norms, reference_norm, outputs, notes })
}

/// Runs the construction once and measures `||T_sigma(f_k, f_k)||_{L^r}` for each `r`.
pub fn exp_range_multi(rs: &[f64], cfg: &RangeConfig) -> Result<Vec<GrowthReport>> {
    if let Some(r) = rs.iter().find(|r| !(**r >= 1.0 && **r <= 2.0)) {
        return param(format!("r must lie in [1, 2], got {r}"));
    }
    let c = construct(cfg)?;
    let schedule: Vec<f64> = (0..=c.max_k).map(|k| k as f64).collect();
    let mut reports = Vec::new();
    for &r in rs {
        let values = c.outputs.iter().map(|o| o.lr_norm(r)).collect::<std::result::Result<Vec<f64>, _>>()?;
        let predicted = 0.5 - 1.0 / r;
        let mut rep = GrowthReport::build(
            format!("range r={r}"),
            "k",
            Abscissa::Index,
            schedule.clone(),
            values,
            predicted,
            Expectation::Near { target: predicted, tol: 0.1 },
        )?;
        rep.grid = Some(c.grid);
        rep.push_aux("data_norm", c.data_norms.clone());
        rep.push_aux("reference_norm", vec![c.reference_norm; c.data_norms.len()]);
        rep.notes = c.notes.clone();
        reports.push(rep);
    }
    Ok(reports)
}

pub fn exp_range(r: f64, cfg: &RangeConfig) -> Result<GrowthReport> {
    Ok(exp_range_multi(&[r], cfg)?.remove(0))
}

/// Largest relative drift of the data norms recorded in a range report.
pub fn data_norm_drift(rep: &GrowthReport) -> Option<f64> {
    let d = rep.aux("data_norm")?;
    let r = rep.aux("reference_norm")?.first()?;
    Some(d.iter().map(|v| (v / r - 1.0).abs()).fold(0.0, f64::max))
}

