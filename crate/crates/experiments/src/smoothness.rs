//! Sharpness of the smoothness exponents `s0`, `s1` and `s1 + s2`.

use std::f64::consts::PI;

use bilab_core::bilinop::apply_general;
use bilab_core::fieldgrid::{Grid, GridFunction};
use bilab_core::lpcalc::lp_phi;
use bilab_core::symbol::SymbolSpec;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{param, Result};
use crate::profiles::{annulus, simpson};
use crate::report::{Abscissa, Expectation, GrowthReport, Outcome};

type C = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "lowercase")]
pub enum SmoothnessCase {
    S0 { s0: f64 },
    S1 { s1: f64 },
    S1S2 { s1: f64, s2: f64 },
}

impl SmoothnessCase {
    fn check(&self) -> Result<()> {
        let ok = match *self {
            SmoothnessCase::S0 { s0 } => s0 >= 0.0,
            SmoothnessCase::S1 { s1 } => s1 >= 0.0,
            SmoothnessCase::S1S2 { s1, s2 } => s1 >= 0.0 && s2 >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            param(format!("smoothness parameters must be nonnegative: {self:?}"))
        }
    }
}

/// Fewest frequency samples across the narrowest data bump.
const MIN_BUMP_SAMPLES: f64 = 8.0;

pub fn exp_smoothness(case: SmoothnessCase, r: f64, max_j: usize) -> Result<GrowthReport> {
    case.check()?;
    if !(1.0..=2.0).contains(&r) {
        return param(format!("r must lie in [1, 2], got {r}"));
    }
    if max_j < 3 {
        return param("J must be at least 3 for a four-point fit");
    }
    match case {
        SmoothnessCase::S0 { s0 } => case_s0(s0, r, max_j),
        SmoothnessCase::S1 { s1 } => case_s1(s1, r, max_j),
        SmoothnessCase::S1S2 { s1, s2 } => case_s1s2(s1 + s2, r, max_j),
    }
}

fn norms(sigma: &SymbolSpec<f64>, pairs: &[(GridFunction<f64>, GridFunction<f64>)], r: f64, notes: &mut Vec<String>) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (j, (a, b)) in pairs.iter().enumerate() {
        let t = apply_general(sigma, a, b)?;
        if t.wraparound_warning() {
            notes.push(format!("j = {j}: output reaches the periodic boundary"));
        }
        out.push(t.lr_norm(r)?);
    }
    Ok(out)
}

/// `phi(x) e^{-ix(xi1+xi2)} <(xi1, xi2)>^{-s0-1/2}` on data `2^{-j/2} theta(2^{-j} eta)`.
fn case_s0(s0: f64, r: f64, max_j: usize) -> Result<GrowthReport> {
    let theta = annulus();
    let top = 2f64.powi(max_j as i32) * theta.d;
    // smallest power-of-two sampling rate whose Nyquist frequency clears the data
    let per_unit = 1usize << ((top / PI).log2().floor().max(0.0) as u32 + 1);
    let grid = Grid::new(1, 16, 32 * per_unit)?;
    let e = -(s0 + 0.5) / 2.0;
    let sigma = SymbolSpec::general(1, format!("phi(x) e^(-ix(xi1+xi2)) <xi>^{}", -s0 - 0.5), move |x: &[f64], a: &[f64], b: &[f64]| {
        let p = -x[0] * (a[0] + b[0]);
        C::new(p.cos(), p.sin()) * (lp_phi(x[0].abs()) * (1.0 + a[0] * a[0] + b[0] * b[0]).powf(e))
    })?;
    let pairs: Vec<_> = (0..=max_j)
        .map(|j| {
            let s = 2f64.powi(-(j as i32));
            let f = GridFunction::from_spectrum_fn(grid, |xi: &[f64]| C::new(s.sqrt() * theta.eval(s * xi[0].abs()), 0.0));
            (f.clone(), f)
        })
        .collect();
    let mut notes = Vec::new();
    let values = norms(&sigma, &pairs, r, &mut notes)?;
    let predicted = 0.5 - s0;
    let mut rep = GrowthReport::build(
        format!("smoothness s0={s0} r={r}"),
        "j",
        Abscissa::Index,
        (0..=max_j).map(|j| j as f64).collect(),
        values,
        predicted,
        Expectation::Near { target: predicted, tol: 0.1 },
    )?;
    rep.grid = Some(grid);
    rep.notes = notes;
    Ok(rep)
}

/// `<x>^{-s1} e^{-ix xi1} phi(xi1) phi(xi2)` on `f1^ = phi`, `f2^ = 2^{j/2} phi(2^j .)`.
fn case_s1(s1: f64, r: f64, max_j: usize) -> Result<GrowthReport> {
    let grid = Grid::new(1, 128, 512)?;
    let narrow = 2.0 * 2f64.powi(1 - max_j as i32);
    if narrow / grid.freq_step::<f64>() < MIN_BUMP_SAMPLES {
        return param(format!("J = {max_j} leaves fewer than {MIN_BUMP_SAMPLES} samples across the narrowest data"));
    }
    let sigma = SymbolSpec::general(1, format!("<x>^{} e^(-ix xi1) phi(xi1) phi(xi2)", -s1), move |x: &[f64], a: &[f64], b: &[f64]| {
        let p = -x[0] * a[0];
        C::new(p.cos(), p.sin()) * ((1.0 + x[0] * x[0]).powf(-s1 / 2.0) * lp_phi(a[0].abs()) * lp_phi(b[0].abs()))
    })?;
    let f1 = GridFunction::from_spectrum_fn(grid, |xi: &[f64]| C::new(lp_phi(xi[0].abs()), 0.0));
    let pairs: Vec<_> = (0..=max_j)
        .map(|j| {
            let s = 2f64.powi(j as i32);
            (f1.clone(), GridFunction::from_spectrum_fn(grid, |xi: &[f64]| C::new(s.sqrt() * lp_phi(s * xi[0].abs()), 0.0)))
        })
        .collect();
    let mut notes = Vec::new();
    let values = norms(&sigma, &pairs, r, &mut notes)?;
    let predicted = -s1 + 1.0 / r - 0.5;
    let mut rep = GrowthReport::build(
        format!("smoothness s1={s1} r={r}"),
        "j",
        Abscissa::Index,
        (0..=max_j).map(|j| j as f64).collect(),
        values,
        predicted,
        Expectation::Near { target: predicted, tol: 0.1 },
    )?;
    rep.grid = Some(grid);
    rep.notes = notes;
    Ok(rep)
}

/// `int_{X <= |x| <= 2X} <x>^{-p} dx` by composite Simpson.
fn shell_integral(x: f64, p: f64) -> f64 {
    2.0 * simpson(|t| (1.0 + t * t).powf(-p / 2.0), x, 2.0 * x, 4096)
}

/// Max abs error of `T_sigma(f, f) = <x>^{-a} c^2` with `f^ = phi` on a small grid,
/// where `c = (2 pi)^{-1} sum phi^2 dxi` is the grid quadrature of `int phi^2`.
pub fn s1s2_operator_check(a: f64) -> Result<f64> {
    let grid = Grid::new(1, 16, 256)?;
    let sigma = SymbolSpec::general(1, format!("<x>^{} e^(-ix(xi1+xi2)) phi phi", -a), move |x: &[f64], u: &[f64], v: &[f64]| {
        let p = -x[0] * (u[0] + v[0]);
        C::new(p.cos(), p.sin()) * ((1.0 + x[0] * x[0]).powf(-a / 2.0) * lp_phi(u[0].abs()) * lp_phi(v[0].abs()))
    })?;
    let f = GridFunction::from_spectrum_fn(grid, |xi: &[f64]| C::new(lp_phi(xi[0].abs()), 0.0));
    let t = apply_general(&sigma, &f, &f)?;
    let c: f64 = f.data().iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.freq_step::<f64>() / (2.0 * PI);
    let expect = GridFunction::from_real_fn(grid, |x: &[f64]| (1.0 + x[0] * x[0]).powf(-a / 2.0) * c * c);
    Ok(t.max_abs_diff(&expect)?)
}

/// Integrability of `<x>^{-(s1+s2)}` in `L^r` from the log2 slope of its dyadic shell integrals.
fn case_s1s2(a: f64, r: f64, max_j: usize) -> Result<GrowthReport> {
    let schedule: Vec<f64> = (0..=max_j).map(|j| 2f64.powi(j as i32 + 3)).collect();
    let values: Vec<f64> = schedule.iter().map(|&x| shell_integral(x, a * r)).collect();
    let predicted = 1.0 - r * a;
    let borderline = (r * a - 1.0).abs() < 1e-12;
    let mut rep = GrowthReport::build(
        format!("smoothness s1+s2={a} r={r}"),
        "X",
        Abscissa::Log2,
        schedule,
        values,
        predicted,
        Expectation::Near { target: predicted, tol: 0.1 },
    )?;
    let err = s1s2_operator_check(a)?;
    rep.notes.push(format!("operator identity T = <x>^-a c^2 holds to {err:.1e} on a 256-point grid"));
    if borderline {
        rep.outcome = Outcome::Borderline;
        rep.notes.push("r (s1 + s2) = n: the shell integrals neither grow nor decay; no verdict".into());
    } else if rep.slope < 0.0 {
        rep.notes.push("shell integrals decay geometrically: the L^r norm is finite".into());
    } else {
        rep.notes.push("shell integrals do not decay: the L^r norm diverges".into());
    }
    Ok(rep)
}
