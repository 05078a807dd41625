//! The acceptance suite: one deterministic check per criterion.
//!
//! Tolerances are pinned here. A criterion whose target cannot be met is
//! still evaluated as stated and listed in [`KNOWN_DEVIATIONS`].

use std::f64::consts::PI;
use std::time::Instant;

use bilab_core::bilinop::{apply_general, apply_xindep, op_ratio_sweep, quadrature_oracle, TargetNorm};
use bilab_core::fieldgrid::{Domain, Grid, GridFunction};
use bilab_core::lattice::{IndexBox, SeqFunction, SeqNorm};
use bilab_core::lpcalc::{besov_norm_star, besov_norm_vec, delta_star, lp_partition, lp_psi, BesovConfig};
use bilab_core::symbol::{SymbolSample, SymbolSpec};
use bilab_core::trilinear::{certify_weight, form_norm_alt, form_norm_oracle, CertifyPolicy, FormNormConfig};
use bilab_core::weights::{moderate_check, parse_weight, v_star, FactorSlot, ModerateConfig, PointFn, Profile, Transform, VStar, WeightSpec};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::ghs::{dyadic_pieces, exp_ghs, GhsConfig, GhsSymbol, CAUCHY_FROM, CAUCHY_RATIO};
use crate::random_sign::{exp_random_sign, RandomSignConfig, AGREEMENT_FACTOR};
use crate::range::{exp_range_multi, RangeConfig};
use crate::smoothness::{exp_smoothness, SmoothnessCase};

type C = Complex<f64>;

pub const CRITERIA: &[(usize, &str)] = &[
    (1, "oracle equivalence of the alternating form norm"),
    (2, "l2 characterization of factor weights"),
    (3, "criticality exponents of catalog weights"),
    (4, "change-of-variables invariance"),
    (5, "operator identities"),
    (6, "sharpness of the target exponent"),
    (7, "sharpness of the smoothness exponents"),
    (8, "random-sign necessity"),
    (9, "boundedness sweep for the critical sum weight"),
    (10, "Littlewood-Paley identities"),
    (11, "moderate class"),
    (12, "dyadic decomposition of symbols"),
    (13, "function-space embeddings"),
];

/// Criteria whose stated target is not met, with the measured reason.
pub const KNOWN_DEVIATIONS: &[(usize, &str)] = &[
    (
        3,
        "split(-1/4,-1/4) fits slope ~0.14 on radii 4..32; the growth is a finite-radius transient that flattens on 32..256",
    ),
    (
        6,
        "for r = 1 the construction gives ||T|| = 2^{k(1/2-1/r)} ||psi^2||_1, slope -0.5, not +0.5",
    ),
];

pub fn known_deviation(id: usize) -> Option<&'static str> {
    KNOWN_DEVIATIONS.iter().find(|(i, _)| *i == id).map(|(_, s)| *s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: String,
    pub passed: bool,
    /// One line per sub-check.
    pub details: Vec<String>,
    pub seconds: f64,
}

#[derive(Default)]
struct Checks {
    ok: bool,
    lines: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self { ok: true, lines: Vec::new() }
    }

    fn check(&mut self, cond: bool, line: String) {
        self.ok &= cond;
        self.lines.push(format!("[{}] {line}", if cond { "ok" } else { "FAIL" }));
    }
}

pub fn run_criterion(id: usize) -> Option<CriterionResult> {
    let title = CRITERIA.iter().find(|(i, _)| *i == id)?.1;
    let start = Instant::now();
    let mut c = Checks::new();
    let res = match id {
        1 => c1(&mut c),
        2 => c2(&mut c),
        3 => c3(&mut c),
        4 => c4(&mut c),
        5 => c5(&mut c),
        6 => c6(&mut c),
        7 => c7(&mut c),
        8 => c8(&mut c),
        9 => c9(&mut c),
        10 => c10(&mut c),
        11 => c11(&mut c),
        12 => c12(&mut c),
        13 => c13(&mut c),
        _ => unreachable!(),
    };
    if let Err(e) = res {
        c.check(false, format!("error: {e}"));
    }
    Some(CriterionResult { id, title: title.into(), passed: c.ok, details: c.lines, seconds: start.elapsed().as_secs_f64() })
}

/// Runs the selected criteria (all when `ids` is empty) in order.
pub fn run_all(ids: &[usize]) -> Vec<CriterionResult> {
    CRITERIA.iter().filter(|(i, _)| ids.is_empty() || ids.contains(i)).filter_map(|(i, _)| run_criterion(*i)).collect()
}

fn table_weight(entries: Vec<(Vec<i64>, f64)>) -> Result<WeightSpec<f64>> {
    Ok(WeightSpec::table(SeqFunction::nonnegative(2, entries)?)?)
}

/// Random nonnegative table on `{-r..r}^2` with roughly `density` of the points present.
fn random_table(rng: &mut ChaCha8Rng, r: i64, density: f64) -> Result<WeightSpec<f64>> {
    let mut entries = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            if rng.random::<f64>() < density {
                entries.push((vec![a, b], rng.random_range(0.1..2.0)));
            }
        }
    }
    if entries.is_empty() {
        entries.push((vec![0, 0], 1.0));
    }
    table_weight(entries)
}

fn c1(c: &mut Checks) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bx = IndexBox::new(1, 2)?;
    for i in 0..10 {
        let v = random_table(&mut rng, 2, if i < 5 { 0.3 } else { 0.8 })?;
        let oracle = form_norm_oracle(&v, &bx)?;
        let alt = form_norm_alt(&v, &bx, &FormNormConfig::default())?.value;
        let rel = (alt - oracle).abs() / oracle;
        c.check(rel <= 1e-3, format!("weight {i}: alternating {alt:.6} oracle {oracle:.6} rel {rel:.1e}"));
    }
    Ok(())
}

fn c2(c: &mut Checks) -> Result<()> {
    let profiles: [&[(i64, f64)]; 5] = [
        &[(0, 1.0)],
        &[(0, 1.0), (1, 2.0), (-2, 0.5)],
        &[(-3, 0.3), (0, 0.1), (2, 1.7), (3, 0.2)],
        &[(-1, 1.0), (1, 1.0)],
        &[(-4, 0.9), (-2, 0.4), (0, 1.3), (1, 0.6), (4, 2.2)],
    ];
    for prof in profiles {
        let v0 = SeqFunction::nonnegative(1, prof.iter().map(|&(k, x)| (vec![k], x)))?;
        let expect = v0.norm(SeqNorm::Lp(2.0))?;
        let v = WeightSpec::factor(1, FactorSlot::Left, Profile::Table(v0))?;
        let est = form_norm_alt(&v, &IndexBox::new(1, 64)?, &FormNormConfig::default())?.value;
        let rel = (est - expect).abs() / expect;
        c.check(rel <= 1e-2, format!("{}: estimate {est:.6} l2 {expect:.6} rel {rel:.1e}", v.describe()));
    }
    Ok(())
}

fn c3(c: &mut Checks) -> Result<()> {
    let radii = [4, 8, 16, 32];
    let policy = CertifyPolicy::default();
    let cases: [(&str, Option<f64>, f64); 5] = [
        ("const:1", Some(0.5), 0.1),
        ("sum-power:-0.5", None, 0.1),
        ("split:-0.25,-0.25", None, 0.1),
        ("split:0,-0.5", Some(0.25), 0.1),
        ("left:-0.25", Some(0.25), 0.1),
    ];
    for (spec, target, tol) in cases {
        let v: WeightSpec<f64> = parse_weight(spec)?;
        let cert = certify_weight(&v, &radii, &policy)?;
        let (ok, want) = match target {
            Some(t) => ((cert.slope - t).abs() <= tol, format!("{t} +- {tol}")),
            None => (cert.slope <= tol, format!("<= {tol}")),
        };
        c.check(ok, format!("{spec}: slope {:.4} (want {want}), verdict {}", cert.slope, cert.verdict));
    }
    Ok(())
}

fn c4(c: &mut Checks) -> Result<()> {
    // supports small enough that both transformed copies stay inside the oracle box
    let weights = [
        vec![(vec![0, 0], 1.0), (vec![1, -1], 0.5), (vec![-1, 0], 0.8), (vec![0, 1], 0.3)],
        vec![(vec![0, 0], 1.0), (vec![1, 0], 1.0), (vec![0, 1], 1.0)],
        vec![(vec![1, 1], 2.0), (vec![-1, 0], 0.7)],
        vec![(vec![0, -1], 0.4), (vec![1, 0], 1.1), (vec![-1, 1], 0.9), (vec![0, 0], 0.2)],
        vec![(vec![1, -1], 1.0), (vec![-1, 1], 1.0), (vec![0, 0], 0.5), (vec![1, 0], 0.25)],
    ];
    let bx = IndexBox::new(1, 2)?;
    for (i, e) in weights.into_iter().enumerate() {
        let v = table_weight(e)?;
        let base = form_norm_oracle(&v, &bx)?;
        for t in [Transform::SumNegSecond, Transform::NegFirstSum] {
            let other = form_norm_oracle(&v.clone().transformed(t), &bx)?;
            let rel = (other - base).abs() / base;
            c.check(rel <= 1e-3, format!("weight {i} {t:?}: {other:.6} vs {base:.6}"));
        }
    }
    Ok(())
}

fn multiplier(f: &GridFunction<f64>, m: impl Fn(f64) -> C) -> Result<GridFunction<f64>> {
    let fh = f.grid_ft()?;
    let g = *fh.grid();
    let data = fh.data().iter().enumerate().map(|(i, &v)| v * m(g.freq(i))).collect();
    Ok(GridFunction::from_samples(g, Domain::Frequency, data)?.grid_ift()?)
}

fn c5(c: &mut Checks) -> Result<()> {
    let g = Grid::new(1, 16, 512)?;
    let gauss = GridFunction::from_real_fn(g, |x: &[f64]| (-x[0] * x[0] / 2.0).exp());
    let shifted = GridFunction::from_real_fn(g, |x: &[f64]| (-(x[0] - 1.0).powi(2)).exp());
    let t = apply_xindep(&SymbolSpec::constant(1, 1.0)?, &gauss, &shifted)?;
    let err = t.max_abs_diff(&gauss.zip_with(&shifted, |a, b| a * b)?)?;
    c.check(err <= 1e-8, format!("constant symbol vs pointwise product: {err:.1e}"));

    let m1 = |xi: f64| C::new(1.0 / (1.0 + xi * xi), 0.0);
    let m2 = |xi: f64| C::new(0.0, xi);
    let sep = SymbolSpec::separable(1, "sep", move |a: &[f64]| m1(a[0]), move |b: &[f64]| m2(b[0]))?;
    let t = apply_xindep(&sep, &gauss, &shifted)?;
    let err = t.max_abs_diff(&multiplier(&gauss, m1)?.zip_with(&multiplier(&shifted, m2)?, |a, b| a * b)?)?;
    c.check(err <= 1e-8, format!("separable symbol vs product of multipliers: {err:.1e}"));

    let g = Grid::new(1, 8, 128)?;
    let f1 = GridFunction::random_band_limited(g, 4.0, 11)?;
    let f2 = GridFunction::random_band_limited(g, 4.0, 12)?;
    let mut worst = 0f64;
    for sigma in [SymbolSpec::bracket_power(1, -0.5)?, SymbolSpec::gaussian(1)?, sep.clone()] {
        let a = apply_xindep(&sigma, &f1, &f2)?;
        worst = worst.max(a.max_abs_diff(&apply_general(&sigma, &f1, &f2)?)?);
    }
    c.check(worst <= 1e-12, format!("general vs x-independent path: {worst:.1e}"));

    let f = GridFunction::from_real_fn(g, |x: &[f64]| (-x[0] * x[0] / 2.0).exp());
    let sigma = SymbolSpec::gaussian(1)?;
    let t = apply_xindep(&sigma, &f, &f)?;
    let fhat = |xi: &[f64]| C::new((2.0 * PI).sqrt() * (-xi[0] * xi[0] / 2.0).exp(), 0.0);
    let idx: Vec<usize> = (0..128).step_by(4).collect();
    let xs: Vec<Vec<f64>> = idx.iter().map(|&j| vec![g.coord(j)]).collect();
    let oracle = quadrature_oracle(&sigma, fhat, fhat, &xs, 8.0, 128)?;
    let scale = t.data().iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let rel = idx.iter().zip(&oracle).map(|(&j, o)| (t.data()[j] - o).norm()).fold(0.0, f64::max) / scale;
    c.check(rel <= 1e-6, format!("quadrature oracle at N = 128: relative {rel:.1e}"));
    Ok(())
}

fn c6(c: &mut Checks) -> Result<()> {
    let reps = exp_range_multi(&[2.0, 1.0], &RangeConfig::default())?;
    let targets = [0.0, 0.5];
    for (rep, t) in reps.iter().zip(targets) {
        c.check(
            (rep.slope - t).abs() <= 0.1 && rep.residual <= crate::report::MAX_RESIDUAL,
            format!("{}: slope {:.4} (want {t} +- 0.1), residual {:.1e}", rep.experiment, rep.slope, rep.residual),
        );
    }
    if let Some(d) = crate::range::data_norm_drift(&reps[0]) {
        c.check(d <= crate::range::DRIFT_TOL, format!("data norm drift {d:.1e}"));
    }
    Ok(())
}

fn c7(c: &mut Checks) -> Result<()> {
    let s0 = exp_smoothness(SmoothnessCase::S0 { s0: 0.25 }, 2.0, 4)?;
    c.check(
        (s0.slope - 0.25).abs() <= 0.1 && s0.residual <= crate::report::MAX_RESIDUAL,
        format!("s0 = 0.25, r = 2: slope {:.4} (want 0.25 +- 0.1), residual {:.1e}", s0.slope, s0.residual),
    );
    let s1 = exp_smoothness(SmoothnessCase::S1 { s1: 0.0 }, 1.0, 4)?;
    c.check(
        (s1.slope - 0.5).abs() <= 0.1 && s1.residual <= crate::report::MAX_RESIDUAL,
        format!("s1 = 0, r = 1: slope {:.4} (want 0.5 +- 0.1), residual {:.1e}", s1.slope, s1.residual),
    );
    Ok(())
}

fn c8(c: &mut Checks) -> Result<()> {
    let cfg = RandomSignConfig::default();
    let one = exp_random_sign(&parse_weight("const:1")?, &cfg)?;
    c.check((one.slope - 0.5).abs() <= 0.1, format!("V = 1: proxy slope {:.4} (want 0.5 +- 0.1)", one.slope));
    let closed = one.aux("closed_form_proxy").unwrap_or(&[]);
    c.check(closed == one.values.as_slice(), "V = 1: proxy equals the closed-form sum exactly".into());
    let agree = one.aux("median_over_proxy").unwrap_or(&[]);
    let ok = !agree.is_empty() && agree.iter().all(|a| (1.0 / AGREEMENT_FACTOR..=AGREEMENT_FACTOR).contains(a));
    c.check(ok, format!("V = 1: median / proxy {agree:.3?} within a factor {AGREEMENT_FACTOR}"));
    let sp = exp_random_sign(&parse_weight("sum-power:-0.5")?, &cfg)?;
    c.check(sp.slope <= 0.1, format!("V = sum-power(-1/2): proxy slope {:.4} (want <= 0.1)", sp.slope));
    Ok(())
}

fn c9(c: &mut Checks) -> Result<()> {
    let sigma = SymbolSpec::from_weight(parse_weight("step(sum-power:-0.5)")?);
    let g = Grid::new(1, 8, 512)?;
    let bands: Vec<f64> = (2..=6).map(|k| 2f64.powi(k)).collect();
    let sw = op_ratio_sweep(&sigma, &TargetNorm::Amalgam(vec![1.0]), g, &bands, 16, bilab_core::trilinear::DEFAULT_SEED)?;
    let slope = sw.slope().unwrap_or(f64::INFINITY);
    c.check(slope <= 0.15, format!("(L2, l1) ratios {:.3?}: slope {slope:.4} (want <= 0.15)", sw.ratios));
    Ok(())
}

fn c10(c: &mut Checks) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let big_k = 6;
    let mut worst = 0f64;
    for _ in 0..1000 {
        let r = rng.random_range(0.0..2f64.powi(big_k));
        worst = worst.max(((0..=big_k as usize).map(|k| lp_psi(k, r)).sum::<f64>() - 1.0).abs());
    }
    let g2 = Grid::new(2, 4, 64)?;
    let p = lp_partition::<f64>(g2, 2)?;
    let mut idx = [0usize; 2];
    for (i, t) in p.total().iter().enumerate() {
        g2.unflatten(i, &mut idx);
        if g2.freq::<f64>(idx[0]).hypot(g2.freq(idx[1])) <= p.resolved_radius() {
            worst = worst.max((t - 1.0).abs());
        }
    }
    c.check(worst <= 1e-12, format!("partition of unity on the resolved ball: {worst:.1e}"));

    let g1 = |l: u32, n: usize| Grid::new(1, l, n);
    let axes = vec![g1(1, 8)?, g1(2, 16)?, g1(2, 16)?];
    let s = SymbolSample::from_fn(1, axes, "trig".into(), |q: &[f64]| {
        C::new((PI * q[0]).cos(), 0.0) * C::new(0.0, PI * q[1]).exp() * C::new((PI / 2.0 * q[2]).cos() + 0.5, 0.0)
    })?;
    let mut acc = vec![C::new(0.0, 0.0); s.len()];
    for k0 in 0..=2 {
        for k1 in 0..=2 {
            for k2 in 0..=2 {
                let d = delta_star(&s, [k0, k1, k2])?;
                acc.iter_mut().zip(d.data()).for_each(|(a, v)| *a += v);
            }
        }
    }
    let back = SymbolSample::from_data(1, s.axes().to_vec(), "sum".into(), acc)?;
    let err = back.max_abs_diff(&s)?;
    c.check(err <= 1e-10, format!("dyadic reconstruction: {err:.1e}"));

    let axes = vec![g1(2, 16)?, g1(4, 32)?, g1(4, 32)?];
    let s = SymbolSample::from_fn(1, axes, "random".into(), |_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))?;
    let w = WeightSpec::bracket_power(1, -0.5)?;
    let cfg = BesovConfig { margin: 1, ..BesovConfig::default() };
    let st = besov_norm_star(&s, &w, [0.3, 0.5, 0.2], &cfg)?.total();
    let ve = besov_norm_vec(&s, &w, &[0.3, 0.5, 0.2], &cfg)?.total();
    let rel = (st - ve).abs() / st;
    c.check(rel <= 1e-10, format!("vec and star norms in one dimension: relative {rel:.1e}"));

    let sigma = SymbolSpec::bracket_power(1, -0.5)?;
    let smp = sigma.sample(g1(1, 4)?, g1(8, 512)?)?;
    let rep = besov_norm_star(&smp, &w, [0.5, 0.5, 0.5], &BesovConfig::default())?;
    let worst = rep.max_ratio_beyond(3).unwrap_or(f64::INFINITY);
    c.check(worst <= 0.5, format!("<xi>^-1/2 shell increment ratios beyond shell 3: max {worst:.3}"));
    Ok(())
}

fn c11(c: &mut Checks) -> Result<()> {
    let w: WeightSpec<f64> = parse_weight("bracket-power:-1")?;
    let cfg = ModerateConfig { exponent: 8.0, threshold: 10.0, ..ModerateConfig::for_dim(2, 8.0) };
    let rep = moderate_check(&w, &cfg)?;
    c.check(rep.spread <= 10.0, format!("bracket-power(-1): spread {:.3}", rep.spread));
    let f = PointFn::<f64>::from_ln(2, |p| p[0] * p[0] + p[1] * p[1]);
    let rep = moderate_check(&f, &ModerateConfig::for_dim(2, 6.0))?;
    c.check(rep.ln_spread >= 1e3f64.ln() && !rep.passed, format!("exp(|xi|^2): ln spread {:.1}", rep.ln_spread));
    let v: WeightSpec<f64> = parse_weight("sum-power:-0.5")?;
    let pts: Vec<Vec<f64>> = (-5..=5).flat_map(|a| (-5..=5).map(move |b| vec![a as f64 * 3.0, b as f64 * 2.0])).collect();
    let (_, s) = v_star(&v, 4.0, &pts)?;
    let dominated = s.values.iter().zip(&s.base_values).all(|(x, b)| b.is_some_and(|b| *x >= b));
    c.check(dominated, format!("V* >= V at {} lattice points", pts.len()));
    let vs = VStar::new(v, 4.0, 24)?;
    let rep = moderate_check(&vs, &ModerateConfig { exponent: 11.0, ..ModerateConfig::for_dim(2, 4.0) })?;
    c.check(rep.passed, format!("V* is moderate: spread {:.3}", rep.spread));
    Ok(())
}

fn c12(c: &mut Checks) -> Result<()> {
    let rep = exp_ghs(GhsSymbol::BracketPower { m: -0.625 }, &GhsConfig::default())?;
    let beyond: Vec<String> = rep
        .increment_ratios
        .iter()
        .enumerate()
        .skip(CAUCHY_FROM + 1)
        .map(|(k, r)| format!("k={k}: {}", r.map_or("floor".into(), |r| format!("{r:.2e}"))))
        .collect();
    c.check(rep.cauchy && rep.max_k > CAUCHY_FROM, format!("<xi>^-5/8, q = 3.6: increment ratios {beyond:?} (want <= {CAUCHY_RATIO})"));

    let g = Grid::new(1, 64, 1024)?;
    let terms = [(0.0, 0.0, 1.0), (1.0, 0.5, 0.7), (-1.5, 1.0, 0.4), (0.25, -1.75, 0.3)];
    let n = g.points();
    let values: Vec<C> = (0..n * n)
        .map(|i| {
            let (a, b) = (g.freq::<f64>(i / n), g.freq::<f64>(i % n));
            terms.iter().map(|&(y1, y2, c)| C::new(0.0, y1 * a + y2 * b).exp() * c).sum()
        })
        .collect();
    let pieces = dyadic_pieces(&g, &values)?;
    let high = pieces.iter().skip(3).flat_map(|p| p.iter().map(|v| v.norm())).fold(0.0, f64::max);
    c.check(pieces.len() > 3 && high <= 1e-10, format!("band-limited symbol: max |sigma_k| for k >= 3 is {high:.1e}"));
    Ok(())
}

fn c13(c: &mut Checks) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let g = Grid::new(1, 8, 128)?;
    let mut worst_ratio = 0f64;
    let mut worst_l2 = 0f64;
    for _ in 0..50 {
        let data: Vec<C> = (0..g.len()).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let f = GridFunction::from_samples(g, Domain::Space, data)?;
        for r in [1.0, 1.5, 2.0] {
            worst_ratio = worst_ratio.max(f.lr_norm(r)? / f.amalgam_norm(2.0, &[r])?);
        }
        let l2 = f.lr_norm(2.0)?;
        worst_l2 = worst_l2.max((f.amalgam_norm(2.0, &[2.0])? - l2).abs() / l2);
    }
    c.check(worst_ratio <= 1.0 + 1e-12, format!("max ||f||_r / ||f||_(2,r) over 50 functions: {worst_ratio:.15}"));
    c.check(worst_l2 <= 1e-12, format!("(L2, l2) vs L2: relative {worst_l2:.1e}"));
    Ok(())
}
