//! One function per subcommand. Each returns a [`Done`] that the caller
//! turns into JSON, CSV and (optionally) SVG files.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use bilab_core::bilinop::{apply, op_ratio_sweep, TargetNorm};
use bilab_core::fieldgrid::{Grid, GridFunction};
use bilab_core::lattice::IndexBox;
use bilab_core::lpcalc::{besov_norm_star, besov_norm_vec, BesovConfig};
use bilab_core::symbol::{parse_symbol, SymbolSpec, SYMBOL_GRAMMAR};
use bilab_core::trilinear::{certify_weight, derive_seed, form_norm_alt, form_norm_oracle, CertifyPolicy, FormNormConfig, Verdict};
use bilab_core::weights::{parse_weight, WeightSpec, WEIGHT_GRAMMAR};
use bilab_experiments::acceptance::{self, CRITERIA};
use bilab_experiments::ghs::{exp_ghs, GhsConfig, GhsSymbol};
use bilab_experiments::random_sign::{exp_random_sign, RandomSignConfig};
use bilab_experiments::range::{exp_range_multi, RangeConfig};
use bilab_experiments::report::{GrowthReport, Outcome};
use bilab_experiments::smoothness::{exp_smoothness, SmoothnessCase};
use serde_json::{json, Value};

use crate::config::{usage, RunConfig, UsageError};
use crate::output::{csv_bytes, Status};
use crate::plot::{PlotData, Plottable};

pub struct Done {
    pub status: Status,
    pub seeds: Vec<u64>,
    pub summary: Vec<String>,
    pub result: Value,
    pub csv: Option<Vec<u8>>,
    pub plot: Option<PlotData>,
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn weight(cfg: &RunConfig, key: &str) -> Result<WeightSpec<f64>> {
    let s = cfg.req(key)?;
    parse_weight(s).map_err(|e| UsageError(format!("--{key}: {e}\n\nweight grammar:\n{WEIGHT_GRAMMAR}")).into())
}

fn symbol(cfg: &RunConfig, key: &str) -> Result<SymbolSpec<f64>> {
    let s = cfg.req(key)?;
    parse_symbol(s).map_err(|e| UsageError(format!("--{key}: {e}\n\nsymbol grammar:\n{SYMBOL_GRAMMAR}\n\nweight grammar:\n{WEIGHT_GRAMMAR}")).into())
}

fn sci(v: f64) -> String {
    format!("{v:e}")
}

/// Maps `f` over `items` on up to `threads` scoped workers, keeping the order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                slots.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("worker panicked").into_iter().map(|r| r.expect("every slot is filled")).collect()
}

pub fn certify(cfg: &RunConfig) -> Result<Done> {
    let v = weight(cfg, "weight")?;
    let radii: Vec<i64> = cfg.list("radii")?;
    let expect = match cfg.req("expect")? {
        "none" => None,
        "bounded" => Some(Verdict::Bounded),
        "growing" => Some(Verdict::Growing),
        e => return usage(format!("--expect must be none, bounded or growing, got {e:?}")).map_err(Into::into),
    };
    let policy = CertifyPolicy { solver: solver(cfg)?, ..CertifyPolicy::default() };
    let cert = certify_weight(&v, &radii, &policy)?;
    let ok = expect.is_none_or(|e| e == cert.verdict);
    let mut summary = vec![format!("verdict {}, slope {:.4}, norms {:.4?}", cert.verdict, cert.slope, cert.norms)];
    if let Some(e) = expect {
        summary.push(format!("expected {e}: {}", if ok { "ok" } else { "mismatch" }));
    }
    let csv = csv_bytes(
        &["radius", "norm", "restarts", "converged"],
        (0..cert.radii.len()).map(|i| vec![cert.radii[i].to_string(), sci(cert.norms[i]), cert.restarts[i].to_string(), cert.converged[i].to_string()]),
    )?;
    Ok(Done {
        status: status(ok),
        seeds: cert.seeds.clone(),
        summary,
        result: serde_json::to_value(&cert)?,
        csv: Some(csv),
        plot: cfg.plot.then(|| cert.plot_data()),
    })
}

fn solver(cfg: &RunConfig) -> Result<FormNormConfig> {
    Ok(FormNormConfig { restarts: cfg.parse("restarts")?, max_iters: cfg.parse("max-iters")?, tol: cfg.parse("tol")?, seed: cfg.seed })
}

pub fn norm(cfg: &RunConfig) -> Result<Done> {
    let v = weight(cfg, "weight")?;
    let radius: i64 = cfg.parse("radius")?;
    let bx = IndexBox::new(v.dim(), radius)?;
    let methods: &[&str] = match cfg.req("method")? {
        "alt" => &["alt"],
        "oracle" => &["oracle"],
        "both" => &["alt", "oracle"],
        m => return usage(format!("--method must be alt, oracle or both, got {m:?}")).map_err(Into::into),
    };
    let sol = solver(cfg)?;
    let values = parallel_map(methods, cfg.threads, |&m| -> Result<f64> {
        Ok(match m {
            "alt" => form_norm_alt(&v, &bx, &sol)?.value,
            _ => form_norm_oracle(&v, &bx)?,
        })
    });
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    let mut summary: Vec<String> = methods.iter().zip(&values).map(|(m, x)| format!("{m}: {x:.8}")).collect();
    let mut result = json!({ "weight": v.describe(), "box_radius": radius, "box_points": bx.cardinality() });
    for (m, x) in methods.iter().zip(&values) {
        result[*m] = json!(x);
    }
    if values.len() == 2 {
        let rel = (values[0] - values[1]).abs() / values[1].abs().max(f64::MIN_POSITIVE);
        result["relative_difference"] = json!(rel);
        summary.push(format!("relative difference {rel:.2e}"));
    }
    let csv = csv_bytes(&["method", "value"], methods.iter().zip(&values).map(|(m, x)| vec![m.to_string(), sci(*x)]))?;
    Ok(Done { status: Status::Pass, seeds: vec![cfg.seed], summary, result, csv: Some(csv), plot: None })
}

fn input(cfg: &RunConfig, key: &str, grid: Grid, slot: u64, seeds: &mut Vec<u64>) -> Result<GridFunction<f64>> {
    let s = cfg.req(key)?;
    if s == "gauss" {
        return Ok(GridFunction::from_real_fn(grid, |x: &[f64]| (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp()));
    }
    if let Some(b) = s.strip_prefix("random:") {
        let band: f64 = b.trim().parse().map_err(|_| UsageError(format!("--{key}: bad bandwidth in {s:?}")))?;
        let seed = derive_seed(cfg.seed, slot, 0);
        seeds.push(seed);
        return Ok(GridFunction::random_band_limited(grid, band, seed)?);
    }
    if let Some(p) = s.strip_prefix("file:") {
        let f = std::fs::File::open(p).with_context(|| format!("opening {p}"))?;
        let g = GridFunction::read_container(std::io::BufReader::new(f))?;
        if *g.grid() != grid {
            return usage(format!("--{key}: {p} is sampled on {:?}, expected {grid:?}", g.grid())).map_err(Into::into);
        }
        return Ok(g);
    }
    usage(format!("--{key} must be gauss, random:BAND or file:PATH, got {s:?}")).map_err(Into::into)
}

pub fn apply_cmd(cfg: &RunConfig) -> Result<Done> {
    let sigma = symbol(cfg, "symbol")?;
    let n = sigma.dim();
    let grid = cfg.grid("grid", n)?;
    let mut seeds = Vec::new();
    let f1 = input(cfg, "f1", grid, 1, &mut seeds)?;
    let f2 = input(cfg, "f2", grid, 2, &mut seeds)?;
    let out = apply(&sigma, &f1, &f2)?;
    let mut result = json!({
        "symbol": sigma.label(),
        "grid": grid,
        "l2_norm": out.lr_norm(2.0)?,
        "sup_norm": out.data().iter().map(|v| v.norm()).fold(0.0, f64::max),
        "wraparound_warning": out.wraparound_warning(),
    });
    let mut summary = vec![format!("||T(f1, f2)||_2 = {:.8e}", result["l2_norm"].as_f64().unwrap_or(f64::NAN))];
    let ok = match cfg.req("check")? {
        "none" => true,
        "product" => {
            // a constant symbol c gives c f1 f2
            let zero = vec![0.0; n];
            let c = sigma.eval(&zero, &zero, &zero)?;
            let expect = f1.zip_with(&f2, |a, b| a * b * c)?;
            let err = out.max_abs_diff(&expect)?;
            let ok = err <= 1e-8;
            result["product_error"] = json!(err);
            summary.push(format!("product identity: max abs error {err:.2e} ({})", if ok { "ok" } else { "exceeds 1e-8" }));
            ok
        }
        c => return usage(format!("--check must be none or product, got {c:?}")).map_err(Into::into),
    };
    let csv = if n == 1 {
        let mut buf = Vec::new();
        out.write_csv(&mut buf)?;
        Some(buf)
    } else {
        summary.push("no CSV: samples are only exported in one dimension".into());
        None
    };
    Ok(Done { status: status(ok), seeds, summary, result, csv, plot: None })
}

pub fn besov(cfg: &RunConfig) -> Result<Done> {
    let sigma = symbol(cfg, "symbol")?;
    let w = weight(cfg, "weight")?;
    let n = sigma.dim();
    let smp = sigma.sample(cfg.grid("x-grid", 1)?, cfg.grid("xi-grid", 1)?)?;
    let s: Vec<f64> = cfg.list("s")?;
    let bc = BesovConfig { margin: cfg.parse("margin")?, ..BesovConfig::default() };
    let rep = match cfg.req("mode")? {
        "star" => {
            let [a, b, c] = s[..] else {
                return usage(format!("--s needs 3 exponents in star mode, got {}", s.len())).map_err(Into::into);
            };
            besov_norm_star(&smp, &w, [a, b, c], &bc)?
        }
        "vec" => besov_norm_vec(&smp, &w, &s, &bc)?,
        m => return usage(format!("--mode must be star or vec, got {m:?}")).map_err(Into::into),
    };
    let beyond = rep.max_ratio_beyond(3);
    let ok = match cfg.req("expect")? {
        "none" => true,
        "summable" => beyond.is_some_and(|r| r <= 0.5),
        e => return usage(format!("--expect must be none or summable, got {e:?}")).map_err(Into::into),
    };
    let summary = vec![
        format!("dimension {n}, total {:.6e} over shells 0..={}", rep.total(), rep.partial_sums.len().saturating_sub(1)),
        format!("largest increment ratio beyond shell 3: {beyond:?}"),
    ];
    let csv = csv_bytes(
        &["shell", "increment", "partial_sum", "ratio"],
        (0..rep.increments.len()).map(|l| vec![l.to_string(), sci(rep.increments[l]), sci(rep.partial_sums[l]), sci(rep.ratios[l])]),
    )?;
    Ok(Done { status: status(ok), seeds: vec![], summary, result: serde_json::to_value(&rep)?, csv: Some(csv), plot: None })
}

fn growth_summary(r: &GrowthReport) -> String {
    format!(
        "{} {}: slope {:.4} (predicted {:.4}, expected {}), residual {:.3}, {}",
        r.experiment,
        r.parameter,
        r.slope,
        r.predicted_slope,
        r.expectation.describe(),
        r.residual,
        r.outcome
    )
}

fn growth_csv(reports: &[GrowthReport]) -> Result<Vec<u8>> {
    let rows = reports.iter().flat_map(|r| {
        r.schedule.iter().zip(&r.values).map(move |(s, v)| vec![r.parameter.clone(), format!("{s}"), sci(*v)])
    });
    csv_bytes(&["parameter", "step", "value"], rows)
}

pub fn sharpness(cfg: &RunConfig) -> Result<Done> {
    let rs: Vec<f64> = cfg.list("r")?;
    let case = cfg.req("case")?;
    let k = match cfg.req("K")? {
        "auto" if case == "range" => 5,
        "auto" => 4,
        _ => cfg.parse::<usize>("K")?,
    };
    let reports = match case {
        "range" => exp_range_multi(&rs, &RangeConfig { max_k: k, ..RangeConfig::default() })?,
        "s0" | "s1" | "s1s2" => {
            let c = match case {
                "s0" => SmoothnessCase::S0 { s0: cfg.parse("s0")? },
                "s1" => SmoothnessCase::S1 { s1: cfg.parse("s1")? },
                _ => SmoothnessCase::S1S2 { s1: cfg.parse("s1")?, s2: cfg.parse("s2")? },
            };
            rs.iter().map(|&r| exp_smoothness(c, r, k)).collect::<std::result::Result<Vec<_>, _>>()?
        }
        c => return usage(format!("--case must be range, s0, s1 or s1s2, got {c:?}")).map_err(Into::into),
    };
    let ok = reports.iter().all(|r| r.outcome != Outcome::Fail);
    let mut summary: Vec<String> = reports.iter().map(growth_summary).collect();
    summary.extend(reports.iter().flat_map(|r| r.notes.iter().cloned()));
    Ok(Done {
        status: status(ok),
        seeds: reports.iter().flat_map(|r| r.seeds.iter().copied()).collect(),
        summary,
        result: serde_json::to_value(&reports)?,
        csv: Some(growth_csv(&reports)?),
        plot: cfg.plot.then(|| reports[0].plot_data()),
    })
}

pub fn randomsign(cfg: &RunConfig) -> Result<Done> {
    let v = weight(cfg, "weight")?;
    let rc = RandomSignConfig {
        radii: cfg.list("radii")?,
        trials: cfg.parse("trials")?,
        r: cfg.parse("r")?,
        seed: cfg.seed,
        expectation: None,
        grid: cfg.grid("grid", 1)?,
    };
    let rep = exp_random_sign(&v, &rc)?;
    let mut summary = vec![growth_summary(&rep)];
    if let Some(m) = rep.aux("median_over_proxy") {
        summary.push(format!("median ratio / proxy per radius: {m:.3?}"));
    }
    summary.extend(rep.notes.iter().cloned());
    Ok(Done {
        status: status(rep.outcome != Outcome::Fail),
        seeds: rep.seeds.clone(),
        summary,
        result: serde_json::to_value(&rep)?,
        csv: Some(growth_csv(std::slice::from_ref(&rep))?),
        plot: cfg.plot.then(|| rep.plot_data()),
    })
}

pub fn ghs(cfg: &RunConfig) -> Result<Done> {
    let sym = GhsSymbol::parse(cfg.req("symbol")?).map_err(|e| UsageError(format!("--symbol: {e}")))?;
    let gc = GhsConfig {
        q: cfg.parse("q")?,
        grid: cfg.grid("grid", 1)?,
        band: cfg.parse("band")?,
        trials: cfg.parse("trials")?,
        seed: cfg.seed,
        kernel_exponent: cfg.parse("kernel-exponent")?,
    };
    let rep = exp_ghs(sym, &gc)?;
    let mut summary = vec![
        format!("{} with q = {} (integrability threshold {:.4}), shells 0..={}", rep.symbol, rep.q, rep.lq_threshold, rep.max_k),
        format!("decay slope {:?}, V_k constant {:.4}, reconstruction error {:.1e}", rep.decay_slope, rep.vk_constant, rep.reconstruction_error),
        format!("increment ratios {:?}: {}", rep.increment_ratios, if rep.cauchy { "Cauchy" } else { "not Cauchy" }),
    ];
    summary.extend(rep.notes.iter().cloned());
    let opt = |v: Option<&f64>| v.map(|x| sci(*x)).unwrap_or_default();
    let csv = csv_bytes(
        &["k", "sup_norm", "vk_ratio", "surrogate", "partial_sum"],
        (0..rep.sup_norms.len()).map(|k| {
            vec![k.to_string(), sci(rep.sup_norms[k]), opt(rep.vk_ratios.get(k)), opt(rep.surrogates.get(k)), opt(rep.partial_sums.get(k))]
        }),
    )?;
    Ok(Done {
        status: status(rep.cauchy),
        seeds: rep.seeds.iter().flatten().copied().collect(),
        summary,
        result: serde_json::to_value(&rep)?,
        csv: Some(csv),
        plot: cfg.plot.then(|| rep.plot_data()),
    })
}

fn target(s: &str) -> Result<TargetNorm, UsageError> {
    let nums = |v: &str| -> Result<Vec<f64>, UsageError> {
        v.split(',')
            .map(|x| match x.trim() {
                "inf" => Ok(f64::INFINITY),
                t => t.parse().map_err(|_| UsageError(format!("--target: bad exponent {t:?}"))),
            })
            .collect()
    };
    if let Some(r) = s.strip_prefix("lebesgue:") {
        match nums(r)?[..] {
            [r] => Ok(TargetNorm::Lebesgue(r)),
            _ => usage("--target lebesgue takes one exponent"),
        }
    } else if let Some(r) = s.strip_prefix("amalgam:") {
        Ok(TargetNorm::Amalgam(nums(r)?))
    } else {
        usage(format!("--target must be lebesgue:R or amalgam:R1,..,Rn, got {s:?}"))
    }
}

pub fn sweep(cfg: &RunConfig) -> Result<Done> {
    let sigma = symbol(cfg, "symbol")?;
    let tgt = target(cfg.req("target")?)?;
    let grid = cfg.grid("grid", sigma.dim())?;
    let bands: Vec<f64> = cfg.list("bandwidths")?;
    let sw = op_ratio_sweep(&sigma, &tgt, grid, &bands, cfg.parse("trials")?, cfg.seed)?;
    let slope = sw.slope();
    let ok = match cfg.req("expect")? {
        "none" => true,
        "bounded" => slope.is_some_and(|s| s <= 0.15),
        "growing" => slope.is_some_and(|s| s > 0.15),
        e => return usage(format!("--expect must be none, bounded or growing, got {e:?}")).map_err(Into::into),
    };
    let mut summary = vec![format!("{} into {}: ratios {:.4?}, slope {slope:?}", sw.symbol, sw.target, sw.ratios)];
    if sw.wraparound_warnings > 0 {
        summary.push(format!("{} outputs carried mass near the grid edge", sw.wraparound_warnings));
    }
    let mut csv = Vec::new();
    sw.write_csv(&mut csv)?;
    Ok(Done {
        status: status(ok),
        seeds: sw.trial_seeds.iter().flatten().flatten().copied().collect(),
        summary,
        result: serde_json::to_value(&sw)?,
        csv: Some(csv),
        plot: cfg.plot.then(|| sw.plot_data()),
    })
}

pub fn selftest(cfg: &RunConfig) -> Result<Done> {
    let ids: Vec<usize> = match cfg.req("only")? {
        "all" => (1..=CRITERIA.len()).collect(),
        _ => cfg.list("only")?,
    };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > CRITERIA.len()) {
        return usage(format!("--only: no criterion {bad}; ids run from 1 to {}", CRITERIA.len())).map_err(Into::into);
    }
    let results = parallel_map(&ids, cfg.threads, |&id| acceptance::run_criterion(id).expect("id checked above"));
    let summary: Vec<String> = results
        .iter()
        .map(|r| format!("{} {:>2} {} ({:.1} s){}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.title, r.seconds, r.details.iter().map(|d| format!("\n       {d}")).collect::<String>()))
        .collect();
    let csv = csv_bytes(&["id", "passed", "seconds"], results.iter().map(|r| vec![r.id.to_string(), r.passed.to_string(), format!("{:.3}", r.seconds)]))?;
    Ok(Done {
        status: status(results.iter().all(|r| r.passed)),
        seeds: vec![],
        summary,
        result: serde_json::to_value(&results)?,
        csv: Some(csv),
        plot: None,
    })
}
