//! The trilinear form `sum V(nu1, nu2) A(nu1 + nu2) B(nu1) C(nu2)`, its best
//! constant over a box, a brute-force oracle and growth certification.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{param, LabError, Result};
use crate::fit::fit_log2_log2;
use crate::lattice::{IndexBox, SeqFunction};
use crate::scalar::{CompensatedSum, Real};
use crate::weights::WeightSpec;

/// Exact value of the form for finitely supported nonnegative `A`, `B`, `C`.
pub fn trilinear_form<T: Real>(
    v: &WeightSpec<T>,
    a: &SeqFunction<T>,
    b: &SeqFunction<T>,
    c: &SeqFunction<T>,
) -> Result<T> {
    let n = v.dim();
    for s in [a, b, c] {
        if s.dim() != n {
            return Err(LabError::Dimension { expected: n, got: s.dim() });
        }
        if s.iter().any(|(_, &x)| x < T::zero()) {
            return Err(LabError::Domain("trilinear form needs nonnegative A, B, C".into()));
        }
    }
    let mut acc = CompensatedSum::new();
    let mut key = vec![0i64; 2 * n];
    let mut k = vec![0i64; n];
    for (p1, &bv) in b.iter() {
        for (p2, &cv) in c.iter() {
            for j in 0..n {
                k[j] = p1[j] + p2[j];
            }
            let av = a.get(&k);
            if av == T::zero() {
                continue;
            }
            key[..n].copy_from_slice(p1);
            key[n..].copy_from_slice(p2);
            acc.add(v.eval_int_unchecked(&key) * av * bv * cv);
        }
    }
    Ok(acc.value())
}

/// Nonzero entries of `V` on `box x box`, with the index of `nu1 + nu2` in the sum box.
struct Kernel<T> {
    a_box: IndexBox,
    entries: Vec<(u32, u32, u32, T)>,
}

impl<T: Real> Kernel<T> {
    fn build(v: &WeightSpec<T>, b: &IndexBox) -> Result<Self> {
        let n = v.dim();
        if b.dim() != n {
            return Err(LabError::Dimension { expected: n, got: b.dim() });
        }
        let a_box = b.minkowski_sum(b)?;
        let m = b.cardinality();
        if (m as f64).powi(2) > 5.0e7 {
            return Err(LabError::Resource(format!("kernel on {m}^2 pairs is too large")));
        }
        let pts: Vec<Vec<i64>> = b.iter().collect();
        let mut entries = Vec::new();
        let mut key = vec![0i64; 2 * n];
        let mut k = vec![0i64; n];
        for (i1, p1) in pts.iter().enumerate() {
            for (i2, p2) in pts.iter().enumerate() {
                key[..n].copy_from_slice(p1);
                key[n..].copy_from_slice(p2);
                let val = v.eval_int_unchecked(&key);
                if !(val >= T::zero()) || !val.is_finite() {
                    return Err(LabError::Domain(format!("weight value {val} at {key:?}")));
                }
                if val != T::zero() {
                    for j in 0..n {
                        k[j] = p1[j] + p2[j];
                    }
                    let ik = a_box.index_of(&k).expect("sum lies in the Minkowski box");
                    entries.push((ik as u32, i1 as u32, i2 as u32, val));
                }
            }
        }
        Ok(Self { a_box, entries })
    }

    fn grad_a(&self, b: &[T], c: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|x| *x = T::zero());
        for &(k, i1, i2, v) in &self.entries {
            out[k as usize] = out[k as usize] + v * b[i1 as usize] * c[i2 as usize];
        }
    }

    fn grad_b(&self, a: &[T], c: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|x| *x = T::zero());
        for &(k, i1, i2, v) in &self.entries {
            out[i1 as usize] = out[i1 as usize] + v * a[k as usize] * c[i2 as usize];
        }
    }

    fn grad_c(&self, a: &[T], b: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|x| *x = T::zero());
        for &(k, i1, i2, v) in &self.entries {
            out[i2 as usize] = out[i2 as usize] + v * a[k as usize] * b[i1 as usize];
        }
    }

    fn value(&self, a: &[T], b: &[T], c: &[T]) -> T {
        let mut acc = CompensatedSum::new();
        for &(k, i1, i2, v) in &self.entries {
            acc.add(v * a[k as usize] * b[i1 as usize] * c[i2 as usize]);
        }
        acc.value()
    }
}

/// Settings for [`form_norm_alt`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormNormConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when the relative objective change over one A, B, C cycle falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for FormNormConfig {
    fn default() -> Self {
        Self { restarts: 8, max_iters: 500, tol: 1e-9, seed: DEFAULT_SEED }
    }
}

/// Seed used whenever none is given.
pub const DEFAULT_SEED: u64 = 0x0B11_AB5E_ED00_2024;

/// splitmix64 step, used to derive independent child seeds.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartDiagnostics {
    /// `None` for deterministic starts (uniform or warm).
    pub seed: Option<u64>,
    pub start: &'static str,
    pub iterations: usize,
    pub converged: bool,
    /// Relative objective change over the last cycle.
    pub last_rel_change: f64,
    pub value: f64,
    /// Times a zero partial-maximization vector forced a random re-seed.
    pub reseeds: usize,
}

#[derive(Clone, Debug)]
pub struct FormNormEstimate<T> {
    pub value: T,
    /// `V` vanishes on the box.
    pub degenerate: bool,
    pub restarts: Vec<RestartDiagnostics>,
    pub best_restart: usize,
    /// Maximizing triple as dense vectors over the sum box (A) and the box (B, C).
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
    pub a_box: IndexBox,
    pub bc_box: IndexBox,
    /// Objective after every cycle of the best restart.
    pub history: Vec<T>,
}

impl<T: Real> FormNormEstimate<T> {
    pub fn converged(&self) -> bool {
        self.degenerate || self.restarts[self.best_restart].converged
    }

    pub fn maximizer(&self) -> Result<(SeqFunction<T>, SeqFunction<T>, SeqFunction<T>)> {
        let seq = |bx: &IndexBox, v: &[T]| SeqFunction::nonnegative(bx.dim(), bx.iter().zip(v.iter().copied()));
        Ok((seq(&self.a_box, &self.a)?, seq(&self.bc_box, &self.b)?, seq(&self.bc_box, &self.c)?))
    }
}

fn normalize<T: Real>(x: &mut [T]) -> T {
    let mut acc = CompensatedSum::new();
    for &v in x.iter() {
        acc.add(v * v);
    }
    let nrm = acc.value().sqrt();
    if nrm > T::zero() {
        x.iter_mut().for_each(|v| *v = *v / nrm);
    }
    nrm
}

fn random_unit<T: Real>(len: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    loop {
        let mut v: Vec<T> = (0..len).map(|_| T::lit(rng.random::<f64>())).collect();
        if normalize(&mut v) > T::zero() {
            return v;
        }
    }
}

struct RunOutcome<T> {
    diag: RestartDiagnostics,
    a: Vec<T>,
    b: Vec<T>,
    c: Vec<T>,
    history: Vec<T>,
}

fn run_restart<T: Real>(
    kern: &Kernel<T>,
    mut b: Vec<T>,
    mut c: Vec<T>,
    cfg: &FormNormConfig,
    seed: Option<u64>,
    start: &'static str,
) -> RunOutcome<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(cfg.seed));
    let mut a = vec![T::zero(); kern.a_box.cardinality()];
    let mut reseeds = 0usize;
    let mut history = Vec::new();
    let mut prev = T::zero();
    let mut rel = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let tol = T::lit(cfg.tol);
    for it in 0..cfg.max_iters {
        iterations = it + 1;
        let mut g = vec![T::zero(); a.len()];
        kern.grad_a(&b, &c, &mut g);
        if normalize(&mut g) == T::zero() {
            reseeds += 1;
            b = random_unit(b.len(), &mut rng);
            c = random_unit(c.len(), &mut rng);
            continue;
        }
        a = g;
        let mut g = vec![T::zero(); b.len()];
        kern.grad_b(&a, &c, &mut g);
        if normalize(&mut g) == T::zero() {
            reseeds += 1;
            b = random_unit(b.len(), &mut rng);
            continue;
        }
        b = g;
        let mut g = vec![T::zero(); c.len()];
        kern.grad_c(&a, &b, &mut g);
        let obj = normalize(&mut g);
        if obj == T::zero() {
            reseeds += 1;
            c = random_unit(c.len(), &mut rng);
            continue;
        }
        c = g;
        history.push(obj);
        if prev > T::zero() {
            let r = (obj - prev) / obj;
            rel = r.as_f64();
            if r.abs() < tol {
                converged = true;
                break;
            }
        }
        prev = obj;
    }
    let value = kern.value(&a, &b, &c);
    RunOutcome {
        diag: RestartDiagnostics {
            seed,
            start,
            iterations,
            converged,
            last_rel_change: rel,
            value: value.as_f64(),
            reseeds,
        },
        a,
        b,
        c,
        history,
    }
}

/// Alternating maximization of the form over unit-sphere triples supported
/// in `bc_box` (for B and C) and its Minkowski sum (for A).
///
/// The returned value is attained by the returned triple, so it is a lower
/// bound for the best constant on the box.
pub fn form_norm_alt<T: Real>(v: &WeightSpec<T>, bc_box: &IndexBox, cfg: &FormNormConfig) -> Result<FormNormEstimate<T>> {
    form_norm_alt_warm(v, bc_box, cfg, None)
}

/// As [`form_norm_alt`], with an optional extra start `(B, C)` given as sequences.
pub fn form_norm_alt_warm<T: Real>(
    v: &WeightSpec<T>,
    bc_box: &IndexBox,
    cfg: &FormNormConfig,
    warm: Option<(&SeqFunction<T>, &SeqFunction<T>)>,
) -> Result<FormNormEstimate<T>> {
    if cfg.restarts == 0 {
        return param("restarts must be at least 1");
    }
    if cfg.max_iters == 0 || !(cfg.tol > 0.0) {
        return param("max_iters and tol must be positive");
    }
    let kern = Kernel::build(v, bc_box)?;
    let m = bc_box.cardinality();
    let a_len = kern.a_box.cardinality();
    if kern.entries.is_empty() {
        return Ok(FormNormEstimate {
            value: T::zero(),
            degenerate: true,
            restarts: Vec::new(),
            best_restart: 0,
            a: vec![T::zero(); a_len],
            b: vec![T::zero(); m],
            c: vec![T::zero(); m],
            a_box: kern.a_box,
            bc_box: *bc_box,
            history: Vec::new(),
        });
    }
    let mut outcomes = Vec::new();
    let uniform = vec![T::one() / T::from_usize_lossy(m).sqrt(); m];
    outcomes.push(run_restart(&kern, uniform.clone(), uniform, cfg, None, "uniform"));
    for r in 1..cfg.restarts {
        let seed = derive_seed(cfg.seed, bc_box.radius() as u64, r as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b0 = random_unit(m, &mut rng);
        let c0 = random_unit(m, &mut rng);
        outcomes.push(run_restart(&kern, b0, c0, cfg, Some(seed), "random"));
    }
    if let Some((wb, wc)) = warm {
        let mut b0 = wb.dense_on(bc_box)?;
        let mut c0 = wc.dense_on(bc_box)?;
        if normalize(&mut b0) > T::zero() && normalize(&mut c0) > T::zero() {
            outcomes.push(run_restart(&kern, b0, c0, cfg, None, "warm"));
        }
    }
    let best = outcomes
        .iter()
        .enumerate()
        .fold(0, |bi, (i, o)| if o.diag.value > outcomes[bi].diag.value { i } else { bi });
    let restarts: Vec<RestartDiagnostics> = outcomes.iter().map(|o| o.diag.clone()).collect();
    let o = outcomes.swap_remove(best);
    Ok(FormNormEstimate {
        value: kern.value(&o.a, &o.b, &o.c),
        degenerate: false,
        restarts,
        best_restart: best,
        a: o.a,
        b: o.b,
        c: o.c,
        a_box: kern.a_box,
        bc_box: *bc_box,
        history: o.history,
    })
}

/// Largest supported angular-grid workload per stage of the oracle.
const ORACLE_STAGE_BUDGET: usize = 400_000;
/// Final angular resolution of the oracle in radians.
pub const ORACLE_FINAL_STEP: f64 = 0.002;

/// Brute-force best constant on a tiny box (at most 5 points).
///
/// Searches `B` over the nonnegative part of the unit sphere on nested
/// angular grids (coarse grid, then refinement around the best candidates
/// down to a 0.002 rad step). For fixed `B` the form is a bilinear form in
/// `(A, C)` with a nonnegative matrix, whose maximum over unit vectors is its
/// top singular value, attained at nonnegative vectors; that value is
/// computed exactly from a symmetric eigendecomposition.
pub fn form_norm_oracle<T: Real>(v: &WeightSpec<T>, bc_box: &IndexBox) -> Result<T> {
    let n = v.dim();
    if bc_box.dim() != n {
        return Err(LabError::Dimension { expected: n, got: bc_box.dim() });
    }
    if bc_box.cardinality() > 5 {
        return Err(LabError::Resource(format!(
            "oracle refuses boxes with more than 5 points (got {})",
            bc_box.cardinality()
        )));
    }
    let a_box = bc_box.minkowski_sum(bc_box)?;
    let pts: Vec<Vec<i64>> = bc_box.iter().collect();
    let m = pts.len();
    let mut vmat = vec![vec![0f64; m]; m];
    let mut kidx = vec![vec![0usize; m]; m];
    let mut key = vec![0i64; 2 * n];
    for i1 in 0..m {
        for i2 in 0..m {
            key[..n].copy_from_slice(&pts[i1]);
            key[n..].copy_from_slice(&pts[i2]);
            let val = v.eval_int_unchecked(&key).as_f64();
            if !(val >= 0.0) || !val.is_finite() {
                return Err(LabError::Domain(format!("weight value {val} at {key:?}")));
            }
            vmat[i1][i2] = val;
            let k: Vec<i64> = (0..n).map(|j| pts[i1][j] + pts[i2][j]).collect();
            kidx[i1][i2] = a_box.index_of(&k).expect("inside sum box");
        }
    }
    let rows: Vec<usize> = (0..m).filter(|&i| vmat[i].iter().any(|&x| x > 0.0)).collect();
    let cols: Vec<usize> = (0..m).filter(|&j| rows.iter().any(|&i| vmat[i][j] > 0.0)).collect();
    if rows.is_empty() {
        return Ok(T::zero());
    }
    let ks: Vec<usize> = {
        let mut ks: Vec<usize> = rows.iter().flat_map(|&i| cols.iter().map(move |&j| (i, j))).map(|(i, j)| kidx[i][j]).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    };
    let krow = |k: usize| ks.binary_search(&k).expect("listed");
    let q = rows.len();
    let eval_b = |bvec: &[f64]| -> f64 {
        let mut mat = DMatrix::<f64>::zeros(ks.len(), cols.len());
        for (ri, &i) in rows.iter().enumerate() {
            for (ci, &j) in cols.iter().enumerate() {
                let w = vmat[i][j];
                if w > 0.0 {
                    mat[(krow(kidx[i][j]), ci)] += w * bvec[ri];
                }
            }
        }
        let gram = mat.transpose() * &mat;
        let ev = gram.symmetric_eigenvalues();
        ev.iter().fold(0.0f64, |m, &x| m.max(x)).max(0.0).sqrt()
    };
    if q == 1 {
        return Ok(T::lit(eval_b(&[1.0])));
    }
    let dims = q - 1;
    let to_b = |ang: &[f64], out: &mut [f64]| {
        let mut s = 1.0;
        for (t, &a) in ang.iter().enumerate() {
            out[t] = s * a.cos();
            s *= a.sin();
        }
        out[dims] = s;
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let budget_side = (ORACLE_STAGE_BUDGET as f64).powf(1.0 / dims as f64).floor() as usize;
    let coarse = budget_side.saturating_sub(1).max(2).min((half_pi / ORACLE_FINAL_STEP).ceil() as usize);
    let mut step = half_pi / coarse as f64;
    let mut bbuf = vec![0f64; q];
    // stage 1: full grid over [0, pi/2]^dims
    let mut cands: Vec<(f64, Vec<f64>)> = Vec::new();
    let keep = 12usize;
    let mut idx = vec![0usize; dims];
    let mut ang = vec![0f64; dims];
    let total = (coarse + 1).pow(dims as u32);
    for t in 0..total {
        let mut rem = t;
        for d in (0..dims).rev() {
            idx[d] = rem % (coarse + 1);
            rem /= coarse + 1;
        }
        for d in 0..dims {
            ang[d] = idx[d] as f64 * step;
        }
        to_b(&ang, &mut bbuf);
        let val = eval_b(&bbuf);
        push_candidate(&mut cands, keep, val, &ang);
    }
    // refinement stages: windows of +-step around the best candidates
    while step > ORACLE_FINAL_STEP {
        let sub = 8usize;
        let fine = (step / sub as f64).max(ORACLE_FINAL_STEP * 0.5);
        let reach = (step / fine).ceil() as i64;
        let side = (2 * reach + 1) as usize;
        let mut next: Vec<(f64, Vec<f64>)> = cands.clone();
        for (_, center) in &cands {
            let count = side.pow(dims as u32);
            for t in 0..count {
                let mut rem = t;
                for d in (0..dims).rev() {
                    let off = (rem % side) as i64 - reach;
                    rem /= side;
                    ang[d] = (center[d] + off as f64 * fine).clamp(0.0, half_pi);
                }
                to_b(&ang, &mut bbuf);
                let val = eval_b(&bbuf);
                push_candidate(&mut next, keep, val, &ang);
            }
        }
        cands = next;
        step = fine;
    }
    Ok(T::lit(cands[0].0))
}

fn push_candidate(cands: &mut Vec<(f64, Vec<f64>)>, keep: usize, val: f64, ang: &[f64]) {
    if cands.len() == keep && val <= cands[keep - 1].0 {
        return;
    }
    if cands.iter().any(|(_, a)| a.as_slice() == ang) {
        return;
    }
    let pos = cands.partition_point(|(v, _)| *v >= val);
    cands.insert(pos, (val, ang.to_vec()));
    cands.truncate(keep);
}

/// Growth verdict of a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded",
            Verdict::Growing => "growing",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertifyPolicy {
    /// Slope below which (with shrinking increments) the verdict is bounded.
    pub bounded_slope: f64,
    /// Slope above which the verdict is growing.
    pub growing_slope: f64,
    pub solver: FormNormConfig,
}

impl Default for CertifyPolicy {
    fn default() -> Self {
        Self { bounded_slope: 0.1, growing_slope: 0.15, solver: FormNormConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub tol: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub bounded_slope: f64,
    pub growing_slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrilinearCertificate {
    pub schema: u32,
    pub weight: String,
    pub radii: Vec<i64>,
    pub norms: Vec<f64>,
    /// Restarts run per radius (including the warm start from the previous radius).
    pub restarts: Vec<usize>,
    /// Relative objective change over the final cycle of the best run, per radius.
    pub convergence_residuals: Vec<f64>,
    pub converged: Vec<bool>,
    /// `log2(norm_{i+1} / norm_i)` per consecutive pair.
    pub increments: Vec<f64>,
    pub slope: f64,
    /// RMS residual of the log2-log2 fit.
    pub residual: f64,
    pub max_deviation: f64,
    pub verdict: Verdict,
    /// True if some radius failed to converge.
    pub flagged: bool,
    pub seeds: Vec<u64>,
    pub tolerances: Tolerances,
}

/// Runs [`form_norm_alt`] over a radius schedule and fits `log2 norm` against `log2 R`.
///
/// Each radius also restarts from the previous radius' maximizer, so the
/// estimates are nondecreasing in `R`.
pub fn certify_weight<T: Real>(v: &WeightSpec<T>, radii: &[i64], policy: &CertifyPolicy) -> Result<TrilinearCertificate> {
    if radii.len() < 3 {
        return param("certification needs at least 3 radii");
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] < 1 {
        return param("radii must be positive and strictly increasing");
    }
    let mut norms = Vec::new();
    let mut restarts = Vec::new();
    let mut residuals = Vec::new();
    let mut converged = Vec::new();
    let mut seeds = Vec::new();
    let mut warm: Option<(SeqFunction<T>, SeqFunction<T>)> = None;
    for &r in radii {
        let bx = IndexBox::new(v.dim(), r)?;
        let seed = derive_seed(policy.solver.seed, r as u64, 0);
        let cfg = FormNormConfig { seed, ..policy.solver.clone() };
        let est = form_norm_alt_warm(v, &bx, &cfg, warm.as_ref().map(|(b, c)| (b, c)))?;
        norms.push(est.value.as_f64());
        restarts.push(est.restarts.len());
        residuals.push(est.restarts.get(est.best_restart).map(|d| d.last_rel_change).unwrap_or(0.0));
        converged.push(est.converged());
        seeds.push(seed);
        if !est.degenerate {
            let (_, b, c) = est.maximizer()?;
            warm = Some((b, c));
        }
    }
    let xs: Vec<f64> = radii.iter().map(|&r| r as f64).collect();
    let (slope, residual, max_deviation) = if norms.iter().all(|&x| x > 0.0) {
        let f = fit_log2_log2(&xs, &norms)?;
        (f.slope, f.rms_residual, f.max_deviation)
    } else {
        (0.0, 0.0, 0.0)
    };
    let increments: Vec<f64> = norms
        .windows(2)
        .map(|w| if w[0] > 0.0 { (w[1] / w[0]).log2() } else { 0.0 })
        .collect();
    let shrinking = increments.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let verdict = if slope < policy.bounded_slope && shrinking {
        Verdict::Bounded
    } else if slope > policy.growing_slope {
        Verdict::Growing
    } else {
        Verdict::Inconclusive
    };
    Ok(TrilinearCertificate {
        schema: 1,
        weight: v.describe(),
        radii: radii.to_vec(),
        norms,
        restarts,
        convergence_residuals: residuals,
        flagged: converged.iter().any(|c| !c),
        converged,
        increments,
        slope,
        residual,
        max_deviation,
        verdict,
        seeds,
        tolerances: Tolerances {
            tol: policy.solver.tol,
            max_iters: policy.solver.max_iters,
            restarts: policy.solver.restarts,
            bounded_slope: policy.bounded_slope,
            growing_slope: policy.growing_slope,
        },
    })
}
