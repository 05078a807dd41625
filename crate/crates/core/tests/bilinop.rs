use bilab_core::bilinop::{apply, apply_general, apply_xindep, op_ratio_sweep, quadrature_oracle, TargetNorm};
use bilab_core::fieldgrid::{Domain, Grid, GridFunction};
use bilab_core::lpcalc::lp_phi;
use bilab_core::symbol::SymbolSpec;
use bilab_core::weights::{parse_weight, WeightSpec};
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

fn gauss(g: Grid) -> GridFunction<f64> {
    GridFunction::from_real_fn(g, |x: &[f64]| (-x[0] * x[0] / 2.0).exp())
}

fn multiplier(f: &GridFunction<f64>, m: impl Fn(f64) -> C) -> GridFunction<f64> {
    let fh = f.grid_ft().unwrap();
    let g = *fh.grid();
    let data = fh.data().iter().enumerate().map(|(i, &v)| v * m(g.freq(i))).collect();
    GridFunction::from_samples(g, Domain::Frequency, data).unwrap().grid_ift().unwrap()
}

#[test]
fn constant_symbol_is_pointwise_product() {
    let g = Grid::new(1, 16, 512).unwrap();
    let f1 = gauss(g);
    let f2 = GridFunction::from_real_fn(g, |x: &[f64]| (-(x[0] - 1.0).powi(2)).exp());
    let one = SymbolSpec::constant(1, 1.0).unwrap();
    let t = apply_xindep(&one, &f1, &f2).unwrap();
    let prod = f1.zip_with(&f2, |a, b| a * b).unwrap();
    assert!(t.max_abs_diff(&prod).unwrap() <= 1e-8);
}

#[test]
fn separable_symbol_factorizes() {
    let g = Grid::new(1, 16, 512).unwrap();
    let f1 = gauss(g);
    let f2 = GridFunction::from_real_fn(g, |x: &[f64]| (-(x[0] + 0.5).powi(2) / 3.0).exp());
    let m1 = |xi: f64| C::new(1.0 / (1.0 + xi * xi), 0.0);
    let m2 = |xi: f64| C::new(0.0, xi);
    let sigma = SymbolSpec::separable(1, "sep", move |a: &[f64]| m1(a[0]), move |b: &[f64]| m2(b[0])).unwrap();
    let t = apply_xindep(&sigma, &f1, &f2).unwrap();
    let expect = multiplier(&f1, m1).zip_with(&multiplier(&f2, m2), |a, b| a * b).unwrap();
    assert!(t.max_abs_diff(&expect).unwrap() <= 1e-8);
}

#[test]
fn general_matches_xindep_on_x_independent_symbols() {
    let g = Grid::new(1, 8, 128).unwrap();
    let f1 = GridFunction::random_band_limited(g, 4.0, 11).unwrap();
    let f2 = GridFunction::random_band_limited(g, 4.0, 12).unwrap();
    let sigma = SymbolSpec::bracket_power(1, -0.5).unwrap();
    let a = apply_xindep(&sigma, &f1, &f2).unwrap();
    let b = apply_general(&sigma, &f1, &f2).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() <= 1e-12);
}

#[test]
fn gaussian_symbol_matches_dense_quadrature() {
    let g = Grid::new(1, 8, 128).unwrap();
    let f = gauss(g);
    let sigma = SymbolSpec::gaussian(1).unwrap();
    let t = apply_xindep(&sigma, &f, &f).unwrap();
    let fhat = |xi: &[f64]| C::new((2.0 * std::f64::consts::PI).sqrt() * (-xi[0] * xi[0] / 2.0).exp(), 0.0);
    let idx: Vec<usize> = (0..128).step_by(4).collect();
    let xs: Vec<Vec<f64>> = idx.iter().map(|&j| vec![g.coord(j)]).collect();
    let oracle = quadrature_oracle(&sigma, fhat, fhat, &xs, 8.0, 128).unwrap();
    let scale = t.data().iter().fold(0.0f64, |m, v| m.max(v.norm()));
    for (&j, o) in idx.iter().zip(&oracle) {
        assert!((t.data()[j] - o).norm() <= 1e-6 * scale);
        // closed form: (1/2) exp(-x^2/2)
        let x = g.coord::<f64>(j);
        assert!((o.re - 0.5 * (-x * x / 2.0).exp()).abs() <= 1e-10);
    }
}

#[test]
fn x_only_symbol_multiplies() {
    let g = Grid::new(1, 8, 128).unwrap();
    let f1 = gauss(g);
    let f2 = GridFunction::random_band_limited(g, 3.0, 5).unwrap();
    let sigma = SymbolSpec::general(1, "a(x)", |x: &[f64], _: &[f64], _: &[f64]| C::new(1.0 / (1.0 + x[0] * x[0]), 0.0)).unwrap();
    let t = apply_general(&sigma, &f1, &f2).unwrap();
    let expect = GridFunction::from_fn(g, |x| C::new(1.0 / (1.0 + x[0] * x[0]), 0.0));
    let expect = expect.zip_with(&f1, |a, b| a * b).unwrap().zip_with(&f2, |a, b| a * b).unwrap();
    assert!(t.max_abs_diff(&expect).unwrap() <= 1e-10);
}

#[test]
fn decaying_x_factor_product_formula() {
    // sigma = <x>^{-a} e^{-ix(xi_1 + xi_2)} phi(xi_1) phi(xi_2), f^ = phi
    let a = 1.5;
    let g = Grid::new(1, 64, 256).unwrap();
    let phi = |xi: &[f64]| C::new(lp_phi(xi[0].abs()), 0.0);
    let sigma = SymbolSpec::general(1, "s1s2", move |x: &[f64], p: &[f64], q: &[f64]| {
        let ph = -x[0] * (p[0] + q[0]);
        C::new((1.0 + x[0] * x[0]).powf(-a / 2.0) * lp_phi(p[0].abs()) * lp_phi(q[0].abs()), 0.0) * C::new(ph.cos(), ph.sin())
    })
    .unwrap();
    let f = GridFunction::from_spectrum_fn(g, phi);
    let t = apply_general(&sigma, &f, &f).unwrap();
    // the phases cancel exactly, leaving the Riemann sum of phi^2 squared
    let dxi = g.freq_step::<f64>() / (2.0 * std::f64::consts::PI);
    let riemann: f64 = (0..g.points()).map(|m| lp_phi(g.freq::<f64>(m).abs()).powi(2)).sum::<f64>() * dxi;
    // (2 pi)^{-1} int phi^2 by a fine midpoint rule
    let m = 200_000;
    let d = 4.0 / m as f64;
    let int: f64 = (0..m).map(|i| lp_phi((-2.0 + (i as f64 + 0.5) * d).abs()).powi(2)).sum::<f64>() * d / (2.0 * std::f64::consts::PI);
    assert!((riemann - int).abs() <= 1e-6 * int);
    for (j, v) in t.data().iter().enumerate() {
        let x = g.coord::<f64>(j);
        let expect = (1.0 + x * x).powf(-a / 2.0) * riemann * riemann;
        assert!((v - C::new(expect, 0.0)).norm() <= 1e-12, "x = {x}: {v} vs {expect}");
    }
}

#[test]
fn random_x_dependent_symbol_matches_quadrature() {
    let g = Grid::new(1, 8, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut bumps = |k: usize| -> Vec<(f64, f64, f64)> { (0..k).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0))).collect() };
    let b1 = bumps(3);
    let b2 = bumps(3);
    let bs = bumps(4);
    let fh = |b: Vec<(f64, f64, f64)>| move |xi: &[f64]| b.iter().map(|&(c, mu, ph)| C::new(c * (-(xi[0] - mu).powi(2)).exp(), 0.0) * C::new(0.0, ph).exp()).sum::<C>();
    let (fh1, fh2) = (fh(b1), fh(b2));
    let sigma = SymbolSpec::general(1, "random", move |x: &[f64], p: &[f64], q: &[f64]| {
        bs.iter().map(|&(c, a, w)| C::new(0.0, a * x[0]).exp() * c * (-(p[0] - w).powi(2) / 4.0 - (q[0] + w).powi(2) / 4.0).exp()).sum::<C>()
    })
    .unwrap();
    let f1 = GridFunction::from_spectrum_fn(g, &fh1);
    let f2 = GridFunction::from_spectrum_fn(g, &fh2);
    let t = apply(&sigma, &f1, &f2).unwrap();
    let xs: Vec<Vec<f64>> = (0..64).step_by(3).map(|j| vec![g.coord(j)]).collect();
    let oracle = quadrature_oracle(&sigma, &fh1, &fh2, &xs, 10.0, 160).unwrap();
    let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    for (k, o) in oracle.iter().enumerate() {
        assert!((t.data()[3 * k] - o).norm() <= 1e-8 * scale);
    }
}

#[test]
fn general_path_has_a_resource_guard() {
    let g = Grid::new(1, 16, 2048).unwrap();
    let f = gauss(g);
    let sigma = SymbolSpec::constant(1, 1.0).unwrap().modulate_x(vec![0.0]).unwrap();
    assert!(apply_general(&sigma, &f, &f).is_err());
    assert!(apply_xindep(&sigma, &f, &f).is_err());
}

#[test]
fn mismatched_grids_are_rejected() {
    let f1 = gauss(Grid::new(1, 8, 128).unwrap());
    let f2 = gauss(Grid::new(1, 8, 256).unwrap());
    let one = SymbolSpec::constant(1, 1.0).unwrap();
    assert!(apply_xindep(&one, &f1, &f2).is_err());
}

#[test]
fn constant_symbol_ratio_obeys_cauchy_schwarz() {
    let g = Grid::new(1, 8, 256).unwrap();
    let one = SymbolSpec::constant(1, 1.0).unwrap();
    let sw = op_ratio_sweep(&one, &TargetNorm::Lebesgue(1.0), g, &[2.0, 4.0, 8.0], 8, 3).unwrap();
    assert!(sw.ratios.iter().all(|&r| r <= 1.0 + 1e-12));
    assert_eq!(sw.kind, "empirical lower envelope");
    let f = GridFunction::random_band_limited(g, 6.0, 9).unwrap();
    let fc = f.map(|v| v.conj());
    let t = apply_xindep(&one, &f, &fc).unwrap();
    let ratio: f64 = t.lr_norm(1.0).unwrap() / (f.lr_norm(2.0).unwrap() * fc.lr_norm(2.0).unwrap());
    assert!((ratio - 1.0).abs() <= 1e-6);
}

#[test]
fn sweep_validates_inputs() {
    let g = Grid::new(1, 8, 64).unwrap();
    let one = SymbolSpec::constant(1, 1.0).unwrap();
    let t = TargetNorm::Lebesgue(1.0);
    assert!(op_ratio_sweep(&one, &t, g, &[1.0, 2.0], 4, 0).is_err());
    assert!(op_ratio_sweep(&one, &t, g, &[2.0, 2.0], 8, 0).is_err());
    assert!(op_ratio_sweep(&one, &t, g, &[2.0, 100.0], 8, 0).is_err());
    assert!(op_ratio_sweep(&one, &TargetNorm::Amalgam(vec![1.0, 1.0]), g, &[2.0], 8, 0).is_err());
}

#[test]
fn step_extended_critical_weight_sweep_stays_flat() {
    let w: WeightSpec<f64> = parse_weight("step(sum-power:-0.5)").unwrap();
    let sigma = SymbolSpec::from_weight(w);
    let g = Grid::new(1, 8, 512).unwrap();
    let bands: Vec<f64> = (2..=6).map(|k| 2f64.powi(k)).collect();
    let sw = op_ratio_sweep(&sigma, &TargetNorm::Amalgam(vec![1.0]), g, &bands, 16, 0x5eed).unwrap();
    assert!(sw.slope().unwrap() <= 0.15, "slope {:?}", sw.slope());
    let again = op_ratio_sweep(&sigma, &TargetNorm::Amalgam(vec![1.0]), g, &bands, 16, 0x5eed).unwrap();
    assert_eq!(sw.ratios, again.ratios);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bilinear_in_the_first_argument(seed in 0u64..1000, al in -2.0f64..2.0, be in -2.0f64..2.0) {
        let g = Grid::new(1, 4, 64).unwrap();
        let f = GridFunction::random_band_limited(g, 4.0, seed).unwrap();
        let h = GridFunction::random_band_limited(g, 4.0, seed + 1).unwrap();
        let f2 = GridFunction::random_band_limited(g, 4.0, seed + 2).unwrap();
        let sigma = SymbolSpec::bracket_power(1, -0.5).unwrap();
        let comb = f.zip_with(&h, |a, b| a * al + b * be).unwrap();
        let lhs = apply_xindep(&sigma, &comb, &f2).unwrap();
        let rhs = apply_xindep(&sigma, &f, &f2).unwrap().zip_with(&apply_xindep(&sigma, &h, &f2).unwrap(), |a, b| a * al + b * be).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-10);
    }
}
