use bilab_core::fieldgrid::{CubeAnchor, Domain, Grid, GridFunction};
use num_complex::Complex;
use proptest::prelude::*;

type C = Complex<f64>;

fn random_field(g: Grid, seed: u64) -> GridFunction<f64> {
    // band-limited but not decaying, so cubes carry unequal mass
    let f = GridFunction::random_band_limited(g, 2.0, seed).unwrap();
    f.zip_with(&GridFunction::from_real_fn(g, |x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>() / 4.0).exp()), |a, b| a * b).unwrap()
}

#[test]
fn grid_validation() {
    assert!(Grid::new(1, 8, 100).is_err());
    assert!(Grid::new(1, 3, 8).is_err());
    assert!(Grid::new(0, 8, 64).is_err());
    assert!(Grid::new(1, 0, 64).is_err());
    assert!(Grid::new(4, 64, 512).is_err());
    let g = Grid::new(1, 8, 64).unwrap();
    assert_eq!(g.step::<f64>(), 0.25);
    assert_eq!(g.coord::<f64>(0), -8.0);
    assert_eq!(g.freq_index(33), -31);
    assert!((g.nyquist::<f64>() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn plancherel_holds_to_round_off() {
    for (dim, l, n) in [(1, 8, 128), (2, 4, 32)] {
        let g = Grid::new(dim, l, n).unwrap();
        let f = random_field(g, 7);
        let fh = f.grid_ft().unwrap();
        assert_eq!(fh.domain(), Domain::Frequency);
        let lhs = fh.lr_norm(2.0).unwrap();
        let rhs = (2.0 * std::f64::consts::PI).powf(dim as f64 / 2.0) * f.lr_norm(2.0).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * rhs);
        assert!(fh.grid_ift().unwrap().max_abs_diff(&f).unwrap() <= 1e-12);
    }
}

#[test]
fn gaussian_transform_matches_closed_form() {
    let g = Grid::new(1, 16, 256).unwrap();
    let f = GridFunction::from_real_fn(g, |x: &[f64]| (-x[0] * x[0] / 2.0).exp());
    let fh = f.grid_ft().unwrap();
    for (m, v) in fh.data().iter().enumerate() {
        let xi = g.freq::<f64>(m);
        let expect = (2.0 * std::f64::consts::PI).sqrt() * (-xi * xi / 2.0).exp();
        assert!((v - C::new(expect, 0.0)).norm() <= 1e-12);
    }
}

#[test]
fn l2_amalgams_reduce_to_known_norms() {
    let g = Grid::new(2, 2, 32).unwrap();
    let f = random_field(g, 3);
    let l2 = f.lr_norm(2.0).unwrap();
    assert!((f.amalgam_norm(2.0, &[2.0, 2.0]).unwrap() - l2).abs() <= 1e-12 * l2);
    let sup = f.amalgam_norm(2.0, &[f64::INFINITY, f64::INFINITY]).unwrap();
    assert!((sup - f.l2ul_norm().unwrap()).abs() <= 1e-14);
}

#[test]
fn cube_anchors_differ_on_an_indicator() {
    // indicator of [0, 1): one corner cube, two half centered cubes
    let g = Grid::new(1, 2, 64).unwrap();
    let f = GridFunction::from_real_fn(g, |x: &[f64]| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 });
    let corner = f.amalgam_norm_anchored(2.0, &[1.0], CubeAnchor::Corner).unwrap();
    let centered = f.amalgam_norm(2.0, &[1.0]).unwrap();
    assert!((corner - 1.0).abs() < 1e-14);
    assert!((centered - 2f64.sqrt()).abs() < 1e-14);
}

#[test]
fn amalgam_rejects_bad_input() {
    let g = Grid::new(1, 2, 16).unwrap();
    let f = GridFunction::from_real_fn(g, |_: &[f64]| 1.0);
    assert!(f.amalgam_norm(0.5, &[1.0]).is_err());
    assert!(f.amalgam_norm(2.0, &[1.0, 1.0]).is_err());
    assert!(f.grid_ft().unwrap().amalgam_norm(2.0, &[1.0]).is_err());
    assert!(f.lr_norm(0.0).is_err());
    assert!(f.mixed_norm(&[(0, 1.0), (0, 2.0)]).is_err());
    // unit cubes need an integer number of samples per unit
    assert!(Grid::new(1, 8, 8).is_err());
}

#[test]
fn wraparound_flags_mass_at_the_edge() {
    let g = Grid::new(1, 8, 128).unwrap();
    assert!(GridFunction::from_real_fn(g, |_: &[f64]| 1.0).wraparound_warning());
    assert!(!GridFunction::from_real_fn(g, |x: &[f64]| (-x[0] * x[0]).exp()).wraparound_warning());
}

#[test]
fn random_band_limited_is_normalized_and_reproducible() {
    let g = Grid::new(1, 8, 128).unwrap();
    let f = GridFunction::random_band_limited(g, 3.0, 99).unwrap();
    assert!((f.lr_norm(2.0).unwrap() - 1.0f64).abs() < 1e-12);
    assert_eq!(f, GridFunction::random_band_limited(g, 3.0, 99).unwrap());
    assert_ne!(f, GridFunction::random_band_limited(g, 3.0, 100).unwrap());
    let fh = f.grid_ft().unwrap();
    for (m, v) in fh.data().iter().enumerate() {
        if g.freq::<f64>(m).abs() > 3.0 {
            assert!(v.norm() < 1e-12);
        }
    }
    assert!(GridFunction::random_band_limited(g, 100.0, 1).is_err());
}

#[test]
fn container_round_trip() {
    let g = Grid::new(2, 2, 16).unwrap();
    let f = random_field(g, 5);
    let mut buf = Vec::new();
    f.write_container(&mut buf).unwrap();
    assert_eq!(&buf[..4], b"BLGF");
    assert_eq!(buf.len(), 22 + 16 * g.len());
    let back = GridFunction::<f64>::read_container(buf.as_slice()).unwrap();
    assert_eq!(back, f);
    assert!(GridFunction::<f64>::read_container(&buf[..30]).is_err());
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(GridFunction::<f64>::read_container(bad.as_slice()).is_err());
}

#[test]
fn csv_lists_samples_in_order() {
    let g = Grid::new(1, 1, 4).unwrap();
    let f = GridFunction::from_real_fn(g, |x: &[f64]| x[0]);
    let mut buf = Vec::new();
    f.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,re,im");
    assert_eq!(lines.len(), 5);
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![-1.0, -1.0, 0.0]);
    let mut buf = Vec::new();
    f.grid_ft().unwrap().write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("xi,re,im"));
    let xs: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lebesgue_below_amalgam(seed in 0u64..10_000) {
        let g = Grid::new(1, 4, 64).unwrap();
        let f = random_field(g, seed);
        for r in [1.0, 1.5, 2.0] {
            let lr = f.lr_norm(r).unwrap();
            let am = f.amalgam_norm(2.0, &[r]).unwrap();
            prop_assert!(lr <= am * (1.0 + 1e-12), "r = {}: {} > {}", r, lr, am);
        }
    }

    #[test]
    fn amalgam_decreases_in_q(seed in 0u64..10_000) {
        let g = Grid::new(2, 2, 16).unwrap();
        let f = random_field(g, seed);
        let qs = [1.0, 1.5, 2.0, 4.0, f64::INFINITY];
        let vals: Vec<f64> = qs.iter().map(|&q| f.amalgam_norm(2.0, &[q, q]).unwrap()).collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mixed_norm_minkowski(seed in 0u64..10_000, p in 1.0f64..2.0, dq in 0.0f64..3.0) {
        let q = p + dq;
        let g = Grid::new(2, 2, 16).unwrap();
        let f = random_field(g, seed);
        let inner_p = f.mixed_norm(&[(0, p), (1, q)]).unwrap();
        let inner_q = f.mixed_norm(&[(1, q), (0, p)]).unwrap();
        prop_assert!(inner_p <= inner_q * (1.0 + 1e-12));
    }

    #[test]
    fn equal_exponent_mixed_norm_is_lebesgue(seed in 0u64..10_000, r in 1.0f64..4.0) {
        let g = Grid::new(2, 2, 16).unwrap();
        let f = random_field(g, seed);
        let a = f.mixed_norm(&[(0, r), (1, r)]).unwrap();
        let b = f.lr_norm(r).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }
}
