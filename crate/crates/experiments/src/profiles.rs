//! Radial cutoff profiles built from the Littlewood–Paley cutoff.

use bilab_core::lpcalc::lp_phi;
use serde::Serialize;

use crate::error::{ExpError, Result};

/// Smooth radial profile: 1 on `[b, c]`, supported in `[a, d]`.
///
/// The ramps are rescaled copies of `lp_phi`, so the profile is as smooth as
/// the cutoff used by the dyadic filters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Plateau {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Plateau {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if !(a.is_finite() && d.is_finite() && 0.0 <= a && a < b && b <= c && c < d) {
            return Err(ExpError::Construction(format!("profile needs 0 <= a < b <= c < d, got ({a}, {b}, {c}, {d})")));
        }
        Ok(Self { a, b, c, d })
    }

    /// Bump on `(a, d)` peaking at the midpoint.
    pub fn bump(a: f64, d: f64) -> Result<Self> {
        let m = 0.5 * (a + d);
        Self::new(a, m, m, d)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.d)
    }

    pub fn plateau(&self) -> (f64, f64) {
        (self.b, self.c)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let Self { a, b, c, d } = *self;
        if r <= a || r >= d {
            0.0
        } else if r < b {
            lp_phi(2.0 - (r - a) / (b - a))
        } else if r <= c {
            1.0
        } else {
            lp_phi(1.0 + (r - c) / (d - c))
        }
    }

    /// `int_{-inf}^{inf} P(|t|)^p dt`.
    pub fn line_integral(&self, p: i32) -> f64 {
        2.0 * simpson(|t| self.eval(t).powi(p), self.a, self.d, 20_000)
    }
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Outer symbol profile of the range construction: 1 on `[2^{-1/4}, 2^{1/4}]`,
/// supported in `[2^{-1/2}, 2^{1/2}]`.
pub fn range_outer() -> Plateau {
    Plateau { a: 2f64.powf(-0.5), b: 2f64.powf(-0.25), c: 2f64.powf(0.25), d: 2f64.powf(0.5) }
}

/// Data profile of the range construction, supported in `[2^{-3/4}, 2^{-1/4}]`.
pub fn range_data() -> Plateau {
    let (a, d) = (2f64.powf(-0.75), 2f64.powf(-0.25));
    let m = 0.5 * (a + d);
    Plateau { a, b: m, c: m, d }
}

/// Annular data profile of the smoothness construction, supported in `[1/2, 2]`.
pub fn annulus() -> Plateau {
    Plateau { a: 0.5, b: 1.25, c: 1.25, d: 2.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_shape() {
        let p = range_outer();
        assert_eq!(p.eval(p.a), 0.0);
        assert_eq!(p.eval(1.0), 1.0);
        assert_eq!(p.eval(p.b), 1.0);
        assert_eq!(p.eval(p.d + 1e-9), 0.0);
        let mid = p.eval(0.5 * (p.a + p.b));
        assert!((mid - 0.5).abs() < 1e-12);
        assert!(Plateau::new(1.0, 0.5, 2.0, 3.0).is_err());
    }

    #[test]
    fn ramps_are_monotone() {
        let p = annulus();
        let xs: Vec<f64> = (0..=200).map(|i| 0.5 + 0.75 * i as f64 / 200.0).collect();
        assert!(xs.windows(2).all(|w| p.eval(w[1]) >= p.eval(w[0])));
    }

    #[test]
    fn simpson_integral_of_a_box_like_profile() {
        // sandwiched between twice the plateau and twice the support
        let p = Plateau::new(0.0, 1e-3, 1.0, 1.0 + 1e-3).unwrap();
        let i = p.line_integral(1);
        assert!((2.0 * (1.0 - 1e-3)..=2.0 * (1.0 + 1e-3)).contains(&i), "{i}");
    }
}
