//! Weight functions `V` on Z^{2n} and `W` on R^{2n}.
//!
//! A [`WeightSpec`] is a small expression tree over catalog forms. Points are
//! passed as one flat slice `(nu1, nu2)` of length `2n`.

mod moderate;
mod parse;
mod vstar;

pub use moderate::{moderate_check, ModerateConfig, ModerateReport, PointFn, PointFunction};
pub use parse::{parse_weight, WEIGHT_GRAMMAR};
pub use vstar::{v_star, VStar, VStarSample};

use crate::error::{param, LabError, Result};
use crate::lattice::{IndexBox, SeqFunction, SeqNorm};
use crate::scalar::{euclid, euclid_int, Real};

/// One-variable profile `V0` used by the factor forms.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile<T> {
    /// `<nu>^m`
    Bracket(T),
    /// `(1 + |nu|)^m`
    OnePlus(T),
    /// Finitely supported table on Z^n.
    Table(SeqFunction<T>),
}

impl<T: Real> Profile<T> {
    fn eval(&self, p: &[T]) -> T {
        match self {
            Profile::Bracket(m) => (T::one() + p.iter().fold(T::zero(), |s, &v| s + v * v)).powf(*m / T::lit(2.0)),
            Profile::OnePlus(m) => (T::one() + euclid(p)).powf(*m),
            Profile::Table(t) => match integral_point(p) {
                Some(q) => t.get(&q),
                None => T::zero(),
            },
        }
    }

    fn eval_int(&self, p: &[i64]) -> T {
        match self {
            Profile::Table(t) => t.get(p),
            Profile::Bracket(m) => {
                let s: i64 = p.iter().map(|v| v * v).sum();
                T::from_i64_lossy(1 + s).powf(*m / T::lit(2.0))
            }
            Profile::OnePlus(m) => (T::one() + euclid_int::<T>(p)).powf(*m),
        }
    }

    fn sup(&self) -> T {
        match self {
            Profile::Bracket(m) | Profile::OnePlus(m) => {
                if *m <= T::zero() {
                    T::one()
                } else {
                    T::infinity()
                }
            }
            Profile::Table(t) => t.max_value(),
        }
    }

    fn is_lattice_only(&self) -> bool {
        matches!(self, Profile::Table(_))
    }
}

/// Which argument a factor weight reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorSlot {
    /// `V0(nu1)`
    Left,
    /// `V0(nu2)`
    Right,
    /// `V0(nu1 + nu2)`
    Sum,
}

/// Changes of variables preserving the class of bounded trilinear weights.
///
/// Both maps are involutions, so each variant is its own inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transform {
    /// `W(nu1, nu2) = V(nu1 + nu2, -nu2)`
    SumNegSecond,
    /// `W(nu1, nu2) = V(-nu1, nu1 + nu2)`
    NegFirstSum,
}

impl Transform {
    pub fn inverse(self) -> Self {
        self
    }

    fn apply<S: Copy + std::ops::Add<Output = S> + std::ops::Neg<Output = S>>(self, p: &[S], out: &mut [S]) {
        let n = p.len() / 2;
        let (a, b) = p.split_at(n);
        match self {
            Transform::SumNegSecond => {
                for j in 0..n {
                    out[j] = a[j] + b[j];
                    out[n + j] = -b[j];
                }
            }
            Transform::NegFirstSum => {
                for j in 0..n {
                    out[j] = -a[j];
                    out[n + j] = a[j] + b[j];
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightForm<T> {
    /// `(1 + |nu1| + |nu2|)^m`
    SumPower(T),
    /// `<(xi1, xi2)>^m`
    BracketPower(T),
    /// `<xi1>^m1 <xi2>^m2`
    Split(T, T),
    /// `prod_j prod_i (1 + |nu_{i,j}|)^{-a_{i,j}}`, entry `j` holds `(a_{1,j}, a_{2,j})`.
    CoordProduct(Vec<(T, T)>),
    Factor(FactorSlot, Profile<T>),
    Constant(T),
    /// Table on Z^{2n}; reads 0 off the support and off the lattice.
    Table(SeqFunction<T>),
    Tensor(Box<WeightSpec<T>>, Box<WeightSpec<T>>),
    Transformed(Box<WeightSpec<T>>, Transform),
    /// Pointwise product of two weights of the same dimension.
    Product(Box<WeightSpec<T>>, Box<WeightSpec<T>>),
    /// Piecewise constant extension over the unit cubes `(nu1 + Q) x (nu2 + Q)`.
    StepExtended(Box<WeightSpec<T>>),
}

/// A nonnegative weight on Z^n x Z^n or R^n x R^n.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpec<T> {
    dim: usize,
    form: WeightForm<T>,
}

fn integral_point<T: Real>(p: &[T]) -> Option<Vec<i64>> {
    p.iter()
        .map(|&v| {
            let r = v.round();
            if r == v {
                r.to_i64()
            } else {
                None
            }
        })
        .collect()
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        param("weight dimension n must be positive")
    } else {
        Ok(())
    }
}

fn check_finite<T: Real>(x: T, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        param(format!("{what} must be finite"))
    }
}

impl<T: Real> WeightSpec<T> {
    pub fn sum_power(n: usize, m: T) -> Result<Self> {
        check_dim(n)?;
        check_finite(m, "exponent")?;
        Ok(Self { dim: n, form: WeightForm::SumPower(m) })
    }

    pub fn bracket_power(n: usize, m: T) -> Result<Self> {
        check_dim(n)?;
        check_finite(m, "exponent")?;
        Ok(Self { dim: n, form: WeightForm::BracketPower(m) })
    }

    pub fn split(n: usize, m1: T, m2: T) -> Result<Self> {
        check_dim(n)?;
        check_finite(m1, "exponent")?;
        check_finite(m2, "exponent")?;
        Ok(Self { dim: n, form: WeightForm::Split(m1, m2) })
    }

    /// `a[j] = (a_{1,j}, a_{2,j})`, so `n = a.len()`.
    pub fn coord_product(a: Vec<(T, T)>) -> Result<Self> {
        check_dim(a.len())?;
        for &(x, y) in &a {
            check_finite(x, "exponent")?;
            check_finite(y, "exponent")?;
        }
        Ok(Self { dim: a.len(), form: WeightForm::CoordProduct(a) })
    }

    pub fn factor(n: usize, slot: FactorSlot, profile: Profile<T>) -> Result<Self> {
        check_dim(n)?;
        if let Profile::Table(t) = &profile {
            if t.dim() != n {
                return Err(LabError::Dimension { expected: n, got: t.dim() });
            }
            if t.is_signed() {
                return Err(LabError::Domain("weight profiles must be nonnegative".into()));
            }
        }
        Ok(Self { dim: n, form: WeightForm::Factor(slot, profile) })
    }

    pub fn constant(n: usize, c: T) -> Result<Self> {
        check_dim(n)?;
        if !(c >= T::zero()) || !c.is_finite() {
            return Err(LabError::Domain(format!("constant weight must be finite and nonnegative, got {c}")));
        }
        Ok(Self { dim: n, form: WeightForm::Constant(c) })
    }

    /// Table weight from a sequence on Z^{2n}.
    pub fn table(v: SeqFunction<T>) -> Result<Self> {
        if v.dim() % 2 != 0 {
            return param(format!("table weights live on Z^(2n); got dimension {}", v.dim()));
        }
        if v.is_signed() {
            return Err(LabError::Domain("table weights must be nonnegative".into()));
        }
        Ok(Self { dim: v.dim() / 2, form: WeightForm::Table(v) })
    }

    /// Point mass at `(nu1, nu2)` with the given value.
    pub fn delta(point: Vec<i64>, value: T) -> Result<Self> {
        Self::table(SeqFunction::delta(point, value)?)
    }

    pub fn tensor(a: WeightSpec<T>, b: WeightSpec<T>) -> Self {
        Self { dim: a.dim + b.dim, form: WeightForm::Tensor(Box::new(a), Box::new(b)) }
    }

    pub fn transformed(self, t: Transform) -> Self {
        Self { dim: self.dim, form: WeightForm::Transformed(Box::new(self), t) }
    }

    pub fn product(a: WeightSpec<T>, b: WeightSpec<T>) -> Result<Self> {
        if a.dim != b.dim {
            return Err(LabError::Dimension { expected: a.dim, got: b.dim });
        }
        Ok(Self { dim: a.dim, form: WeightForm::Product(Box::new(a), Box::new(b)) })
    }

    /// The step extension `V~`: constant on `(nu1 + Q) x (nu2 + Q)`, `Q = [-1/2, 1/2)^n`.
    pub fn step_extend(self) -> Self {
        Self { dim: self.dim, form: WeightForm::StepExtended(Box::new(self)) }
    }

    /// `(1 + |nu1| + |nu2|)^{-n/2}`.
    pub fn preset_critical_sum(n: usize) -> Result<Self> {
        Self::sum_power(n, -T::from_usize_lossy(n) / T::lit(2.0))
    }

    /// `(1 + |nu1|)^{-a1} (1 + |nu2|)^{-a2}` with `a1, a2 > 0`, `a1 + a2 = n/2`.
    pub fn preset_product_two(n: usize, a1: T, a2: T) -> Result<Self> {
        check_dim(n)?;
        let half = T::from_usize_lossy(n) / T::lit(2.0);
        if !(a1 > T::zero() && a2 > T::zero()) || ((a1 + a2) - half).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) {
            return param(format!("preset requires a1, a2 > 0 and a1 + a2 = {half}, got ({a1}, {a2})"));
        }
        Self::product(
            Self::factor(n, FactorSlot::Left, Profile::OnePlus(-a1))?,
            Self::factor(n, FactorSlot::Right, Profile::OnePlus(-a2))?,
        )
    }

    /// Coordinate product with `a_{i,j} > 0`, `a_{1,j} + a_{2,j} = 1/2`.
    pub fn preset_coord_product(a: Vec<(T, T)>) -> Result<Self> {
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
        for (j, &(x, y)) in a.iter().enumerate() {
            if !(x > T::zero() && y > T::zero()) || ((x + y) - T::lit(0.5)).abs() > tol {
                return param(format!("coordinate {j}: need a1, a2 > 0 with a1 + a2 = 1/2, got ({x}, {y})"));
            }
        }
        Self::coord_product(a)
    }

    /// `n`, the dimension of each of the two arguments.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &WeightForm<T> {
        &self.form
    }

    /// True if the weight is only defined on lattice points (reads 0 elsewhere).
    pub fn is_lattice_only(&self) -> bool {
        match &self.form {
            WeightForm::Table(_) => true,
            WeightForm::Factor(_, p) => p.is_lattice_only(),
            WeightForm::Tensor(a, b) | WeightForm::Product(a, b) => a.is_lattice_only() || b.is_lattice_only(),
            WeightForm::Transformed(a, _) => a.is_lattice_only(),
            _ => false,
        }
    }

    /// Evaluation at a real point of length `2n`.
    pub fn eval(&self, p: &[T]) -> Result<T> {
        if p.len() != 2 * self.dim {
            return Err(LabError::Dimension { expected: 2 * self.dim, got: p.len() });
        }
        Ok(self.eval_unchecked(p))
    }

    /// Evaluation at a lattice point of length `2n`.
    pub fn eval_int(&self, p: &[i64]) -> Result<T> {
        if p.len() != 2 * self.dim {
            return Err(LabError::Dimension { expected: 2 * self.dim, got: p.len() });
        }
        Ok(self.eval_int_unchecked(p))
    }

    pub(crate) fn eval_unchecked(&self, p: &[T]) -> T {
        let n = self.dim;
        let two = T::lit(2.0);
        match &self.form {
            WeightForm::SumPower(m) => (T::one() + euclid(&p[..n]) + euclid(&p[n..])).powf(*m),
            WeightForm::BracketPower(m) => {
                (T::one() + p.iter().fold(T::zero(), |s, &v| s + v * v)).powf(*m / two)
            }
            WeightForm::Split(m1, m2) => {
                let a = T::one() + p[..n].iter().fold(T::zero(), |s, &v| s + v * v);
                let b = T::one() + p[n..].iter().fold(T::zero(), |s, &v| s + v * v);
                a.powf(*m1 / two) * b.powf(*m2 / two)
            }
            WeightForm::CoordProduct(a) => a.iter().enumerate().fold(T::one(), |acc, (j, &(a1, a2))| {
                acc * (T::one() + p[j].abs()).powf(-a1) * (T::one() + p[n + j].abs()).powf(-a2)
            }),
            WeightForm::Factor(slot, prof) => match slot {
                FactorSlot::Left => prof.eval(&p[..n]),
                FactorSlot::Right => prof.eval(&p[n..]),
                FactorSlot::Sum => {
                    let s: Vec<T> = (0..n).map(|j| p[j] + p[n + j]).collect();
                    prof.eval(&s)
                }
            },
            WeightForm::Constant(c) => *c,
            WeightForm::Table(t) => match integral_point(p) {
                Some(q) => t.get(&q),
                None => T::zero(),
            },
            WeightForm::Tensor(a, b) => {
                let (pa, pb) = split_tensor_point(p, n, a.dim);
                a.eval_unchecked(&pa) * b.eval_unchecked(&pb)
            }
            WeightForm::Transformed(a, t) => {
                let mut q = vec![T::zero(); 2 * n];
                t.apply(p, &mut q);
                a.eval_unchecked(&q)
            }
            WeightForm::Product(a, b) => a.eval_unchecked(p) * b.eval_unchecked(p),
            WeightForm::StepExtended(a) => {
                let half = T::lit(0.5);
                let q: Vec<i64> = p.iter().map(|&v| (v + half).floor().to_i64().unwrap_or(i64::MAX)).collect();
                a.eval_int_unchecked(&q)
            }
        }
    }

    pub(crate) fn eval_int_unchecked(&self, p: &[i64]) -> T {
        let n = self.dim;
        match &self.form {
            WeightForm::Table(t) => t.get(p),
            WeightForm::SumPower(m) => (T::one() + euclid_int::<T>(&p[..n]) + euclid_int::<T>(&p[n..])).powf(*m),
            WeightForm::Factor(slot, prof) => match slot {
                FactorSlot::Left => prof.eval_int(&p[..n]),
                FactorSlot::Right => prof.eval_int(&p[n..]),
                FactorSlot::Sum => {
                    let s: Vec<i64> = (0..n).map(|j| p[j] + p[n + j]).collect();
                    prof.eval_int(&s)
                }
            },
            WeightForm::Tensor(a, b) => {
                let (pa, pb) = split_tensor_point(p, n, a.dim);
                a.eval_int_unchecked(&pa) * b.eval_int_unchecked(&pb)
            }
            WeightForm::Transformed(a, t) => {
                let mut q = vec![0i64; 2 * n];
                t.apply(p, &mut q);
                a.eval_int_unchecked(&q)
            }
            WeightForm::Product(a, b) => a.eval_int_unchecked(p) * b.eval_int_unchecked(p),
            WeightForm::StepExtended(a) => a.eval_int_unchecked(p),
            _ => {
                let q: Vec<T> = p.iter().map(|&v| T::from_i64_lossy(v)).collect();
                self.eval_unchecked(&q)
            }
        }
    }

    /// An upper bound for `sup V` over the whole lattice (may be `inf`).
    pub fn sup_bound(&self) -> T {
        match &self.form {
            WeightForm::SumPower(m) | WeightForm::BracketPower(m) => {
                if *m <= T::zero() {
                    T::one()
                } else {
                    T::infinity()
                }
            }
            WeightForm::Split(a, b) => {
                if *a <= T::zero() && *b <= T::zero() {
                    T::one()
                } else {
                    T::infinity()
                }
            }
            WeightForm::CoordProduct(a) => {
                if a.iter().all(|&(x, y)| x >= T::zero() && y >= T::zero()) {
                    T::one()
                } else {
                    T::infinity()
                }
            }
            WeightForm::Factor(_, p) => p.sup(),
            WeightForm::Constant(c) => *c,
            WeightForm::Table(t) => t.max_value(),
            WeightForm::Tensor(a, b) | WeightForm::Product(a, b) => a.sup_bound() * b.sup_bound(),
            WeightForm::Transformed(a, _) | WeightForm::StepExtended(a) => a.sup_bound(),
        }
    }

    /// Restriction to a box on Z^{2n} as a table.
    pub fn restrict(&self, b: &IndexBox) -> Result<SeqFunction<T>> {
        if b.dim() != 2 * self.dim {
            return Err(LabError::Dimension { expected: 2 * self.dim, got: b.dim() });
        }
        SeqFunction::from_fn(b, |p| self.eval_int_unchecked(p))
    }

    /// Canonical mini-language rendering (tables render by support size).
    pub fn describe(&self) -> String {
        let suffix = if self.dim == 1 { String::new() } else { format!("@{}", self.dim) };
        match &self.form {
            WeightForm::SumPower(m) => format!("sum-power:{m}{suffix}"),
            WeightForm::BracketPower(m) => format!("bracket-power:{m}{suffix}"),
            WeightForm::Split(a, b) => format!("split:{a},{b}{suffix}"),
            WeightForm::CoordProduct(a) => {
                let parts: Vec<String> = a.iter().map(|(x, y)| format!("{x},{y}")).collect();
                format!("coord:{}", parts.join(","))
            }
            WeightForm::Factor(slot, prof) => {
                let head = match slot {
                    FactorSlot::Left => "left",
                    FactorSlot::Right => "right",
                    FactorSlot::Sum => "sum-factor",
                };
                match prof {
                    Profile::Bracket(m) => format!("{head}:{m}{suffix}"),
                    Profile::OnePlus(m) => format!("{head}-oneplus:{m}{suffix}"),
                    Profile::Table(t) => format!("{head}:table[{} pts]{suffix}", t.support_len()),
                }
            }
            WeightForm::Constant(c) => format!("const:{c}{suffix}"),
            WeightForm::Table(t) if t.support_len() == 1 => {
                let (p, v) = t.iter().next().expect("one point");
                let coords: Vec<String> = p.iter().map(|c| c.to_string()).collect();
                format!("delta:{}={v}", coords.join(","))
            }
            WeightForm::Table(t) => format!("table[{} pts]{suffix}", t.support_len()),
            WeightForm::Tensor(a, b) => format!("tensor({};{})", a.describe(), b.describe()),
            WeightForm::Transformed(a, Transform::SumNegSecond) => format!("swap1({})", a.describe()),
            WeightForm::Transformed(a, Transform::NegFirstSum) => format!("swap2({})", a.describe()),
            WeightForm::Product(a, b) => format!("prod({};{})", a.describe(), b.describe()),
            WeightForm::StepExtended(a) => format!("step({})", a.describe()),
        }
    }
}

impl<T: Real> std::fmt::Display for WeightSpec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Splits a point `((m1, m1'), (m2, m2'))` into `(m1, m2)` and `(m1', m2')`.
fn split_tensor_point<S: Copy>(p: &[S], n: usize, da: usize) -> (Vec<S>, Vec<S>) {
    let (x1, x2) = p.split_at(n);
    let mut pa = Vec::with_capacity(2 * da);
    pa.extend_from_slice(&x1[..da]);
    pa.extend_from_slice(&x2[..da]);
    let mut pb = Vec::with_capacity(2 * (n - da));
    pb.extend_from_slice(&x1[da..]);
    pb.extend_from_slice(&x2[da..]);
    (pa, pb)
}

/// Weak `l^{4,inf}` quasi-norm of `V` restricted to a box on Z^{2n}.
pub fn weak_l4_norm<T: Real>(v: &WeightSpec<T>, b: &IndexBox) -> Result<T> {
    v.restrict(b)?.norm(SeqNorm::Weak(T::lit(4.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> WeightSpec<f64> {
        parse_weight(s).unwrap()
    }

    #[test]
    fn catalog_point_values() {
        assert_eq!(w("sum-power:-0.5").eval(&[0.0, 0.0]).unwrap(), 1.0);
        let b = w("bracket-power:-0.5").eval(&[3.0, 4.0]).unwrap();
        assert!((b - 26f64.powf(-0.25)).abs() < 1e-15);
        assert!((b - 0.442850).abs() < 1e-6);
        let s = w("split:-0.25,-0.25").eval(&[1.0, 1.0]).unwrap();
        assert!((s - 2f64.powf(-0.25)).abs() < 1e-14);
    }

    #[test]
    fn eval_checks_dimension() {
        assert!(matches!(w("const:1").eval(&[0.0]), Err(LabError::Dimension { .. })));
    }

    #[test]
    fn step_extension_is_constant_on_cubes() {
        let v = WeightSpec::<f64>::delta(vec![0, 0], 1.0).unwrap().step_extend();
        assert_eq!(v.eval(&[0.4, -0.4]).unwrap(), 1.0);
        assert_eq!(v.eval(&[-0.5, 0.49]).unwrap(), 1.0);
        assert_eq!(v.eval(&[0.5, 0.0]).unwrap(), 0.0);
        assert_eq!(v.eval(&[0.0, -0.51]).unwrap(), 0.0);
        let sp = w("sum-power:-0.5");
        let st = sp.clone().step_extend();
        for a in -4..=4 {
            for b in -4..=4 {
                let p = [a as f64, b as f64];
                assert_eq!(st.eval(&p).unwrap(), sp.eval(&p).unwrap());
            }
        }
    }

    #[test]
    fn transform_moves_delta_to_preimage() {
        let v = WeightSpec::<f64>::delta(vec![1, 2], 1.0).unwrap().transformed(Transform::SumNegSecond);
        assert_eq!(v.eval_int(&[3, -2]).unwrap(), 1.0);
        let b = IndexBox::new(2, 5).unwrap();
        let total: f64 = b.iter().map(|p| v.eval_int(&p).unwrap()).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn transform_substitutes_into_sum_power() {
        let v = w("swap1(sum-power:-0.5)");
        for (a, b) in [(1i64, 2i64), (-3, 1), (0, 5)] {
            let expect = (1.0 + ((a + b).abs() + b.abs()) as f64).powf(-0.5);
            assert!((v.eval_int(&[a, b]).unwrap() - expect).abs() < 1e-15);
        }
        let c = w("swap2(const:2.5)");
        assert_eq!(c.eval_int(&[7, -3]).unwrap(), 2.5);
    }

    #[test]
    fn tensor_of_coord_factors_is_two_dim_coord_product() {
        let t = w("tensor(coord:0.1,0.4;coord:0.3,0.2)");
        let direct = WeightSpec::<f64>::preset_coord_product(vec![(0.1, 0.4), (0.3, 0.2)]).unwrap();
        let b = IndexBox::new(4, 2).unwrap();
        for p in b.iter() {
            let x = t.eval_int(&p).unwrap();
            let y = direct.eval_int(&p).unwrap();
            assert!((x - y).abs() < 1e-15, "{p:?}");
        }
        let d = w("tensor(delta:0,0;delta:0,0)");
        assert_eq!(d.eval_int(&[0, 0, 0, 0]).unwrap(), 1.0);
        assert_eq!(d.eval_int(&[0, 1, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn presets_enforce_exponent_constraints() {
        assert!(WeightSpec::<f64>::preset_product_two(1, 0.25, 0.25).is_ok());
        assert!(WeightSpec::<f64>::preset_product_two(1, 0.5, 0.0).is_err());
        assert!(WeightSpec::<f64>::preset_product_two(2, 0.25, 0.25).is_err());
        assert!(WeightSpec::<f64>::preset_coord_product(vec![(0.25, 0.25), (0.1, 0.4)]).is_ok());
        assert!(WeightSpec::<f64>::preset_coord_product(vec![(0.25, 0.3)]).is_err());
    }

    #[test]
    fn weak_l4_examples() {
        let d = WeightSpec::<f64>::delta(vec![0, 0], 1.0).unwrap();
        assert_eq!(weak_l4_norm(&d, &IndexBox::new(2, 3).unwrap()).unwrap(), 1.0);
        for r in [2i64, 5, 9] {
            let c = w("const:1");
            let got = weak_l4_norm(&c, &IndexBox::new(2, r).unwrap()).unwrap();
            let expect = ((2 * r + 1) as f64).powf(0.5);
            assert!((got - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn critical_sum_power_weak_l4_plateaus() {
        let v = w("sum-power:-0.5");
        let vals: Vec<f64> =
            [8i64, 16, 32].iter().map(|&r| weak_l4_norm(&v, &IndexBox::new(2, r).unwrap()).unwrap()).collect();
        // counts of points with (1+|a|+|b|)^{-1/2} > t scale like t^{-4}, so the sup is attained early
        assert!(vals[1] - vals[0] >= 0.0);
        assert!(vals[2] - vals[1] <= vals[1] - vals[0] + 1e-15);
        assert!((vals[2] - vals[0]).abs() < 0.05 * vals[0]);
    }

    #[test]
    fn sup_bounds() {
        assert_eq!(w("sum-power:-0.5").sup_bound(), 1.0);
        assert!(w("sum-power:0.5").sup_bound().is_infinite());
        assert_eq!(w("const:3").sup_bound(), 3.0);
    }

    #[test]
    fn f32_evaluation_agrees() {
        let v32: WeightSpec<f32> = parse_weight("bracket-power:-0.5").unwrap();
        let x = v32.eval(&[3.0, 4.0]).unwrap();
        assert!((x as f64 - 26f64.powf(-0.25)).abs() < 1e-6);
    }
}
