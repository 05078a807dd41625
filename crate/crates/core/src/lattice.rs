//! Finitely supported sequences on Z^n, index boxes and discrete norms.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{param, LabError, Result};
use crate::scalar::{CompensatedSum, Real};

/// A lattice point.
pub type Point = Vec<i64>;

/// The symmetric cube `{-R..R}^n`.
///
/// Points are enumerated lexicographically with the first coordinate varying
/// slowest, so index 0 is `(-R, .., -R)` and the last index is `(R, .., R)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct IndexBox {
    dim: usize,
    radius: i64,
}

impl IndexBox {
    pub fn new(dim: usize, radius: i64) -> Result<Self> {
        if dim == 0 {
            return param("box dimension must be positive");
        }
        if radius < 0 {
            return param(format!("box radius must be nonnegative, got {radius}"));
        }
        let side = (2 * radius + 1) as f64;
        if side.powi(dim as i32) > 1.0e9 {
            return Err(LabError::Resource(format!("box {{-{radius}..{radius}}}^{dim} is too large")));
        }
        Ok(Self { dim, radius })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn side(&self) -> usize {
        (2 * self.radius + 1) as usize
    }

    pub fn cardinality(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.dim && p.iter().all(|&c| c.abs() <= self.radius)
    }

    /// Lexicographic position of `p`, or `None` outside the box.
    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let side = self.side();
        Some(p.iter().fold(0usize, |acc, &c| acc * side + (c + self.radius) as usize))
    }

    pub fn point(&self, mut idx: usize) -> Point {
        let side = self.side();
        let mut p = vec![0i64; self.dim];
        for c in p.iter_mut().rev() {
            *c = (idx % side) as i64 - self.radius;
            idx /= side;
        }
        p
    }

    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.cardinality()).map(move |i| self.point(i))
    }

    /// The box containing every sum `p + q` with `p` in `self` and `q` in `other`.
    pub fn minkowski_sum(&self, other: &IndexBox) -> Result<IndexBox> {
        if self.dim != other.dim {
            return Err(LabError::Dimension { expected: self.dim, got: other.dim });
        }
        IndexBox::new(self.dim, self.radius + other.radius)
    }
}

/// Norm selector for [`SeqFunction::norm`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeqNorm<T> {
    /// `l^p`, `p` in `[1, inf]`.
    Lp(T),
    /// Weak `l^{q,inf}`, `q` in `[1, inf)`.
    Weak(T),
}

/// Finitely supported real sequence on Z^n.
///
/// Values are nonnegative unless the sequence was built with one of the
/// `signed` constructors; [`SeqFunction::is_signed`] reports which.
#[derive(Clone, Debug, PartialEq)]
pub struct SeqFunction<T> {
    dim: usize,
    values: BTreeMap<Point, T>,
    signed: bool,
}

impl<T: Real> SeqFunction<T> {
    pub fn zero(dim: usize) -> Self {
        Self { dim, values: BTreeMap::new(), signed: false }
    }

    fn build<I: IntoIterator<Item = (Point, T)>>(dim: usize, entries: I, signed: bool) -> Result<Self> {
        if dim == 0 {
            return param("sequence dimension must be positive");
        }
        let mut values = BTreeMap::new();
        for (p, v) in entries {
            if p.len() != dim {
                return Err(LabError::Dimension { expected: dim, got: p.len() });
            }
            if !v.is_finite() {
                return Err(LabError::Domain(format!("non-finite value at {p:?}")));
            }
            if !signed && v < T::zero() {
                return Err(LabError::Domain(format!("negative value {v} at {p:?}")));
            }
            if v != T::zero() {
                values.insert(p, v);
            } else {
                values.remove(&p);
            }
        }
        Ok(Self { dim, values, signed })
    }

    /// Nonnegative sequence from `(point, value)` pairs; later duplicates win.
    pub fn nonnegative<I: IntoIterator<Item = (Point, T)>>(dim: usize, entries: I) -> Result<Self> {
        Self::build(dim, entries, false)
    }

    /// Signed sequence (flagged as such).
    pub fn signed<I: IntoIterator<Item = (Point, T)>>(dim: usize, entries: I) -> Result<Self> {
        Self::build(dim, entries, true)
    }

    pub fn delta(point: Point, value: T) -> Result<Self> {
        let dim = point.len();
        Self::nonnegative(dim, [(point, value)])
    }

    pub fn indicator(b: &IndexBox) -> Self {
        Self::nonnegative(b.dim(), b.iter().map(|p| (p, T::one()))).expect("indicator is valid")
    }

    pub fn from_fn<F: FnMut(&[i64]) -> T>(b: &IndexBox, mut f: F) -> Result<Self> {
        Self::nonnegative(b.dim(), b.iter().map(|p| {
            let v = f(&p);
            (p, v)
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn get(&self, p: &[i64]) -> T {
        self.values.get(p).copied().unwrap_or_else(T::zero)
    }

    /// Support points with values, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Point, &T)> {
        self.values.iter()
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest `|coordinate|` over the support (0 for the zero sequence).
    pub fn support_radius(&self) -> i64 {
        self.values.keys().flat_map(|p| p.iter().map(|c| c.abs())).max().unwrap_or(0)
    }

    pub fn max_value(&self) -> T {
        self.values.values().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Restriction to a box.
    pub fn restrict(&self, b: &IndexBox) -> Self {
        Self {
            dim: self.dim,
            values: self.values.iter().filter(|(p, _)| b.contains(p)).map(|(p, v)| (p.clone(), *v)).collect(),
            signed: self.signed,
        }
    }

    /// Dense vector of values on a box, in the box's lexicographic order.
    pub fn dense_on(&self, b: &IndexBox) -> Result<Vec<T>> {
        if b.dim() != self.dim {
            return Err(LabError::Dimension { expected: self.dim, got: b.dim() });
        }
        let mut out = vec![T::zero(); b.cardinality()];
        for (p, v) in &self.values {
            if let Some(i) = b.index_of(p) {
                out[i] = *v;
            }
        }
        Ok(out)
    }

    /// Exact norm of the requested kind.
    pub fn norm(&self, kind: SeqNorm<T>) -> Result<T> {
        let mut mags: Vec<T> = self.values.values().map(|v| v.abs()).collect();
        match kind {
            SeqNorm::Lp(p) => {
                if p.is_nan() || p < T::one() {
                    return param(format!("l^p exponent must lie in [1, inf], got {p}"));
                }
                if p.is_infinite() {
                    return Ok(mags.into_iter().fold(T::zero(), T::max));
                }
                // ascending order keeps small terms from being swamped
                mags.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                let mut acc = CompensatedSum::new();
                for m in mags {
                    acc.add(m.powf(p));
                }
                Ok(acc.value().powf(p.recip()))
            }
            SeqNorm::Weak(q) => {
                if q.is_nan() || q < T::one() || q.is_infinite() {
                    return param(format!("weak l^q exponent must lie in [1, inf), got {q}"));
                }
                mags.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
                let inv = q.recip();
                Ok(mags
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| m * T::from_usize_lossy(i + 1).powf(inv))
                    .fold(T::zero(), T::max))
            }
        }
    }

    /// Pointwise scaling by a real constant.
    pub fn scaled(&self, c: T) -> Result<Self> {
        let signed = self.signed || c < T::zero();
        Self::build(self.dim, self.values.iter().map(|(p, v)| (p.clone(), *v * c)), signed)
    }

    /// Pointwise product with a sign sequence indexed by the same points.
    pub fn map_signed<F: FnMut(&[i64], T) -> T>(&self, mut f: F) -> Result<Self> {
        Self::build(self.dim, self.values.iter().map(|(p, v)| (p.clone(), f(p, *v))), true)
    }

    /// Writes `nu1,..,nun,value` rows with a header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("nu{i}")).collect();
        header.push("value".into());
        wr.write_record(&header)?;
        for (p, v) in &self.values {
            let mut row: Vec<String> = p.iter().map(|c| c.to_string()).collect();
            row.push(format!("{:e}", v.as_f64()));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the CSV layout written by [`SeqFunction::write_csv`].
    pub fn read_csv<R: Read>(r: R, signed: bool) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
        let headers = rd.headers()?.clone();
        if headers.len() < 2 || headers.get(headers.len() - 1) != Some("value") {
            return Err(LabError::Parse("expected header nu1,..,nun,value".into()));
        }
        let dim = headers.len() - 1;
        let mut entries = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            if rec.len() != dim + 1 {
                return Err(LabError::Parse(format!("row {} has {} fields, expected {}", line + 2, rec.len(), dim + 1)));
            }
            let mut p = Vec::with_capacity(dim);
            for f in rec.iter().take(dim) {
                p.push(f.parse::<i64>().map_err(|e| LabError::Parse(format!("row {}: {e}", line + 2)))?);
            }
            let v: f64 = rec[dim].parse().map_err(|e| LabError::Parse(format!("row {}: {e}", line + 2)))?;
            entries.push((p, T::lit(v)));
        }
        Self::build(dim, entries, signed)
    }
}

/// `k -> sum_{nu1 + nu2 = k} V(nu1, nu2) B(nu1) C(nu2)` with `V` on Z^{2n}.
///
/// Iterates over whichever of `supp V` and `supp B x supp C` is smaller.
pub fn seq_add_convolve<T: Real>(v: &SeqFunction<T>, b: &SeqFunction<T>, c: &SeqFunction<T>) -> Result<SeqFunction<T>> {
    let n = b.dim();
    if c.dim() != n {
        return Err(LabError::Dimension { expected: n, got: c.dim() });
    }
    if v.dim() != 2 * n {
        return Err(LabError::Dimension { expected: 2 * n, got: v.dim() });
    }
    let mut acc: BTreeMap<Point, CompensatedSum<T>> = BTreeMap::new();
    if v.support_len() <= b.support_len() * c.support_len() {
        for (p, &vv) in v.iter() {
            let (p1, p2) = p.split_at(n);
            let bv = b.get(p1);
            let cv = c.get(p2);
            if bv != T::zero() && cv != T::zero() {
                let k: Point = p1.iter().zip(p2).map(|(a, b)| a + b).collect();
                acc.entry(k).or_default().add(vv * bv * cv);
            }
        }
    } else {
        let mut key = vec![0i64; 2 * n];
        for (p1, &bv) in b.iter() {
            for (p2, &cv) in c.iter() {
                key[..n].copy_from_slice(p1);
                key[n..].copy_from_slice(p2);
                let vv = v.get(&key);
                if vv != T::zero() {
                    let k: Point = p1.iter().zip(p2.iter()).map(|(a, b)| a + b).collect();
                    acc.entry(k).or_default().add(vv * bv * cv);
                }
            }
        }
    }
    let signed = v.is_signed() || b.is_signed() || c.is_signed();
    SeqFunction::build(n, acc.into_iter().map(|(k, s)| (k, s.value())), signed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_enumeration_is_lexicographic() {
        let b = IndexBox::new(2, 1).unwrap();
        let pts: Vec<Point> = b.iter().collect();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], vec![-1, -1]);
        assert_eq!(pts[1], vec![-1, 0]);
        assert_eq!(pts[8], vec![1, 1]);
        for (i, p) in pts.iter().enumerate() {
            assert_eq!(b.index_of(p), Some(i));
        }
        assert_eq!(b.index_of(&[2, 0]), None);
    }

    #[test]
    fn delta_has_unit_norms() {
        let a = SeqFunction::<f64>::delta(vec![0], 1.0).unwrap();
        for p in [1.0, 1.5, 2.0, 7.0, f64::INFINITY] {
            assert_eq!(a.norm(SeqNorm::Lp(p)).unwrap(), 1.0);
        }
        assert_eq!(a.norm(SeqNorm::Weak(2.0)).unwrap(), 1.0);
    }

    #[test]
    fn three_ones_have_l2_root_three() {
        let a = SeqFunction::<f64>::indicator(&IndexBox::new(1, 1).unwrap());
        assert!((a.norm(SeqNorm::Lp(2.0)).unwrap() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn weak_norm_of_inverse_root_is_one() {
        let a = SeqFunction::<f64>::nonnegative(1, (1..=10_000i64).map(|k| (vec![k], (k as f64).powf(-0.5)))).unwrap();
        assert!((a.norm(SeqNorm::Weak(2.0)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_parameter_errors() {
        let a = SeqFunction::<f64>::delta(vec![0], 1.0).unwrap();
        assert!(a.norm(SeqNorm::Lp(0.5)).is_err());
        assert!(a.norm(SeqNorm::Weak(f64::INFINITY)).is_err());
        assert!(a.norm(SeqNorm::Weak(0.9)).is_err());
    }

    #[test]
    fn negative_values_rejected_unless_signed() {
        assert!(SeqFunction::<f64>::nonnegative(1, [(vec![0], -1.0)]).is_err());
        let s = SeqFunction::<f64>::signed(1, [(vec![0], -1.0)]).unwrap();
        assert!(s.is_signed());
        assert_eq!(s.get(&[0]), -1.0);
        assert_eq!(s.get(&[5]), 0.0);
    }

    #[test]
    fn convolve_single_terms() {
        let v = SeqFunction::<f64>::delta(vec![0, 0], 1.0).unwrap();
        let d = SeqFunction::<f64>::delta(vec![0], 1.0).unwrap();
        let out = seq_add_convolve(&v, &d, &d).unwrap();
        assert_eq!(out, d);

        let v = SeqFunction::<f64>::delta(vec![1, 2], 2.0).unwrap();
        let b = SeqFunction::delta(vec![1], 1.0).unwrap();
        let c = SeqFunction::delta(vec![2], 1.0).unwrap();
        let out = seq_add_convolve(&v, &b, &c).unwrap();
        assert_eq!(out.support_len(), 1);
        assert_eq!(out.get(&[3]), 2.0);
    }

    #[test]
    fn convolve_counts_lattice_pairs() {
        for r in [1i64, 3, 6] {
            let v = SeqFunction::<f64>::indicator(&IndexBox::new(2, r).unwrap());
            let b = SeqFunction::<f64>::indicator(&IndexBox::new(1, r).unwrap());
            let d = seq_add_convolve(&v, &b, &b).unwrap();
            for k in -3 * r..=3 * r {
                let expect = if k.abs() <= 2 * r { (2 * r + 1 - k.abs()) as f64 } else { 0.0 };
                assert_eq!(d.get(&[k]), expect);
            }
        }
    }

    #[test]
    fn convolve_dimension_mismatch() {
        let v = SeqFunction::<f64>::delta(vec![0], 1.0).unwrap();
        let d = SeqFunction::<f64>::delta(vec![0], 1.0).unwrap();
        assert!(matches!(seq_add_convolve(&v, &d, &d), Err(LabError::Dimension { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let a = SeqFunction::<f64>::nonnegative(2, [(vec![-1, 2], 0.25), (vec![3, 0], 1.5)]).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("nu1,nu2,value"));
        let b = SeqFunction::<f64>::read_csv(buf.as_slice(), false).unwrap();
        assert_eq!(a, b);
    }
}
