use std::fs::File;
use std::path::Path;

use super::{FactorSlot, Profile, Transform, WeightSpec};
use crate::error::{LabError, Result};
use crate::lattice::SeqFunction;
use crate::scalar::Real;

/// Grammar accepted by [`parse_weight`], printed on usage errors.
pub const WEIGHT_GRAMMAR: &str = "\
weight := atom['@'n] | tensor(weight;weight) | prod(weight;weight)
        | swap1(weight) | swap2(weight) | step(weight)
atom   := sum-power:M          (1+|nu1|+|nu2|)^M
        | bracket-power:M      <(nu1,nu2)>^M
        | split:M1,M2          <nu1>^M1 <nu2>^M2
        | coord:A11,A21[,A12,A22,..]  prod_j (1+|nu1_j|)^-A1j (1+|nu2_j|)^-A2j
        | const:C
        | left:M | right:M | sum-factor:M            <nu1>^M, <nu2>^M, <nu1+nu2>^M
        | left-oneplus:M | right-oneplus:M | sum-factor-oneplus:M   (1+|.|)^M
        | delta:I1,..,I2n[=VALUE]
        | table:PATH.csv       CSV with header nu1,..,nu2n,value
swap1 maps V to V(nu1+nu2, -nu2); swap2 maps V to V(-nu1, nu1+nu2).";

/// Parses the weight mini-language (see [`WEIGHT_GRAMMAR`]).
pub fn parse_weight<T: Real>(s: &str) -> Result<WeightSpec<T>> {
    parse_inner(s.trim())
}

fn perr<X>(msg: impl Into<String>) -> Result<X> {
    Err(LabError::Parse(msg.into()))
}

fn number<T: Real>(s: &str) -> Result<T> {
    s.trim()
        .parse::<f64>()
        .map(T::lit)
        .map_err(|_| LabError::Parse(format!("not a number: '{s}'")))
}

fn numbers<T: Real>(s: &str) -> Result<Vec<T>> {
    s.split(',').map(number).collect()
}

/// Splits `a;b` at the top-level semicolon.
fn split_pair(s: &str) -> Result<(&str, &str)> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ';' if depth == 0 => return Ok((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    perr(format!("expected 'A;B' inside '{s}'"))
}

fn call<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')
}

fn parse_inner<T: Real>(s: &str) -> Result<WeightSpec<T>> {
    if let Some(body) = call(s, "tensor") {
        let (a, b) = split_pair(body)?;
        return Ok(WeightSpec::tensor(parse_inner(a.trim())?, parse_inner(b.trim())?));
    }
    if let Some(body) = call(s, "prod") {
        let (a, b) = split_pair(body)?;
        return WeightSpec::product(parse_inner(a.trim())?, parse_inner(b.trim())?);
    }
    if let Some(body) = call(s, "swap1") {
        return Ok(parse_inner::<T>(body.trim())?.transformed(Transform::SumNegSecond));
    }
    if let Some(body) = call(s, "swap2") {
        return Ok(parse_inner::<T>(body.trim())?.transformed(Transform::NegFirstSum));
    }
    if let Some(body) = call(s, "step") {
        return Ok(parse_inner::<T>(body.trim())?.step_extend());
    }
    let Some((head, rest)) = s.split_once(':') else {
        return perr(format!("unknown weight '{s}'"));
    };
    if head == "table" {
        return table(Path::new(rest.trim()));
    }
    if head == "delta" {
        let (pt, val) = match rest.split_once('=') {
            Some((p, v)) => (p, number::<T>(v)?),
            None => (rest, T::one()),
        };
        let p: Vec<i64> = pt
            .split(',')
            .map(|c| c.trim().parse::<i64>().map_err(|_| LabError::Parse(format!("bad lattice coordinate '{c}'"))))
            .collect::<Result<_>>()?;
        if p.is_empty() || p.len() % 2 != 0 {
            return perr("delta needs an even number of coordinates");
        }
        return WeightSpec::delta(p, val);
    }
    if head == "coord" {
        let a: Vec<T> = numbers(rest)?;
        if a.is_empty() || a.len() % 2 != 0 {
            return perr("coord needs pairs A1j,A2j");
        }
        return WeightSpec::coord_product(a.chunks(2).map(|c| (c[0], c[1])).collect());
    }
    let (args, n) = match rest.rsplit_once('@') {
        Some((a, d)) => {
            let n = d.trim().parse::<usize>().map_err(|_| LabError::Parse(format!("bad dimension '@{d}'")))?;
            (a, n)
        }
        None => (rest, 1),
    };
    match head {
        "sum-power" => WeightSpec::sum_power(n, number(args)?),
        "bracket-power" => WeightSpec::bracket_power(n, number(args)?),
        "split" => {
            let m: Vec<T> = numbers(args)?;
            if m.len() != 2 {
                return perr("split needs M1,M2");
            }
            WeightSpec::split(n, m[0], m[1])
        }
        "const" => WeightSpec::constant(n, number(args)?),
        "left" => WeightSpec::factor(n, FactorSlot::Left, Profile::Bracket(number(args)?)),
        "right" => WeightSpec::factor(n, FactorSlot::Right, Profile::Bracket(number(args)?)),
        "sum-factor" => WeightSpec::factor(n, FactorSlot::Sum, Profile::Bracket(number(args)?)),
        "left-oneplus" => WeightSpec::factor(n, FactorSlot::Left, Profile::OnePlus(number(args)?)),
        "right-oneplus" => WeightSpec::factor(n, FactorSlot::Right, Profile::OnePlus(number(args)?)),
        "sum-factor-oneplus" => WeightSpec::factor(n, FactorSlot::Sum, Profile::OnePlus(number(args)?)),
        _ => perr(format!("unknown weight form '{head}'")),
    }
}

fn table<T: Real>(path: &Path) -> Result<WeightSpec<T>> {
    let f = File::open(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    let seq = SeqFunction::read_csv(f, false)?;
    WeightSpec::table(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog_atoms() {
        for s in [
            "sum-power:-0.5",
            "bracket-power:-0.5",
            "split:-0.25,-0.25",
            "coord:0.25,0.25",
            "const:1",
            "left:-0.25",
            "sum-power:-1@2",
            "tensor(const:1;split:0,-0.5)",
            "swap1(swap2(sum-power:-0.5))",
            "prod(left-oneplus:-0.25;right-oneplus:-0.25)",
            "step(delta:0,1=2)",
        ] {
            let w: WeightSpec<f64> = parse_weight(s).unwrap_or_else(|e| panic!("{s}: {e}"));
            let again: WeightSpec<f64> = parse_weight(&w.describe()).unwrap();
            assert_eq!(w, again, "{s}");
        }
    }

    #[test]
    fn dimension_suffix() {
        let w: WeightSpec<f64> = parse_weight("sum-power:-1@2").unwrap();
        assert_eq!(w.dim(), 2);
        let t: WeightSpec<f64> = parse_weight("tensor(const:1;coord:0.1,0.4)").unwrap();
        assert_eq!(t.dim(), 2);
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "nope", "sum-power:x", "split:1", "coord:1", "tensor(const:1)", "delta:1", "const:-1"] {
            assert!(parse_weight::<f64>(s).is_err(), "{s}");
        }
    }

    #[test]
    fn reads_table_from_csv() {
        let dir = std::env::temp_dir().join(format!("bilab-table-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("v.csv");
        std::fs::write(&path, "nu1,nu2,value\n0,0,1\n1,-1,0.5\n").unwrap();
        let w: WeightSpec<f64> = parse_weight(&format!("table:{}", path.display())).unwrap();
        assert_eq!(w.eval_int(&[1, -1]).unwrap(), 0.5);
        assert_eq!(w.eval_int(&[1, 1]).unwrap(), 0.0);
        std::fs::remove_dir_all(&dir).ok();
    }
}
