//! Option tables, config files and the resolved run configuration.
//!
//! Every option is a string keyed by its long flag name. Values are resolved
//! with precedence flag > config file > default and echoed into the outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bilab_core::fieldgrid::Grid;
use bilab_core::trilinear::DEFAULT_SEED;
use clap::{Arg, ArgAction, ArgMatches, Command};
use serde::Serialize;
use thiserror::Error;

/// Environment variable holding the worker thread count.
pub const THREADS_VAR: &str = "BILAB_THREADS";

/// A problem with the command line, a config file or a referenced path.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

#[derive(Clone, Copy, Debug)]
pub struct Opt {
    pub key: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
    /// Boolean switch (`--plot`) rather than `--key VALUE`.
    pub switch: bool,
}

const fn opt(key: &'static str, default: Option<&'static str>, help: &'static str) -> Opt {
    Opt { key, default, help, switch: false }
}

const fn switch(key: &'static str, help: &'static str) -> Opt {
    Opt { key, default: Some("false"), help, switch: true }
}

pub const COMMANDS: [(&str, &str); 9] = [
    ("certify", "Estimate trilinear form norms over a radius schedule and fit the growth"),
    ("norm", "Estimate the trilinear form norm of a weight on one box"),
    ("apply", "Apply a bilinear operator to two sampled functions"),
    ("besov", "Partial sums of a Besov-type symbol norm"),
    ("sharpness", "Growth experiments for the range and smoothness constructions"),
    ("randomsign", "Random-sign lower bound experiment"),
    ("ghs", "Dyadic decay and Cauchy test for a multiplier on the Fourier side"),
    ("sweep", "Empirical operator-norm ratios over a bandwidth schedule"),
    ("selftest", "Run the acceptance suite"),
];

const SOLVER: [Opt; 3] = [
    opt("restarts", Some("8"), "random restarts of the alternating maximization"),
    opt("max-iters", Some("500"), "cycles per restart"),
    opt("tol", Some("1e-9"), "relative objective change that ends a restart"),
];

pub fn options(command: &str) -> Vec<Opt> {
    let mut v = match command {
        "certify" => vec![
            opt("weight", None, "weight string (required)"),
            opt("radii", Some("4,8,16,32"), "strictly increasing box radii"),
            opt("expect", Some("none"), "none | bounded | growing; a mismatch exits with 2"),
            switch("plot", "also write an SVG of the fit"),
        ],
        "norm" => vec![
            opt("weight", None, "weight string (required)"),
            opt("radius", Some("2"), "radius of the box carrying B and C"),
            opt("method", Some("alt"), "alt | oracle | both"),
        ],
        "apply" => vec![
            opt("symbol", Some("const:1"), "symbol string"),
            opt("f1", Some("gauss"), "gauss | random:BAND | file:PATH"),
            opt("f2", Some("gauss"), "gauss | random:BAND | file:PATH"),
            opt("grid", Some("16,256"), "half width and samples per axis, L,N"),
            opt("check", Some("none"), "none | product; a failed check exits with 2"),
        ],
        "besov" => vec![
            opt("symbol", Some("bracket-power:-0.5"), "symbol string"),
            opt("weight", Some("const:1"), "weight W in the uniformly local norm"),
            opt("s", Some("0,0,0"), "smoothness exponents, one per group"),
            opt("mode", Some("star"), "star | vec"),
            opt("x-grid", Some("1,4"), "x axis, L,N"),
            opt("xi-grid", Some("8,128"), "frequency axes, L,N"),
            opt("margin", Some("2"), "unit cubes excluded next to each frequency edge"),
            opt("expect", Some("none"), "none | summable (increment ratios <= 1/2 beyond shell 3)"),
        ],
        "sharpness" => vec![
            opt("case", Some("range"), "range | s0 | s1 | s1s2"),
            opt("r", Some("2"), "target exponent(s), comma separated for range"),
            opt("K", Some("auto"), "largest scale index (auto: 5 for range, 4 otherwise)"),
            opt("s0", Some("0.25"), "x smoothness for case s0"),
            opt("s1", Some("0"), "first frequency smoothness for s1 and s1s2"),
            opt("s2", Some("0.75"), "second frequency smoothness for s1s2"),
            switch("plot", "also write an SVG of the fit"),
        ],
        "randomsign" => vec![
            opt("weight", Some("const:1"), "weight string"),
            opt("radii", Some("4,8,16,32"), "box radii"),
            opt("trials", Some("8"), "random sign draws per radius (at least 8)"),
            opt("r", Some("1"), "target exponent"),
            opt("grid", Some("64,4096"), "one-dimensional grid, L,N"),
            switch("plot", "also write an SVG of the fit"),
        ],
        "ghs" => vec![
            opt("symbol", Some("bracket-power:-0.625"), "bracket-power:M | gaussian"),
            opt("q", Some("3.6"), "integrability exponent, below 4"),
            opt("grid", Some("128,2048"), "one-dimensional grid, L,N"),
            opt("band", Some("8"), "bandwidth of the random test functions"),
            opt("trials", Some("8"), "random test pairs"),
            opt("kernel-exponent", Some("6"), "decay exponent of the kernel weight"),
            switch("plot", "also write an SVG of the dyadic sup norms"),
        ],
        "sweep" => vec![
            opt("symbol", Some("weight:step(sum-power:-0.5)"), "symbol string"),
            opt("target", Some("amalgam:1"), "lebesgue:R | amalgam:R1,..,Rn"),
            opt("grid", Some("8,512"), "half width and samples per axis, L,N"),
            opt("bandwidths", Some("4,8,16,32,64"), "increasing bandwidth schedule"),
            opt("trials", Some("16"), "random pairs per bandwidth (at least 8)"),
            opt("expect", Some("none"), "none | bounded (slope <= 0.15) | growing"),
            switch("plot", "also write an SVG of the fit"),
        ],
        "selftest" => vec![opt("only", Some("all"), "comma separated criterion ids, or all")],
        _ => vec![],
    };
    if matches!(command, "norm" | "certify") {
        v.extend(SOLVER);
    }
    v.extend([
        opt("seed", None, "base seed (default: the documented constant)"),
        opt("out-dir", Some("."), "existing directory receiving the outputs"),
        opt("out", None, "JSON output path; CSV and SVG go next to it"),
    ]);
    v
}

pub fn cli() -> Command {
    let mut cmd = Command::new("bilab")
        .about("Numerical laboratory for bilinear pseudo-differential operators")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .after_help(format!("Worker threads are read from {THREADS_VAR}."));
    for (name, about) in COMMANDS {
        let mut sub = Command::new(name).about(about).arg(
            Arg::new("config").long("config").value_name("FILE").help("key=value file; flags take precedence"),
        );
        for o in options(name) {
            let mut a = Arg::new(o.key).long(o.key).help(o.help);
            a = if o.switch { a.action(ArgAction::SetTrue) } else { a.value_name("VALUE") };
            if let Some(d) = o.default.filter(|_| !o.switch) {
                a = a.help(format!("{} [default: {d}]", o.help));
            }
            sub = sub.arg(a);
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key=value, got {raw:?}", i + 1));
        };
        let k = k.trim().trim_start_matches("--");
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return usage(format!("config line {}: duplicate key {k:?}", i + 1));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Flag,
    File,
    Default,
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub options: BTreeMap<String, String>,
    pub sources: BTreeMap<String, Source>,
    pub config_file: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub plot: bool,
    pub threads: usize,
}

/// Worker count from the value of [`THREADS_VAR`]; unset means one per CPU.
pub fn thread_count(var: Option<&str>) -> Result<usize, UsageError> {
    match var.map(str::trim) {
        None | Some("") => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
        Some(s) => match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => usage(format!("{THREADS_VAR} must be a positive integer, got {s:?}")),
        },
    }
}

impl RunConfig {
    pub fn resolve(command: &str, m: &ArgMatches, threads: usize) -> Result<Self, UsageError> {
        let table = options(command);
        let config_file = m.get_one::<String>("config").map(PathBuf::from);
        let file = match &config_file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| UsageError(format!("cannot read config file {}: {e}", p.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        if let Some(k) = file.keys().find(|k| !table.iter().any(|o| o.key == k.as_str())) {
            return usage(format!("config file sets unknown option {k:?} for {command}"));
        }
        let mut options = BTreeMap::new();
        let mut sources = BTreeMap::new();
        for o in &table {
            let flag = if o.switch {
                m.get_flag(o.key).then(|| "true".to_string())
            } else {
                m.get_one::<String>(o.key).cloned()
            };
            let (val, src) = match (flag, file.get(o.key), o.default) {
                (Some(v), _, _) => (v, Source::Flag),
                (None, Some(v), _) => (v.clone(), Source::File),
                (None, None, Some(d)) => (d.to_string(), Source::Default),
                (None, None, None) => continue,
            };
            options.insert(o.key.to_string(), val);
            sources.insert(o.key.to_string(), src);
        }
        let seed = match options.get("seed") {
            Some(s) => s.parse().map_err(|_| UsageError(format!("seed must be an unsigned integer, got {s:?}")))?,
            None => DEFAULT_SEED,
        };
        let plot = match options.get("plot").map(String::as_str) {
            None | Some("false") => false,
            Some("true") => true,
            Some(v) => return usage(format!("plot must be true or false, got {v:?}")),
        };
        let out_dir = PathBuf::from(options.get("out-dir").map(String::as_str).unwrap_or("."));
        let cfg = Self { command: command.to_string(), options, sources, config_file, out_dir, seed, plot, threads };
        cfg.check_paths()?;
        Ok(cfg)
    }

    fn check_paths(&self) -> Result<(), UsageError> {
        if !self.out_dir.is_dir() {
            return usage(format!("output directory {} does not exist", self.out_dir.display()));
        }
        if let Some(parent) = self.get("out").map(Path::new).and_then(Path::parent) {
            if !parent.as_os_str().is_empty() && !parent.is_dir() {
                return usage(format!("directory of --out {} does not exist", parent.display()));
            }
        }
        for key in ["weight", "symbol", "f1", "f2"] {
            for p in self.get(key).map(referenced_paths).unwrap_or_default() {
                if !Path::new(&p).exists() {
                    return usage(format!("--{key} refers to {p}, which does not exist"));
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.options.get(key).map(String::as_str)
    }

    pub fn req(&self, key: &str) -> Result<&str, UsageError> {
        self.get(key).ok_or_else(|| UsageError(format!("{} needs --{key}", self.command)))
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, UsageError> {
        let v = self.req(key)?;
        v.trim().parse().map_err(|_| UsageError(format!("--{key}: cannot parse {v:?}")))
    }

    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, UsageError> {
        let v = self.req(key)?;
        v.split(',')
            .map(|s| s.trim().parse().map_err(|_| UsageError(format!("--{key}: cannot parse {s:?} in {v:?}"))))
            .collect()
    }

    /// Grid from `L,N` in the given dimension.
    pub fn grid(&self, key: &str, dim: usize) -> Result<Grid, UsageError> {
        let v: Vec<u64> = self.list(key)?;
        let [l, n] = v[..] else {
            return usage(format!("--{key} expects L,N, got {:?}", self.req(key)?));
        };
        Grid::new(dim, l as u32, n as usize).map_err(|e| UsageError(format!("--{key}: {e}")))
    }

    /// JSON path and the stem used for the CSV and SVG siblings.
    pub fn out_path(&self, ext: &str) -> PathBuf {
        let json = match self.get("out") {
            Some(p) => PathBuf::from(p),
            None => self.out_dir.join(format!("{}.json", self.command)),
        };
        if ext == "json" {
            json
        } else {
            json.with_extension(ext)
        }
    }
}

/// File paths named by `table:PATH` and `file:PATH` inside a spec string.
pub fn referenced_paths(spec: &str) -> Vec<String> {
    let mut out = Vec::new();
    for tag in ["table:", "file:"] {
        let mut rest = spec;
        while let Some(i) = rest.find(tag) {
            rest = &rest[i + tag.len()..];
            let end = rest.find([')', ';']).unwrap_or(rest.len());
            out.push(rest[..end].trim().to_string());
            rest = &rest[end..];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_parsing() {
        let m = parse_config_text("# comment\nweight = const:1\n\n--radii=2,4 # trailing\n").unwrap();
        assert_eq!(m["weight"], "const:1");
        assert_eq!(m["radii"], "2,4");
        assert!(parse_config_text("radii 2,4").is_err());
        assert!(parse_config_text("a=1\na=2").is_err());
    }

    #[test]
    fn thread_count_parsing() {
        assert_eq!(thread_count(Some("3")).unwrap(), 3);
        assert!(thread_count(None).unwrap() >= 1);
        assert!(thread_count(Some("0")).is_err());
        assert!(thread_count(Some("many")).is_err());
    }

    #[test]
    fn paths_inside_specs() {
        assert_eq!(referenced_paths("tensor(table:a.csv;swap1(table:b.csv))"), vec!["a.csv", "b.csv"]);
        assert_eq!(referenced_paths("file:x.bin"), vec!["x.bin"]);
        assert!(referenced_paths("sum-power:-0.5").is_empty());
    }

    #[test]
    fn every_command_has_output_options() {
        cli().debug_assert();
        for (c, _) in COMMANDS {
            assert!(options(c).iter().any(|o| o.key == "out-dir"));
        }
    }
}
