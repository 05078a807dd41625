use std::path::Path;

use bilab_cli::plot::{render_svg, PlotData};
use bilab_cli::{emit_plot, run_with, Plottable, EXIT_OK, EXIT_USAGE, EXIT_VERDICT};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn bilab(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bilab").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn in_dir(dir: &TempDir, args: &[&str]) -> Run {
    let d = dir.path().to_str().unwrap();
    let mut v = args.to_vec();
    v.extend(["--out-dir", d]);
    bilab(&v)
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn certify_sum_power_is_bounded() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("cert.json");
    let r = bilab(&["certify", "--weight", "sum-power:-0.5", "--radii", "4,8,16,32", "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    let j = json(&out);
    assert_eq!(j["schema"], 1);
    assert_eq!(j["result"]["verdict"], "bounded");
    assert_eq!(j["status"], "pass");
    assert_eq!(j["config"]["options"]["weight"], "sum-power:-0.5");
    assert_eq!(j["seeds"].as_array().unwrap().len(), 4);
    assert!(j["config"]["seed"].is_u64());
    let csv = std::fs::read_to_string(dir.path().join("cert.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("radius,norm,restarts,converged"));
}

#[test]
fn failed_expectation_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let r = in_dir(&dir, &["certify", "--weight", "const:1", "--expect", "bounded"]);
    assert_eq!(r.code, EXIT_VERDICT, "{}{}", r.out, r.err);
    let j = json(&dir.path().join("certify.json"));
    assert_eq!(j["result"]["verdict"], "growing");
    assert_eq!(j["status"], "fail");
    assert_eq!(in_dir(&dir, &["certify", "--weight", "const:1", "--expect", "growing"]).code, EXIT_OK);
}

#[test]
fn apply_reproduces_the_product() {
    let dir = TempDir::new().unwrap();
    let r = in_dir(&dir, &["apply", "--symbol", "const:1", "--f1", "gauss", "--f2", "gauss", "--check", "product"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    let j = json(&dir.path().join("apply.json"));
    assert!(j["result"]["product_error"].as_f64().unwrap() <= 1e-8);
    let csv = std::fs::read_to_string(dir.path().join("apply.csv")).unwrap();
    assert_eq!(csv.lines().count(), 257);
    // a nonconstant symbol is not a product
    let r = in_dir(&dir, &["apply", "--symbol", "bracket-power:-0.5", "--f1", "random:4", "--f2", "gauss", "--check", "product"]);
    assert_eq!(r.code, EXIT_VERDICT);
    let j = json(&dir.path().join("apply.json"));
    assert_eq!(j["seeds"].as_array().unwrap().len(), 1);
}

#[test]
fn sharpness_range_reports_the_measured_slope() {
    let dir = TempDir::new().unwrap();
    let r = in_dir(&dir, &["sharpness", "--case", "range", "--r", "1", "--K", "5", "--plot"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    let j = json(&dir.path().join("sharpness.json"));
    let rep = &j["result"][0];
    // ||T_k||_{L^1} = 2^{-k/2} ||T_0||_{L^1} for this construction
    assert!((rep["slope"].as_f64().unwrap() + 0.5).abs() <= 0.1);
    assert_eq!(rep["schedule"].as_array().unwrap().len(), 6);
    let svg = std::fs::read_to_string(dir.path().join("sharpness.svg")).unwrap();
    assert_eq!(svg.matches("class=\"marker\"").count(), 6);
}

#[test]
fn usage_errors_exit_with_one() {
    let r = bilab(&["certify", "--weight", "bogus:1"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.err.contains("sum-power:M") && r.err.contains("table:PATH.csv"), "{}", r.err);
    assert_eq!(bilab(&["certify", "--weight", "const:1", "--frobnicate", "1"]).code, EXIT_USAGE);
    assert_eq!(bilab(&["bogus"]).code, EXIT_USAGE);
    assert_eq!(bilab(&[]).code, EXIT_USAGE);
    assert_eq!(bilab(&["certify"]).code, EXIT_USAGE);
    assert_eq!(bilab(&["certify", "--weight", "const:1", "--out-dir", "/nonexistent/dir"]).code, EXIT_USAGE);
    assert_eq!(bilab(&["certify", "--weight", "table:/nonexistent.csv"]).code, EXIT_USAGE);
    assert_eq!(bilab(&["certify", "--weight", "const:1", "--config", "/nonexistent.conf"]).code, EXIT_USAGE);
    assert_eq!(bilab(&["apply", "--symbol", "nope"]).code, EXIT_USAGE);
    assert_eq!(bilab(&["sharpness", "--case", "nope"]).code, EXIT_USAGE);
    let help = bilab(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.out.contains("randomsign") && help.out.contains("BILAB_THREADS"));
}

#[test]
fn refused_experiments_exit_with_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(in_dir(&dir, &["randomsign", "--trials", "7"]).code, EXIT_USAGE);
    assert_eq!(in_dir(&dir, &["ghs", "--q", "4"]).code, EXIT_USAGE);
    assert_eq!(in_dir(&dir, &["sweep", "--trials", "4"]).code, EXIT_USAGE);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn config_file_precedence() {
    let dir = TempDir::new().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# certify settings\nweight = sum-power:-0.5\nradii = 2,4,8\nrestarts = 4\n").unwrap();
    let r = in_dir(&dir, &["certify", "--config", conf.to_str().unwrap(), "--radii", "4,8,16"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    let j = json(&dir.path().join("certify.json"));
    let c = &j["config"];
    assert_eq!(c["options"]["radii"], "4,8,16");
    assert_eq!(c["sources"]["radii"], "flag");
    assert_eq!(c["options"]["weight"], "sum-power:-0.5");
    assert_eq!(c["sources"]["weight"], "file");
    assert_eq!(c["options"]["restarts"], "4");
    assert_eq!(c["options"]["tol"], "1e-9");
    assert_eq!(c["sources"]["tol"], "default");
    assert_eq!(j["result"]["radii"], serde_json::json!([4, 8, 16]));
    assert!(j["result"]["restarts"].as_array().unwrap().iter().all(|v| v.as_u64().unwrap() <= 5));

    std::fs::write(&conf, "weight = const:1\nbogus = 3\n").unwrap();
    let r = in_dir(&dir, &["certify", "--config", conf.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.err.contains("bogus"));
}

#[test]
fn seeds_change_results_and_are_recorded() {
    let dir = TempDir::new().unwrap();
    let a = in_dir(&dir, &["randomsign", "--radii", "2,4,8,16"]);
    assert_eq!(a.code, EXIT_OK, "{}{}", a.out, a.err);
    let ja = json(&dir.path().join("randomsign.json"));
    assert_eq!(ja["seeds"].as_array().unwrap().len(), 32);
    let b = in_dir(&dir, &["randomsign", "--radii", "2,4,8,16", "--seed", "7"]);
    assert_eq!(b.code, EXIT_OK);
    let jb = json(&dir.path().join("randomsign.json"));
    assert_eq!(jb["config"]["seed"], 7);
    assert_ne!(ja["seeds"], jb["seeds"]);
    assert_eq!(ja["result"]["values"], jb["result"]["values"]);
}

#[test]
fn plots_are_byte_deterministic() {
    let (d1, d2) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&d1, &d2] {
        assert_eq!(in_dir(d, &["certify", "--weight", "sum-power:-0.5", "--plot"]).code, EXIT_OK);
    }
    let a = std::fs::read(d1.path().join("certify.svg")).unwrap();
    let b = std::fs::read(d2.path().join("certify.svg")).unwrap();
    assert_eq!(a, b);
    let s = String::from_utf8(a).unwrap();
    assert_eq!(s.matches("class=\"marker\"").count(), 4);
    assert_eq!(s.matches("class=\"fit\"").count(), 1);
}

struct Empty;

impl Plottable for Empty {
    fn plot_data(&self) -> PlotData {
        PlotData { title: "empty".into(), x_label: "x".into(), y_label: "y".into(), xs: vec![], ys: vec![] }
    }
}

#[test]
fn empty_report_writes_no_plot() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("e.svg");
    assert!(emit_plot(&Empty, &p).is_err());
    assert!(!p.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    assert!(render_svg(&Empty.plot_data()).is_err());
}

#[test]
fn norm_methods_agree_on_a_tiny_box() {
    let dir = TempDir::new().unwrap();
    let r = in_dir(&dir, &["norm", "--weight", "split:-0.25,-0.25", "--radius", "2", "--method", "both"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    let j = json(&dir.path().join("norm.json"));
    assert!(j["result"]["relative_difference"].as_f64().unwrap() <= 1e-3);
    assert_eq!(j["result"]["box_points"], 5);
}

#[test]
fn besov_partial_sums_converge_for_a_decaying_symbol() {
    let dir = TempDir::new().unwrap();
    let args = [
        "besov", "--symbol", "bracket-power:-0.5", "--weight", "bracket-power:-0.5", "--s", "0.5,0.5,0.5", "--xi-grid", "8,512", "--expect",
        "summable",
    ];
    let r = in_dir(&dir, &args);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    let csv = std::fs::read_to_string(dir.path().join("besov.csv")).unwrap();
    assert!(csv.starts_with("shell,increment,partial_sum,ratio"));
    assert!(csv.lines().count() >= 5);
    assert_eq!(in_dir(&dir, &["besov", "--mode", "star", "--s", "1,2"]).code, EXIT_USAGE);
}

#[test]
fn sweep_of_the_critical_symbol_is_bounded() {
    let dir = TempDir::new().unwrap();
    let r = in_dir(&dir, &["sweep", "--expect", "bounded", "--plot"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    let j = json(&dir.path().join("sweep.json"));
    assert_eq!(j["seeds"].as_array().unwrap().len(), 5 * 16 * 2);
    assert!(dir.path().join("sweep.svg").exists());
}

#[test]
fn ghs_gaussian_runs_on_a_small_grid() {
    let dir = TempDir::new().unwrap();
    let r = in_dir(&dir, &["ghs", "--symbol", "gaussian", "--q", "1", "--grid", "16,128", "--plot"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    let j = json(&dir.path().join("ghs.json"));
    assert_eq!(j["result"]["cauchy"], true);
    assert_eq!(j["seeds"].as_array().unwrap().len(), 16);
}

#[test]
fn selftest_runs_selected_criteria() {
    let dir = TempDir::new().unwrap();
    let r = in_dir(&dir, &["selftest", "--only", "2,5"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    assert_eq!(r.out.matches("PASS").count(), 2);
    let j = json(&dir.path().join("selftest.json"));
    assert_eq!(j["result"].as_array().unwrap().len(), 2);
    assert_eq!(in_dir(&dir, &["selftest", "--only", "14"]).code, EXIT_USAGE);
    // no temporary files survive the atomic writes
    let names: Vec<String> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(names.iter().all(|n| !n.contains(".tmp")), "{names:?}");
}
