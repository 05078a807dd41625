//! Command-line front end: argument and config resolution, dispatch to the
//! experiment crates, and JSON/CSV/SVG output.
//!
//! Exit codes: 0 when a run completes and any asserted verdict holds, 2 when
//! an asserted verdict fails, 1 on usage errors and failed runs.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

use std::ffi::OsString;
use std::io::Write;

use anyhow::Result;

use crate::config::{cli, thread_count, RunConfig, UsageError, THREADS_VAR};
use crate::output::{envelope_json, write_atomic, Status};

pub use crate::plot::{emit_plot, Plottable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERDICT: i32 = 2;

/// Runs the CLI with process stdout and stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Runs the CLI, writing the human-readable summary to `out` and errors to `err`.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let m = match cli().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind::*;
            let text = e.render().to_string();
            return match e.kind() {
                DisplayHelp | DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let (name, sub) = m.subcommand().expect("a subcommand is required");
    match execute(name, sub, out) {
        Ok(Status::Pass) => EXIT_OK,
        Ok(Status::Fail) => EXIT_VERDICT,
        Err(e) => {
            if let Some(u) = e.downcast_ref::<UsageError>() {
                let _ = writeln!(err, "usage error: {u}");
                let _ = writeln!(err, "run `bilab {name} --help` for the options");
            } else {
                let _ = writeln!(err, "error: {e:#}");
            }
            EXIT_USAGE
        }
    }
}

fn execute(name: &str, m: &clap::ArgMatches, out: &mut dyn Write) -> Result<Status> {
    let threads = thread_count(std::env::var(THREADS_VAR).ok().as_deref())?;
    let cfg = RunConfig::resolve(name, m, threads)?;
    let done = match name {
        "certify" => commands::certify(&cfg),
        "norm" => commands::norm(&cfg),
        "apply" => commands::apply_cmd(&cfg),
        "besov" => commands::besov(&cfg),
        "sharpness" => commands::sharpness(&cfg),
        "randomsign" => commands::randomsign(&cfg),
        "ghs" => commands::ghs(&cfg),
        "sweep" => commands::sweep(&cfg),
        "selftest" => commands::selftest(&cfg),
        other => unreachable!("clap only accepts known subcommands, got {other}"),
    }?;
    let json_path = cfg.out_path("json");
    write_atomic(&json_path, &envelope_json(&cfg, done.status, &done.seeds, &done.summary, &done.result)?)?;
    let mut written = vec![json_path];
    if let Some(csv) = &done.csv {
        let p = cfg.out_path("csv");
        write_atomic(&p, csv)?;
        written.push(p);
    }
    if let Some(pd) = &done.plot {
        let p = cfg.out_path("svg");
        write_atomic(&p, plot::render_svg(pd)?.as_bytes())?;
        written.push(p);
    }
    for line in &done.summary {
        writeln!(out, "{line}")?;
    }
    writeln!(out, "status: {}", if done.status == Status::Pass { "pass" } else { "fail" })?;
    for p in written {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(done.status)
}
