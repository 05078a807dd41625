//! Atomic file output and the versioned JSON envelope.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

pub const SCHEMA: u32 = 1;

/// Writes `bytes` to a temporary sibling and renames it over `path`, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path.file_name().with_context(|| format!("{} is not a file path", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let res = (|| -> Result<()> {
        let mut f = std::fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
        Ok(())
    })();
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    res
}

/// Pass/fail state of a finished run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Ran to completion with no verdict asserted, or the asserted one held.
    Pass,
    /// An asserted verdict failed.
    Fail,
}

#[derive(Serialize)]
pub struct Envelope<'a> {
    pub schema: u32,
    pub command: &'a str,
    pub status: Status,
    pub config: &'a RunConfig,
    pub seeds: &'a [u64],
    pub summary: &'a [String],
    pub result: &'a Value,
}

pub fn envelope_json(cfg: &RunConfig, status: Status, seeds: &[u64], summary: &[String], result: &Value) -> Result<Vec<u8>> {
    let env = Envelope { schema: SCHEMA, command: &cfg.command, status, config: cfg, seeds, summary, result };
    let mut out = serde_json::to_vec_pretty(&env)?;
    out.push(b'\n');
    Ok(out)
}

/// CSV text from a header and rows.
pub fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/a.json"), b"x").is_err());
    }

    #[test]
    fn csv_rows() {
        let b = csv_bytes(&["a", "b"], [vec!["1".to_string(), "2".to_string()]]).unwrap();
        assert_eq!(String::from_utf8(b).unwrap(), "a,b\n1,2\n");
    }
}
