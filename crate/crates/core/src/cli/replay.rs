//! Re-execution of a stored run and artifact diffing.
//!
//! JSON artifacts are compared structurally; differences under `/meta`, in
//! check bounds (`/checks/<i>/bound`, copied from the config), in
//! `run_config.json` and in `log.txt` count as metadata, everything else as
//! data drift.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::commands::{Check, Outcome};
use super::config::{RunConfig, VERSION};
use super::execute;
use crate::error::{Error, Result};

/// Directory (inside the stored run) receiving the fresh artifacts.
pub const REPLAY_DIR: &str = "replay";
const REPORT: &str = "replay_report.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Difference {
    pub file: String,
    /// JSON pointer, CSV line number or `<missing>` / `<new>`.
    pub location: String,
    pub metadata: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub stored_version: String,
    pub version: String,
    pub version_mismatch: bool,
    pub files_compared: usize,
    pub data_differences: Vec<Difference>,
    pub metadata_differences: Vec<Difference>,
    pub rerun_passed: bool,
}

fn files(root: &Path) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    let mut stack = vec![PathBuf::new()];
    while let Some(rel) = stack.pop() {
        for entry in std::fs::read_dir(root.join(&rel))? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if (rel.as_os_str().is_empty() && name == REPLAY_DIR) || name == REPORT {
                continue;
            }
            let path = rel.join(&name);
            if entry.file_type()?.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.to_string_lossy().into_owned());
            }
        }
    }
    Ok(out)
}

fn is_metadata_file(rel: &str) -> bool {
    let name = Path::new(rel)
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("");
    name == "run_config.json" || name == "log.txt"
}

fn is_metadata_pointer(p: &str) -> bool {
    let parts: Vec<&str> = p.split('/').skip(1).collect();
    matches!(parts.as_slice(), ["meta", ..] | ["checks", _, "bound"])
}

fn json_diff(a: &Value, b: &Value, path: String, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let keys: BTreeSet<&String> = x.keys().chain(y.keys()).collect();
            for k in keys {
                let p = format!("{path}/{k}");
                match (x.get(k), y.get(k)) {
                    (Some(u), Some(v)) => json_diff(u, v, p, out),
                    _ => out.push(p),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                json_diff(u, v, format!("{path}/{i}"), out);
            }
        }
        _ if a == b => {}
        _ => out.push(if path.is_empty() { "/".into() } else { path }),
    }
}

/// Differences between two artifact trees.
pub fn diff_trees(stored: &Path, fresh: &Path) -> Result<(usize, Vec<Difference>)> {
    let (old, new) = (files(stored)?, files(fresh)?);
    let mut diffs = Vec::new();
    let mut push = |file: &str, location: String, meta: bool| {
        diffs.push(Difference {
            file: file.to_string(),
            location,
            metadata: meta || is_metadata_file(file),
        })
    };
    for f in old.difference(&new) {
        push(f, "<missing>".into(), false);
    }
    for f in new.difference(&old) {
        push(f, "<new>".into(), false);
    }
    let common: Vec<&String> = old.intersection(&new).collect();
    for f in &common {
        let (a, b) = (
            std::fs::read(stored.join(f))?,
            std::fs::read(fresh.join(f))?,
        );
        if a == b {
            continue;
        }
        if f.ends_with(".json") {
            let parse =
                |bytes: &[u8]| serde_json::from_slice::<Value>(bytes).unwrap_or(Value::Null);
            let mut paths = Vec::new();
            json_diff(&parse(&a), &parse(&b), String::new(), &mut paths);
            for p in paths {
                let meta = is_metadata_pointer(&p);
                push(f, p, meta);
            }
        } else {
            let (ta, tb) = (String::from_utf8_lossy(&a), String::from_utf8_lossy(&b));
            let (la, lb): (Vec<&str>, Vec<&str>) = (ta.lines().collect(), tb.lines().collect());
            for i in 0..la.len().max(lb.len()) {
                if la.get(i) != lb.get(i) {
                    push(f, format!("line {}", i + 1), false);
                }
            }
        }
    }
    Ok((common.len(), diffs))
}

/// Re-runs the config at `path` into `<dir>/replay` and diffs against `<dir>`.
pub fn replay(path: &Path) -> Result<Outcome> {
    let config = RunConfig::read(path)?;
    let stored = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    if config.version != VERSION {
        eprintln!(
            "warning: config written by version {}, replaying with {VERSION}",
            config.version
        );
    }
    let fresh = stored.join(REPLAY_DIR);
    if fresh.exists() {
        std::fs::remove_dir_all(&fresh)?;
    }
    let rerun = match execute(&config, &fresh) {
        Ok(o) => o.passed,
        Err(e) if super::exit_code(&e) == 1 => false,
        Err(e) => return Err(e),
    };
    let (files_compared, diffs) = diff_trees(stored, &fresh)?;
    if files_compared == 0 {
        return Err(Error::Config(format!(
            "no stored artifacts next to {}",
            path.display()
        )));
    }
    let (metadata, data): (Vec<Difference>, Vec<Difference>) =
        diffs.into_iter().partition(|d| d.metadata);
    let report = ReplayReport {
        stored_version: config.version.clone(),
        version: VERSION.to_string(),
        version_mismatch: config.version != VERSION,
        files_compared,
        data_differences: data,
        metadata_differences: metadata,
        rerun_passed: rerun,
    };
    std::fs::write(
        fresh.join(REPORT),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    let summary = format!(
        "{} ({} files): {} data differences, {} metadata differences",
        config.command.name(),
        report.files_compared,
        report.data_differences.len(),
        report.metadata_differences.len()
    );
    Ok(Outcome {
        command: "replay".into(),
        passed: report.data_differences.is_empty(),
        summary,
        checks: vec![Check::new(
            "no data drift",
            report.data_differences.is_empty(),
        )],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_paths_are_reported() {
        let a = serde_json::json!({"meta": {"tol": 1}, "result": [1.0, 2.0], "x": 1});
        let b = serde_json::json!({"meta": {"tol": 2}, "result": [1.0, 2.5], "y": 1});
        let mut out = Vec::new();
        json_diff(&a, &b, String::new(), &mut out);
        assert_eq!(out, vec!["/meta/tol", "/result/1", "/x", "/y"]);
    }

    #[test]
    fn metadata_pointers() {
        assert!(is_metadata_pointer("/meta/config/params/tol"));
        assert!(is_metadata_pointer("/checks/3/bound"));
        assert!(!is_metadata_pointer("/checks/3/value"));
        assert!(!is_metadata_pointer("/result/bound"));
    }
}
