//! Experiment harness behind the `curvlab` binary.
//!
//! Every run writes `run_config.json`, `report.json`, CSV series and
//! `log.txt` into its output directory. Exit codes: `0` all checks pass,
//! `1` a mathematical check failed, `2` usage or configuration error.

pub mod commands;
pub mod config;
pub mod family;
pub mod replay;

use std::ffi::OsString;
use std::path::Path;

use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

pub use commands::{Check, Outcome};
pub use config::{Cli, Command, Job, RunConfig, TopCommand};
pub use family::KSpec;

use crate::error::{Error, Result};

/// Exit code for an error: `1` for failed mathematics, `2` for bad input.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Degenerate { .. }
        | Error::MissedRoots { .. }
        | Error::Construction(_)
        | Error::NonConvergence(_) => 1,
        _ => 2,
    }
}

fn load_jobs(config: &RunConfig) -> Result<RunConfig> {
    let mut config = config.clone();
    if let Command::Sweep(s) = &mut config.command {
        if let Some(path) = s.jobs_file.take() {
            let text = std::fs::read_to_string(&path)?;
            let file: config::JobsFile = serde_json::from_str(&text)
                .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
            s.jobs.extend(file.jobs);
        }
    }
    Ok(config)
}

/// Runs `config` in `out`, writing all artifacts there.
pub fn execute(config: &RunConfig, out: &Path) -> Result<Outcome> {
    let config = load_jobs(config)?;
    std::fs::create_dir_all(out)?;
    config.write(&out.join("run_config.json"))?;
    let ctx = commands::Ctx {
        out,
        config: &config,
    };
    let outcome = match &config.command {
        Command::MorseReport(a) => commands::morse_report(&ctx, a),
        Command::PinchReport(a) => commands::pinch(&ctx, a),
        Command::Degree(a) => commands::degree(&ctx, a),
        Command::Minmax(a) => commands::minmax(&ctx, a),
        Command::KmBuild(a) => commands::km_build(&ctx, a),
        Command::KmVerify(a) => commands::km_verify(&ctx, a),
        Command::Fowler(a) => commands::fowler(&ctx, a),
        Command::BubbleCheck(a) => commands::bubble_check(&ctx, a),
        Command::Identities(a) => commands::identities(&ctx, a),
        Command::Solve(a) => commands::solve(&ctx, a),
        Command::Continuation(a) => commands::continuation_run(&ctx, a),
        Command::Sweep(s) => sweep(&ctx, &s.jobs),
    };
    let log = match &outcome {
        Ok(o) => o.line(),
        Err(e) => format!("ERROR {}: {e}", config.command.name()),
    };
    std::fs::write(out.join("log.txt"), log + "\n")?;
    outcome
}

#[derive(Debug, Clone, Serialize)]
struct JobResult {
    key: String,
    command: String,
    exit_code: i32,
    passed: bool,
    summary: String,
}

fn sweep(ctx: &commands::Ctx, jobs: &[Job]) -> Result<Outcome> {
    if jobs.is_empty() {
        return Err(Error::Config("sweep has no jobs".into()));
    }
    let mut keys = std::collections::BTreeSet::new();
    for j in jobs {
        if matches!(j.command, Command::Sweep(_)) {
            return Err(Error::Config(format!(
                "job '{}': sweeps cannot be nested",
                j.key
            )));
        }
        let ok = !j.key.is_empty()
            && j.key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
        if !ok || j.key.starts_with('.') || j.key == "replay" {
            return Err(Error::Config(format!(
                "job key '{}' must be a plain file name",
                j.key
            )));
        }
        if !keys.insert(j.key.as_str()) {
            return Err(Error::Config(format!("duplicate job key '{}'", j.key)));
        }
    }
    let mut results: Vec<JobResult> = jobs
        .par_iter()
        .map(|j| {
            let cfg = RunConfig {
                version: ctx.config.version.clone(),
                command: j.command.clone(),
            };
            let (exit_code, passed, summary) = match execute(&cfg, &ctx.path(&j.key)) {
                Ok(o) => (if o.passed { 0 } else { 1 }, o.passed, o.summary),
                Err(e) => (exit_code(&e), false, e.to_string()),
            };
            JobResult {
                key: j.key.clone(),
                command: j.command.name().to_string(),
                exit_code,
                passed,
                summary,
            }
        })
        .collect();
    results.sort_by(|a, b| a.key.cmp(&b.key));
    commands::write_csv(
        &ctx.path("sweep.csv"),
        &["key", "command", "exit_code", "passed"],
        results.iter().map(|r| {
            vec![
                r.key.clone(),
                r.command.clone(),
                r.exit_code.to_string(),
                r.passed.to_string(),
            ]
        }),
    )?;
    let failed = results.iter().filter(|r| !r.passed).count();
    let checks = results
        .iter()
        .map(|r| Check::new(format!("job {}", r.key), r.passed))
        .collect();
    let summary = format!("{} jobs, {} failed", results.len(), failed);
    ctx.finish(summary, checks, &results)
}

/// Parses `args` (including the program name), runs, prints the one-line
/// summary and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        TopCommand::Run(cmd) => {
            let out = config::resolve_out(cli.out.as_deref(), cmd.name());
            execute(&RunConfig::new(cmd), &out)
        }
        TopCommand::Replay(r) => replay::replay(&r.config),
    };
    match result {
        Ok(o) => {
            println!("{}", o.line());
            if o.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
