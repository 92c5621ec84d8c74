//! Driving the experiment harness from code: a keyed sweep of three
//! commands written into `target/example-sweep`, followed by a replay.

use std::path::Path;

use curvlab::cli::config::{FowlerArgs, MinmaxArgs, MorseArgs, SweepArgs};
use curvlab::cli::{execute, replay::replay, Command, Job, RunConfig};

fn main() -> curvlab::Result<()> {
    let out = Path::new("target/example-sweep");
    let jobs = vec![
        Job {
            key: "fowler".into(),
            command: Command::Fowler(FowlerArgs::default()),
        },
        Job {
            key: "morse".into(),
            command: Command::MorseReport(MorseArgs::default()),
        },
        Job {
            key: "minmax".into(),
            command: Command::Minmax(MinmaxArgs::default()),
        },
    ];
    let config = RunConfig::new(Command::Sweep(SweepArgs {
        jobs_file: None,
        jobs,
    }));
    let outcome = execute(&config, out)?;
    println!("{}", outcome.line());
    for c in &outcome.checks {
        println!(
            "  {:<14} {}",
            c.name,
            if c.passed { "pass" } else { "FAIL" }
        );
    }
    let again = replay(&out.join("run_config.json"))?;
    println!("{}", again.line());
    Ok(())
}
