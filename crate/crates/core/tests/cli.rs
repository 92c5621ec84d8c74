//! Exit codes, replay and sweep behaviour of the command-line harness.

use std::path::Path;

use curvlab::cli::run_cli;
use serde_json::Value;

fn run(out: &Path, args: &[&str]) -> i32 {
    let out = out.to_str().unwrap();
    let mut argv = vec!["curvlab", "--out", out];
    argv.extend_from_slice(args);
    run_cli(argv)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn edit_config(dir: &Path, f: impl FnOnce(&mut Value)) {
    let path = dir.join("run_config.json");
    let mut v = read_json(&path);
    f(&mut v);
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
}

fn replay_report(dir: &Path) -> Value {
    read_json(&dir.join("replay").join("replay_report.json"))
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&tmp.path().join("f"), &["fowler"]), 0);
    assert_eq!(
        run(
            &tmp.path().join("km"),
            &["km-verify", "--schedule", "constant", "--m-max", "4"]
        ),
        1
    );
    assert_eq!(
        run(&tmp.path().join("bad"), &["fowler", "--no-such-flag"]),
        2
    );
    assert_eq!(
        run(
            &tmp.path().join("s"),
            &["solve", "--k", "pinched-multi-peak(0.1,0.2)"]
        ),
        2
    );
    assert_eq!(run(&tmp.path().join("u"), &["solve", "--k", "cubic(1)"]), 2);
    assert_eq!(
        run_cli(["curvlab", "replay", "/nonexistent/run_config.json"]),
        2
    );
}

#[test]
fn artifacts_are_written() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("id");
    assert_eq!(run(&dir, &["identities", "--n", "3"]), 0);
    for f in ["run_config.json", "report.json", "log.txt"] {
        assert!(dir.join(f).exists(), "{f} missing");
    }
    let report = read_json(&dir.join("report.json"));
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["meta"]["command"], "identities");
    assert!(std::fs::read_dir(&dir).unwrap().any(|e| e
        .unwrap()
        .path()
        .extension()
        .is_some_and(|x| x == "csv")));
    assert!(std::fs::read_to_string(dir.join("log.txt"))
        .unwrap()
        .starts_with("PASS"));
}

#[test]
fn replay_reproduces_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("fowler");
    assert_eq!(run(&dir, &["fowler", "--dt", "0.02"]), 0);
    let cfg = dir.join("run_config.json");
    let cfg = cfg.to_str().unwrap();

    assert_eq!(run_cli(["curvlab", "replay", cfg]), 0);
    let r = replay_report(&dir);
    assert_eq!(r["data_differences"].as_array().unwrap().len(), 0);
    assert_eq!(r["metadata_differences"].as_array().unwrap().len(), 0);

    // a looser tolerance changes only metadata
    edit_config(&dir, |v| v["params"]["flux_tol"] = 2e-6.into());
    assert_eq!(run_cli(["curvlab", "replay", cfg]), 0);
    let r = replay_report(&dir);
    assert_eq!(r["data_differences"].as_array().unwrap().len(), 0);
    assert!(!r["metadata_differences"].as_array().unwrap().is_empty());

    edit_config(&dir, |v| v["version"] = "0.0.0-old".into());
    assert_eq!(run_cli(["curvlab", "replay", cfg]), 0);
    assert_eq!(replay_report(&dir)["version_mismatch"], Value::Bool(true));

    // a changed physical parameter is data drift
    edit_config(&dir, |v| v["params"]["dt"] = 0.01.into());
    assert_eq!(run_cli(["curvlab", "replay", cfg]), 1);
    assert!(!replay_report(&dir)["data_differences"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("fowler");
    assert_eq!(run(&dir, &["fowler"]), 0);
    edit_config(&dir, |v| v["params"]["kapa"] = 4.0.into());
    let cfg = dir.join("run_config.json");
    assert_eq!(run_cli(["curvlab", "replay", cfg.to_str().unwrap()]), 2);
}

#[test]
fn sweep_is_independent_of_job_order() {
    let jobs = [
        r#"{"key": "a", "command": "fowler", "params": {"dt": 0.02}}"#,
        r#"{"key": "b", "command": "bubble-check", "params": {"dims": [3, 4], "samples": 50}}"#,
        r#"{"key": "c", "command": "fowler", "params": {"flux_tol": 1e-30}}"#,
    ];
    let tmp = tempfile::tempdir().unwrap();
    let mut merged = Vec::new();
    for (name, order) in [("fwd", [0, 1, 2]), ("rev", [2, 0, 1])] {
        let list: Vec<&str> = order.iter().map(|i| jobs[*i]).collect();
        let file = tmp.path().join(format!("{name}.json"));
        std::fs::write(&file, format!("{{\"jobs\": [{}]}}", list.join(","))).unwrap();
        let dir = tmp.path().join(name);
        // job c fails its flux check
        assert_eq!(
            run(&dir, &["sweep", "--jobs-file", file.to_str().unwrap()]),
            1
        );
        let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
        let report = read_json(&dir.join("report.json"));
        merged.push((csv, report["result"].clone(), report["checks"].clone()));
        for key in ["a", "b", "c"] {
            assert!(dir.join(key).join("report.json").exists());
        }
    }
    assert_eq!(merged[0], merged[1]);
    assert!(merged[0].0.contains("c,fowler,1,false"));
}

#[test]
fn sweep_rejects_bad_keys() {
    let tmp = tempfile::tempdir().unwrap();
    for jobs in [
        r#"[{"key": "a", "command": "fowler"}, {"key": "a", "command": "fowler"}]"#,
        r#"[{"key": "../x", "command": "fowler"}]"#,
        r#"[]"#,
    ] {
        let file = tmp.path().join("jobs.json");
        std::fs::write(&file, format!("{{\"jobs\": {jobs}}}")).unwrap();
        let code = run(
            &tmp.path().join("out"),
            &["sweep", "--jobs-file", file.to_str().unwrap()],
        );
        assert_eq!(code, 2, "{jobs}");
    }
}
