use std::path::Path;
use std::process::Command;

use affine_wirtinger::cli::main_with_args;

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["affwirt"];
    full.extend_from_slice(args);
    main_with_args(full)
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = match std::fs::read_dir(dir) {
        Ok(rd) => rd.map(|e| e.unwrap().file_name().into_string().unwrap()).collect(),
        Err(_) => Vec::new(),
    };
    names.sort();
    names
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn mixed_writes_schema_tagged_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["mixed", "--dim", "2", "--bodies", "3", "--out", o, "--threads", "1"]), 0);
    assert_eq!(files(&out), ["mixed.csv", "mixed_balls.csv", "mixed_balls.dat", "mixed_summary.json"]);
    let csv = String::from_utf8(read(&out, "mixed.csv")).unwrap();
    assert!(csv.starts_with("# schema=mixed/1\n"));
    let summary: serde_json::Value = serde_json::from_slice(&read(&out, "mixed_summary.json")).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["bodies"], 3);
}

#[test]
fn ball_identity_corpus_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    assert_eq!(run(&["verify-identity", "--dim", "3", "--resolution", "12", "--source", "ball", "--tol", "1e-10", "--out", o]), 0);
}

#[test]
fn wirtinger_equality_family_flags_every_row() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    let code = run(&["wirtinger", "--dim", "2", "--family", "equality", "--bodies", "3", "--functions", "2", "--out", o]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(tmp.path().join("wirtinger.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv.as_bytes());
    let flags: Vec<String> = rdr.records().map(|r| r.unwrap()[6].to_string()).collect();
    assert_eq!(flags.len(), 6);
    assert!(flags.iter().all(|f| f == "true"));
}

#[test]
fn ball_flow_has_constant_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    assert_eq!(run(&["flow", "--dim", "2", "--resolution", "64", "--scenario", "ball", "--steps", "20", "--out", o]), 0);
    let summary: serde_json::Value = serde_json::from_slice(&read(tmp.path(), "flow_summary.json")).unwrap();
    let spread = summary["scenarios"][0]["ratio_spread"].as_f64().unwrap();
    assert!(spread <= 1e-9, "{spread:e}");
}

#[test]
fn tolerance_failure_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    let code = run(&["verify-identity", "--dim", "2", "--resolution", "32", "--bodies", "2", "--functions", "1", "--tol", "1e-15", "--out", o]);
    assert_eq!(code, 1);
    // results of a completed run are still written
    assert!(files(tmp.path()).contains(&"identity.csv".to_string()));
}

#[test]
fn invalid_inputs_exit_two_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = out.to_str().unwrap();

    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"format":1,"dim":2,"kind":"fourier","resolution":64,"data":[1.0,0.0,0.0,0.0,0.0,0.0,0.3]}"#).unwrap();
    assert_eq!(run(&["verify-identity", "--dim", "2", "--body", bad.to_str().unwrap(), "--out", o]), 2);
    assert_eq!(run(&["body", "validate", bad.to_str().unwrap()]), 2);

    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"dim": 2, "bodies": 3}"#).unwrap();
    assert_eq!(run(&["mixed", "--config", cfg.to_str().unwrap(), "--out", o]), 2);

    assert_eq!(run(&["mixed", "--threads", "0", "--out", o]), 2);
    assert_eq!(run(&["mixed", "--dim", "4", "--out", o]), 2);
    assert_eq!(run(&["flow", "--p", "0.5", "--out", o]), 2);
    assert_eq!(run(&["no-such-command"]), 2);
    assert!(files(&out).is_empty());
}

#[test]
fn config_file_values_are_used() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"dim": 2, "corpus": {"bodies": 2}, "probes": 1}"#).unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run(&["mixed", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let summary: serde_json::Value = serde_json::from_slice(&read(&out, "mixed_summary.json")).unwrap();
    assert_eq!(summary["bodies"], 2);
    assert_eq!(summary["dim"], 2);
}

#[test]
fn body_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("b.json");
    let f = file.to_str().unwrap();
    assert_eq!(run(&["body", "make", "--dim", "2", "--resolution", "64", "--kind", "fourier", "--out", f]), 0);
    assert_eq!(run(&["body", "validate", f, "--resolution", "128"]), 0);
    let centred = tmp.path().join("c.json");
    assert_eq!(run(&["body", "recentre", f, "--out", centred.to_str().unwrap()]), 0);
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&centred).unwrap()).unwrap();
    assert_eq!(doc["kind"], "fourier");
    assert_eq!(doc["format"], 1);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (dir, threads) in dirs.iter().zip(["1", "1", "2"]) {
        let o = dir.to_str().unwrap();
        assert_eq!(run(&["wirtinger", "--dim", "2", "--bodies", "3", "--functions", "2", "--seed", "7", "--threads", threads, "--out", o]), 0);
    }
    for name in files(&dirs[0]) {
        assert_eq!(read(&dirs[0], &name), read(&dirs[1], &name), "{name}");
        assert_eq!(read(&dirs[0], &name), read(&dirs[2], &name), "{name}");
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_affwirt");
    let tmp = tempfile::tempdir().unwrap();
    let ok = Command::new(bin)
        .args(["mixed", "--dim", "2", "--bodies", "1", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));
    let bad = Command::new(bin).args(["mixed", "--threads", "0"]).arg("--out").arg(tmp.path().join("x")).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
