use std::process::{Command, Output};

use serde_json::Value;

fn perclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perclab")).args(args).output().expect("perclab runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    assert_eq!(text.trim_end().lines().count(), 1, "error must be one line: {text}");
    serde_json::from_str(text.trim_end()).expect("stderr is JSON")
}

#[test]
fn gen_torus_prints_graph_json() {
    let out = perclab(&["gen", "--family", "torus", "--dims", "4,4"]);
    assert!(out.status.success());
    let g = stdout_json(&out);
    assert_eq!(g["n_vertices"], 16);
    assert_eq!(g["edges"].as_array().unwrap().len(), 32);
}

#[test]
fn invalid_parameter_exits_two_with_one_line_error() {
    let out = perclab(&["sim", "--family", "complete", "--n", "10", "--p", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["exit_code"], 2);
}

#[test]
fn unknown_flag_is_rejected() {
    let out = perclab(&["sim", "--family", "complete", "--n", "10", "--p", "0.5", "--bogus", "1"]);
    assert_eq!(out.status.code(), Some(2));
    stderr_json(&out);
}

#[test]
fn experiment_schema_rejects_foreign_parameters() {
    let out = perclab(&["experiment", "kn-giant", "--beta", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("beta"));
}

#[test]
fn size_limit_exits_four() {
    let out = perclab(&["separator", "--family", "complete", "--n", "40", "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unreachable_tolerance_is_inconclusive() {
    let out = perclab(&[
        "threshold", "--family", "complete", "--n", "50", "--alpha", "0.5", "--delta", "0.5", "--tolerance", "1e-9",
        "--initial-replicas", "64", "--max-replicas", "256",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["status"], "inconclusive");
}

#[test]
fn oracle_validate_passes() {
    let out = perclab(&["oracle-validate", "--replicas", "20000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["status"], "ok");
}

#[test]
fn summary_embeds_provenance_and_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    let out = perclab(&[
        "--out", prefix.to_str().unwrap(), "sim", "--family", "cycle", "--n", "12", "--p", "0.7", "--replicas", "50",
        "--seed", "3",
    ]);
    assert!(out.status.success());
    let s: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.summary.json")).unwrap()).unwrap();
    assert_eq!(s["tool"], "perclab");
    assert_eq!(s["seed"], 3);
    assert_eq!(s["config"]["p"], 0.7);
    assert!(s["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(s["graph"]["sha256"].as_str().unwrap().len(), 64);
    let rows = std::fs::read_to_string(dir.path().join("run.jsonl")).unwrap();
    assert_eq!(rows.lines().count(), 50);
    for l in rows.lines() {
        serde_json::from_str::<Value>(l).unwrap();
    }
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg,
        "# small K_n □ K_2 run\ncommand:str = experiment\nname:str = kn-box-k2\nn:int = 40\nreplicas:int = 100\nseed:int = 7\n",
    )
    .unwrap();
    let out = perclab(&["--config", cfg.to_str().unwrap(), "--replicas", "30"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = stdout_json(&out);
    assert_eq!(s["config"]["n"], 40);
    assert_eq!(s["config"]["replicas"], 30);
    assert_eq!(s["seed"], 7);
}

#[test]
fn malformed_config_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "command:str = sim\np:float = lots\n").unwrap();
    let out = perclab(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    stderr_json(&out);
}

#[test]
fn same_seed_reproduces_rows() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let prefix = dir.path().join(name);
        let out = perclab(&["--out", prefix.to_str().unwrap(), "experiment", "kn-giant", "--ns", "60", "--replicas", "64"]);
        assert!(out.status.success());
        std::fs::read(dir.path().join(format!("{name}.jsonl"))).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}
