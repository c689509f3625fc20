use std::process::{Command, Output};

fn workbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_workbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn honest_run_exits_zero_with_versioned_json() {
    let out = workbench(&["run", "--sessions", "3", "--format", "json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], "1");
    assert_eq!(v["summary"]["agreements"], 3);
    assert_eq!(v["config"]["param_set"], "test");
}

#[test]
fn text_output_ends_with_result() {
    let out = workbench(&["run", "--scenario", "kssti", "--sessions", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("attack kssti: 2/2"), "{text}");
    assert!(text.trim_end().ends_with("result: PASS"));
}

#[test]
fn stale_window_fails_the_run() {
    let out = workbench(&[
        "run",
        "--sessions",
        "1",
        "--delta-max",
        "0",
        "--clock-step",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["sessions"][0]["error"], "StaleTimestamp");
}

#[test]
fn invalid_config_is_a_usage_error() {
    let out = workbench(&["run", "--sessions", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sessions"));
}

#[test]
fn export_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let p = path.to_str().unwrap();
    let out = workbench(&["run", "--scenario", "pfs", "--sessions", "4", "--export", p]);
    assert!(out.status.success());
    assert!(dir.path().join("t.jsonl.leaks").exists());

    let replay = workbench(&["replay", "--transcripts", p, "--format", "json"]);
    assert!(replay.status.success());
    let v = json(&replay);
    assert_eq!(v["mode"], "replay");
    assert_eq!(v["summary"]["attack_success_counts"]["pfs"], 4);
    assert_eq!(v["summary"]["attack_success_counts"]["kssti"], 4);

    let again = workbench(&[
        "replay",
        "--transcripts",
        p,
        "--leaks",
        &format!("{p}.leaks"),
        "--format",
        "json",
    ]);
    assert_eq!(again.stdout, replay.stdout);

    std::fs::write(&path, "{\"schema\":\"1\"\n").unwrap();
    let bad = workbench(&["replay", "--transcripts", p]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains(":1:"));
}

#[test]
fn registry_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("registry.txt");
    let p = path.to_str().unwrap();
    assert!(workbench(&["run", "--sessions", "2", "--registry", p])
        .status
        .success());
    assert!(workbench(&["run", "--sessions", "2", "--registry", p])
        .status
        .success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.ends_with(" 1")), "{text}");
}
