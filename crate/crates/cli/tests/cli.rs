use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gxstpir"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn capacity_of_a_fixture() {
    let out = bin().arg("capacity").arg(fixture("example_6.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["lower"], "2/9");
    assert_eq!(v["upper"], "2/9");
    assert_eq!(v["certificates"]["stable_set"], serde_json::json!([5, 6]));
    let seq = bin().arg("capacity").arg(fixture("example_6.json")).arg("--sequential").output().unwrap();
    assert_eq!(out.stdout, seq.stdout);
}

#[test]
fn simulate_composite_session() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"pattern_path": {:?}, "seed": 5, "mode": "theorem3", "demand": {{"set": 4, "index": 2}}}}"#,
            fixture("example_5.json")
        ),
    );
    let threaded = bin().arg("simulate").arg(&cfg).output().unwrap();
    assert_eq!(threaded.status.code(), Some(0));
    let v = json(&threaded);
    assert_eq!(v["total_download"], 7);
    assert_eq!(v["rate"], "2/7");
    assert_eq!(v["correct"], true);
    let seq = json(&bin().arg("simulate").arg(&cfg).arg("--sequential").output().unwrap());
    assert_eq!(v["transcript_hash"], seq["transcript_hash"]);
}

#[test]
fn verify_tiny_instance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.json",
        r#"{"pattern": {"n_servers": 3, "x": 0, "t": 1, "q": 5,
            "message_sets": [{"count": 1, "servers": [1, 2]}, {"count": 1, "servers": [2, 3]}]}}"#,
    );
    let out = bin().arg("verify").arg(&cfg).args(["--privacy", "--correctness", "--colluders", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["privacy"]["holds"], true);
    assert_eq!(v["correctness"]["holds"], true);

    let out = bin().arg("verify").arg(&cfg).arg("--security").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().arg("verify").arg(&cfg).args(["--privacy", "--budget", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_security() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"pattern": {"n_servers": 2, "x": 1, "t": 0, "q": 5,
            "message_sets": [{"count": 1, "servers": [1, 2]}]}}"#,
    );
    let out = bin().arg("verify").arg(&cfg).args(["--security", "--colluders", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["security"]["holds"], true);
    let out = bin().arg("verify").arg(&cfg).args(["--security", "--colluders", "1,2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = bin().arg("capacity").arg(dir.path().join("none.json")).output().unwrap();
    assert_eq!(missing.status.code(), Some(4));

    let broken = write(dir.path(), "b.json", r#"{"n_servers": 3, "x": 0, "t": 1, "message_sets": [{"count": 1, "servers": [1, "a"]}]}"#);
    let out = bin().arg("capacity").arg(&broken).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("message_sets[0].servers[1]"));

    let degenerate = write(
        dir.path(),
        "d.json",
        r#"{"pattern": {"n_servers": 2, "x": 1, "t": 1, "message_sets": [{"count": 1, "servers": [1, 2]}]}}"#,
    );
    let out = bin().arg("simulate").arg(&degenerate).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn regenerates_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["fixtures", "regen", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    for name in ["sec2_running", "example_1", "example_2", "example_3", "example_4", "example_5", "example_6"] {
        let fresh = std::fs::read_to_string(dir.path().join(format!("{name}.json"))).unwrap();
        let committed = std::fs::read_to_string(fixture(&format!("{name}.json"))).unwrap();
        assert_eq!(fresh, committed);
    }
}
