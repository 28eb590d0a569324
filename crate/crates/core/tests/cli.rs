use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsanov"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("cfg.json");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn passing_run_exits_zero_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("stein.csv");
    let status = bin()
        .args(["stein", "--quiet", "--config"])
        .arg(config("stein_bernoulli.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("kind,n,eps,beta_relaxed_over_n"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn same_config_and_seed_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, format: &str| {
        let out = dir.path().join(name);
        let status = bin()
            .args(["sanov", "--quiet", "--seed", "11", "--format", format, "--config"])
            .arg(config("sanov_bernoulli.json"))
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv", "csv"), run("b.csv", "csv"));
    let jsonl = run("a.jsonl", "jsonl");
    assert_eq!(jsonl, run("b.jsonl", "jsonl"));
    let first: serde_json::Value = serde_json::from_slice(jsonl.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(first["seed"], 11);
    assert_eq!(first["kind"], "sanov");
}

#[test]
fn seed_changes_the_config_hash() {
    let out = |seed: &str| {
        let o = bin()
            .args(["aep", "--quiet", "--seed", seed, "--config"])
            .arg(config("aep_bernoulli.json"))
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        String::from_utf8(o.stdout).unwrap()
    };
    let hash = |text: &str| text.lines().nth(1).unwrap().rsplit(',').next().unwrap().to_string();
    assert_ne!(hash(&out("1")), hash(&out("2")));
}

#[test]
fn bad_config_exits_one_with_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        r#"{"models": {"null": {"variant": "classical_iid", "p": [0.5, 0.5]},
                        "reference": {"variant": "classical_iid", "p": [0.5, 0.5]}},
            "eps": 1.5, "n_values": [4]}"#,
    );
    let o = bin().args(["stein", "--config"]).arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps"));

    let o = bin().args(["sanov", "--config"]).arg(config("stein_bernoulli.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(1));

    let o = bin().args(["stein", "--config", "/nonexistent/cfg.json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dimension_guard_is_an_error() {
    let o = bin()
        .args(["stein", "--quiet", "--max-dim", "16", "--config"])
        .arg(config("stein_qubits.json"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_check_exits_two() {
    // At n = 4 and 8 the slice projector keeps well under 90% of the member.
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        r#"{"models": {"low": {"variant": "classical_iid", "p": [0.3, 0.7]},
                        "reference": {"variant": "classical_iid", "p": [0.5, 0.5]}},
            "eta": 0.001, "n_values": [4, 8]}"#,
    );
    let o = bin().args(["sanov", "--config"]).arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("2 failed"));
}
