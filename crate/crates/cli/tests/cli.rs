use std::path::Path;
use std::process::{Command, Output};

fn qfidp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfidp")).arg("--out-dir").arg(dir).args(args).output().expect("spawn qfidp")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = qfidp(dir.path(), &["list"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for name in ["tradeoff", "spectrum", "audit", "classical"] {
        assert!(s.contains(name), "{s}");
    }
    let o = qfidp(dir.path(), &["--seed", "7", "config"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("seed = 7"));
}

#[test]
fn compose_writes_outputs_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = qfidp(dir.path(), &["--check", "compose"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("compose: PASS crossover"));
    assert!(dir.path().join("compose_ledger.csv").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("compose_summary.json")).unwrap()).unwrap();
    assert!((summary["ratio_k100_cg0.1"].as_f64().unwrap() - 9.0).abs() < 0.05);
}

#[test]
fn failing_check_sets_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let o = qfidp(dir.path(), &["--check", "dephasing"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL amplification"));
    // Without --check the run still succeeds.
    assert!(qfidp(dir.path(), &["dephasing"]).status.success());
}

#[test]
fn audit_round_trip_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(qfidp(d, &["audit", "commit"]).status.success());
    let commitment = d.join("commitment.json");
    let o = qfidp(d, &["audit", "challenge", "--commitment", commitment.to_str().unwrap()]);
    assert!(o.status.success());
    let records = d.join("records.json");
    let challenge = d.join("challenge.json");
    let verify = |extra: &[&str]| {
        let mut args = extra.to_vec();
        args.extend([
            "audit",
            "verify",
            "--records",
            records.to_str().unwrap(),
            "--commitment",
            commitment.to_str().unwrap(),
            "--challenge",
            challenge.to_str().unwrap(),
        ]);
        qfidp(d, &args)
    };
    let o = verify(&["--check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict Accept"));
    assert!(d.join("transcript.json").exists());

    let mut recs: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&records).unwrap()).unwrap();
    let eps = recs[0]["epsilon"].as_f64().unwrap();
    recs[0]["epsilon"] = (0.8 * eps).into();
    std::fs::write(&records, serde_json::to_string(&recs).unwrap()).unwrap();
    let o = verify(&["--check"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict Reject"));
}

#[test]
fn fiat_shamir_challenge_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(qfidp(d, &["audit", "commit"]).status.success());
    let c = d.join("commitment.json");
    let read = || std::fs::read_to_string(d.join("challenge.json")).unwrap();
    let args = ["audit", "challenge", "--fiat-shamir", "--commitment", c.to_str().unwrap()];
    assert!(qfidp(d, &args).status.success());
    let first = read();
    assert!(qfidp(d, &["--seed", "9"].iter().chain(&args).copied().collect::<Vec<_>>()).status.success());
    let a: serde_json::Value = serde_json::from_str(&first).unwrap();
    let b: serde_json::Value = serde_json::from_str(&read()).unwrap();
    assert_eq!(a["indices"], b["indices"]);
}

#[test]
fn unknown_config_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\nnot_a_key = 3\n").unwrap();
    let o = qfidp(dir.path(), &["--config", cfg.to_str().unwrap(), "compose"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not_a_key"));
}
