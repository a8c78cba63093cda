use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rbc::netsim::Transcript;
use serde_json::Value;

fn rbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbc"))
        .args(args)
        .env_remove("RBC_FORMAT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn run_to(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--m",
        "2",
        "--rounds",
        "3",
        "--bit",
        "1",
        "--alice-seed",
        "5",
        "--bob-seed",
        "6",
    ];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", path.to_str().unwrap()]);
    rbc(&args)
}

#[test]
fn run_writes_a_deterministic_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(code(&run_to(&a, &[])), 0);
    assert_eq!(code(&run_to(&b, &[])), 0);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let t = Transcript::from_json(&text).unwrap();
    let sizes: Vec<usize> = t.rounds.iter().map(|r| r.challenge.pairs.len()).collect();
    assert_eq!(sizes, [1, 2, 4]);
    assert_eq!(t.to_json(), text);
}

#[test]
fn verify_accepts_honest_and_rejects_mutated() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    assert_eq!(code(&run_to(&path, &[])), 0);

    let out = rbc(&["verify", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let verdict: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(verdict["outcome"], "accept");
    assert_eq!(verdict["bit"], 1);
    assert!(verdict["aggregation_time"].is_string());

    let mut t = Transcript::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    t.unveils[0].site = t.unveils[0].site.other();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, t.to_json()).unwrap();
    let out = rbc(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let verdict: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(verdict["outcome"], "reject");
    assert_eq!(verdict["reason"], "site_mismatch");
    assert_eq!(verdict["reject_position"]["round"], 3);
}

#[test]
fn verify_rejects_unreadable_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    assert_eq!(code(&run_to(&path, &[])), 0);
    let text = fs::read_to_string(&path).unwrap();
    let truncated = dir.path().join("cut.json");
    fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    let out = rbc(&["verify", truncated.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());
    assert_eq!(
        code(&rbc(&[
            "verify",
            dir.path().join("missing.json").to_str().unwrap()
        ])),
        1
    );
}

#[test]
fn run_parameter_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let out = rbc(&[
        "run",
        "--bit",
        "1",
        "--dx",
        "0.01",
        "--dt",
        "0.005",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("period"));
    assert!(!path.exists());
    assert_eq!(code(&rbc(&["run", "--bit", "1", "--m", "1"])), 1);
    assert_eq!(code(&rbc(&["run", "--bit", "1", "--rounds", "0"])), 1);
    assert_eq!(code(&rbc(&["run", "--bit", "1", "--dx", "abc"])), 1);
}

#[test]
fn aborted_run_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    // local delivery at 2delta makes the first response miss its window
    let out = run_to(&path, &["--intra-delay", "0.0002"]);
    assert_eq!(code(&out), 2);
    let t = Transcript::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(t.abort.is_some());
    let out = rbc(&["verify", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let verdict: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(verdict["reason"], "incomplete_transcript");
}

#[test]
fn dual_unveil_run_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    assert_eq!(
        code(&run_to(
            &path,
            &["--dual-unveil", "--handshake", "--hq-site", "1"]
        )),
        0
    );
    let out = rbc(&["verify", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn attack_reports() {
    let out = rbc(&[
        "attack",
        "--strategy",
        "offset-guess",
        "--m",
        "2",
        "--rounds",
        "1",
        "--trials",
        "10000",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rate = report["success_rate"].as_f64().unwrap();
    let sd = (1.0f64 / 3.0 * 2.0 / 3.0 / 10_000.0).sqrt();
    assert!((rate - 1.0 / 3.0).abs() <= 3.0 * sd, "{rate}");
    assert_eq!(report["oracle_exact"], "1/3");
    assert!((report["oracle_rate"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);

    let out = rbc(&[
        "attack",
        "--strategy",
        "honest-relabel",
        "--m",
        "3",
        "--rounds",
        "2",
        "--trials",
        "200",
    ]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["success_rate"], 1.0);

    assert_eq!(code(&rbc(&["attack", "--strategy", "unknown"])), 1);
    assert_eq!(
        code(&rbc(&[
            "attack",
            "--strategy",
            "offset-guess",
            "--trials",
            "0"
        ])),
        1
    );
}

#[test]
fn attack_table_via_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_rbc"))
        .args(["attack", "--strategy", "offset-guess", "--trials", "100"])
        .env("RBC_FORMAT", "table")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("success_rate")));
    assert!(serde_json::from_str::<Value>(&text).is_err());
}

#[test]
fn capacity_reports() {
    let out = rbc(&[
        "capacity", "--m", "10", "--dx", "0.1", "--delta", "1e-5", "--dt", "1e-4", "--baud", "1e11",
    ]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = report["max_rounds"].as_u64().unwrap();
    assert!((8..=12).contains(&r), "{r}");

    let out = rbc(&["capacity", "--m", "2", "--dx", "1.0", "--baud", "1e6"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["max_rounds"].as_u64().unwrap() >= 15);
    let bits: Vec<u128> = report["traffic"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["bits"].as_str().unwrap().parse().unwrap())
        .collect();
    assert!(bits.windows(2).all(|w| w[1] == 2 * w[0]));

    let table = rbc(&["capacity", "--m", "2", "--baud", "1e6", "--format", "table"]);
    assert_eq!(code(&table), 0);
    assert!(String::from_utf8(table.stdout)
        .unwrap()
        .contains("max_rounds"));

    assert_eq!(code(&rbc(&["capacity", "--baud", "0"])), 1);
    assert_eq!(code(&rbc(&["capacity", "--baud", "1e11", "--dx", "-1"])), 1);
    assert_eq!(
        code(
            &Command::new(env!("CARGO_BIN_EXE_rbc"))
                .args(["capacity", "--baud", "1e9"])
                .env("RBC_FORMAT", "xml")
                .output()
                .unwrap()
        ),
        1
    );
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&rbc(&["--help"])), 0);
    assert_eq!(code(&rbc(&["--version"])), 0);
    assert_eq!(code(&rbc(&[])), 1);
}
