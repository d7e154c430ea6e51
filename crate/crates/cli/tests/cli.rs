use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn protocol(name: &str) -> String {
    root().join("protocols").join(name).to_string_lossy().into_owned()
}

fn qipsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qipsim"))
        .args(args)
        .output()
        .expect("qipsim runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Data rows of a CSV report, split into fields.
fn rows(o: &Output) -> Vec<Vec<String>> {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("input,prover,p_acc_lower,p_acc_upper,p_rej_lower,interactions,steps,wallclock_s")
    );
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn field(row: &[String], i: usize) -> f64 {
    row[i].parse().unwrap()
}

#[test]
fn shipped_protocols_pass_check() {
    for f in ["zero.qip.toml", "odd.qip.toml", "rfa-parity.qip.toml", "npfa-coin.qip.toml"] {
        let o = qipsim(&["check", &protocol(f), "--n-max", "5"]);
        assert!(o.status.success(), "{f}: {}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
}

#[test]
fn deleted_transition_is_reported() {
    let text = std::fs::read_to_string(protocol("zero.qip.toml")).unwrap();
    let sep = "\n[[verifier.transitions]]";
    let parts: Vec<&str> = text.split(sep).collect();
    assert!(parts[1].contains("state = \"q0\""));
    let broken = [&parts[..1], &parts[2..]].concat().join(sep);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.qip.toml");
    std::fs::write(&path, broken).unwrap();
    let o = qipsim(&["check", path.to_str().unwrap(), "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(4));
    let out = stdout(&o);
    assert!(out.contains("FAIL well-formed"));
    assert!(out.contains("|q0,#⟩ has no image"), "{out}");
}

#[test]
fn false_publicness_claim_fails() {
    let text = std::fs::read_to_string(protocol("odd.qip.toml")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("odd.qip.toml");
    std::fs::write(&path, text.replace("public = false", "public = true")).unwrap();
    let o = qipsim(&["check", path.to_str().unwrap(), "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("FAIL public"));
}

#[test]
fn center_accepts_middle_one() {
    let o = qipsim(&["run", &protocol("center.qip.toml"), "--N", "3", "--input", "010"]);
    let r = rows(&o);
    assert_eq!(field(&r[0], 2), 1.0);
}

#[test]
fn odd_uses_one_interaction() {
    let r = rows(&qipsim(&["run", "builtin:odd", "--input", "10", "--count-interactions"]));
    assert_eq!(field(&r[0], 2), 1.0);
    assert_eq!(r[0][5], "1");
}

#[test]
fn zero_rejects_empty_input() {
    let r = rows(&qipsim(&["run", "builtin:zero", "--input", ""]));
    assert_eq!(field(&r[0], 4), 1.0);
    assert_eq!(field(&r[0], 3), 0.0);
}

#[test]
fn zero_negatives_are_rejected() {
    let r = rows(&qipsim(&["sweep", &protocol("zero.qip.toml"), "--select", "negatives"]));
    assert_eq!(r.len(), 64);
    assert!(r.iter().all(|row| field(row, 3) == 0.0));
}

#[test]
fn center_soundness_sweep() {
    let r = rows(&qipsim(&[
        "sweep",
        "builtin:center",
        "--N",
        "3",
        "--max-len",
        "7",
        "--select",
        "negatives",
        "--odd-length",
    ]));
    assert!(!r.is_empty());
    assert!(r.iter().all(|row| row[0].len() % 2 == 1));
    let worst = r.iter().map(|row| field(row, 3)).fold(0.0, f64::max);
    assert!(worst <= 1.0 / 3.0 + 1e-9, "{worst}");
}

#[test]
fn upal_soundness_sweep() {
    let r = rows(&qipsim(&["sweep", "builtin:upal", "--select", "negatives", "--threads", "2"]));
    let worst = r.iter().map(|row| field(row, 3)).fold(0.0, f64::max);
    assert!(worst <= 0.25 + 1e-9, "{worst}");
}

#[test]
fn odd_mcomp_query_masses() {
    let o = qipsim(&["trace", "builtin:odd", "--input", "01", "--mcomp"]);
    assert!(o.status.success());
    assert!(stdout(&o).trim_end().ends_with("query_masses: [0, 0, 1, 0]"));
}

#[test]
fn exit_codes() {
    assert_eq!(qipsim(&["run", "builtin:nope"]).status.code(), Some(2));
    assert_eq!(qipsim(&["run", "/nonexistent/x.qip.toml"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.qip.toml");
    std::fs::write(&path, "name = \"x\"\n[verifier\n").unwrap();
    let o = qipsim(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("odd.qip.toml");
    let o = qipsim(&["export", "odd", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let a = rows(&qipsim(&["sweep", path.to_str().unwrap(), "--family", "honest"]));
    let b = rows(&qipsim(&["sweep", "builtin:odd", "--family", "honest"]));
    let strip = |r: Vec<Vec<String>>| r.into_iter().map(|mut row| {
        row.pop();
        row
    });
    assert!(strip(a).eq(strip(b)));
}

#[test]
fn parallel_sweep_matches_serial() {
    let run = |threads: &str| {
        let r = rows(&qipsim(&["sweep", "builtin:rfa-mod3", "--max-len", "5", "--threads", threads]));
        r.into_iter()
            .map(|mut row| {
                row.pop();
                row
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn json_output() {
    let o = qipsim(&["run", "builtin:zero", "--input", "10", "--format", "json"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("\"p_acc_lower\": 1.0"), "{out}");
}
