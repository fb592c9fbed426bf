use std::path::Path;
use std::process::{Command, Output};

fn magicbench(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magicbench")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.txt"),
        "experiment = protocol-unit\np = 0.01, 0.05\nshots = 1e4, 1e5, 1e6\nbootstrap = 200\noutput = r.csv\n",
    )
    .unwrap();
    let o = magicbench(&["simulate", "--config", "cfg.txt"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "p,scheme,shots,accept_rate_msd,accept_rate_detect,epsilon_true,epsilon_hat,std_hat,seed");
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 3);

    let o = magicbench(&["fit", "--in", "r.csv", "--r", "0.5"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fits: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let fits = fits.as_array().unwrap();
    assert_eq!(fits.len(), 4);
    for f in fits {
        let b = f["b"].as_f64().unwrap();
        assert!((b + 0.5).abs() < 0.1, "b = {b}");
        assert!(f["overhead"].as_u64().unwrap() > 0);
    }
}

#[test]
fn plan_samples_bell() {
    let dir = tempfile::tempdir().unwrap();
    let o = magicbench(
        &["plan-samples", "--scheme", "bell", "--r", "0.5", "--delta", "0.1", "--epsilon", "0.01"],
        dir.path(),
    );
    assert!(o.status.success());
    let plan: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let copies = plan["total_copies"].as_u64().unwrap();
    assert_eq!(copies % 2, 0);
    assert_eq!(plan["rounds"].as_u64().unwrap() * 2, copies);
}

#[test]
fn twirl_check_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = magicbench(&["twirl-check", "--state", "CCZ"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("bell: Yes"), "{text}");
    assert!(text.contains("single-copy: Yes"), "{text}");
    assert!(text.contains("witness (dim 7)"), "{text}");
    let o = magicbench(&["twirl-check", "--state", "T", "--scheme", "single-copy"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("single-copy: No"));
    // Single-copy planning on a state where the scheme does not apply.
    let o = magicbench(
        &["plan-samples", "--scheme", "single-copy", "--r", "0.5", "--delta", "0.1", "--epsilon", "0.01", "--state", "T"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ancilla_reduce_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.txt"), "QUBITS 3\nH 0\nCNOT 0 1\nCNOT 0 2\nCNOT 1 2\nH 1\n").unwrap();
    let o = magicbench(
        &["ancilla-reduce", "--in", "c.txt", "--ancillas", "1", "--out", "v.txt", "--post", "post.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = std::fs::read_to_string(dir.path().join("v.txt")).unwrap();
    assert!(v.starts_with("QUBITS 2"), "{v}");
    let post: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("post.json")).unwrap()).unwrap();
    assert_eq!(post["qubits"], 2);
    assert_eq!(post["post"]["slots"].as_array().unwrap().len(), 1);

    std::fs::write(dir.path().join("t.txt"), "QUBITS 2\nT 0\nCNOT 0 1\n").unwrap();
    let o = magicbench(&["ancilla-reduce", "--in", "t.txt", "--ancillas", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "experiment = nope\n").unwrap();
    assert_eq!(magicbench(&["simulate", "--config", "bad.txt"], dir.path()).status.code(), Some(2));
    assert_eq!(magicbench(&["simulate", "--config", "missing.txt"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("p.txt"), "experiment = steane-bell\np = 0.5\n").unwrap();
    assert_eq!(magicbench(&["simulate", "--config", "p.txt"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("cap.txt"), "experiment = c832-tomography\np = 0.01\nshots = 10\n").unwrap();
    assert_eq!(magicbench(&["simulate", "--config", "cap.txt"], dir.path()).status.code(), Some(3));
    let o = magicbench(&["plan-samples", "--scheme", "bell", "--r", "2", "--delta", "0.1", "--epsilon", "0.01"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
