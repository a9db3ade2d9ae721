use std::path::PathBuf;
use std::process::{Command, Output};

fn data(rel: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel);
    p.to_str().unwrap().to_string()
}

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel).to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pauliprop")).args(args).env_remove("PAULIPROP_THREADS").output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn bell_expectation_matches_oracle() {
    let text = stdout(&[
        "expval",
        "--circuit",
        &data("circuits/bell.json"),
        "--observable",
        &data("observables/zz.txt"),
        "--state",
        "basis:00",
        "--ell",
        "4",
    ]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# pauliprop expval v1"));
    let value: f64 = lines.next().unwrap().parse().unwrap();
    let circuit =
        pauliprop::circuit_io::parse_circuit(&std::fs::read_to_string(data("circuits/bell.json")).unwrap()).unwrap();
    let o = pauliprop::PauliSum::parse("1 ZZ").unwrap();
    let exact = pauliprop::oracle::exact_expectation(&circuit, &pauliprop::StateSpec::zeros(2), &o).unwrap();
    assert!((value - exact).abs() < 1e-9, "{value} vs {exact}");
    // CNOT then H on |00>: ZZ decays under two rounds of noise plus read-out
    assert!((value - (-0.4f64).exp()).abs() < 1e-9);
}

#[test]
fn analyze_reports_gate_threshold() {
    let text = stdout(&["--format", "csv", "analyze", "--gamma", "0.1", "--depth", "15", "--epsilon", "0.01"]);
    assert!(text.lines().any(|l| l == "ell_gate,59"), "{text}");
    assert!(text.lines().any(|l| l == "depth_threshold,46"), "{text}");
}

#[test]
fn validate_rejects_non_unitary_gate() {
    let out = run(&["validate", "--circuit", &fixture("bad.json")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("non-unitary gate at layer 2"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn validate_passes_on_shipped_circuits() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/circuits");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = stdout(&["--format", "csv", "validate", "--circuit", path.to_str().unwrap()]);
        assert!(!text.contains(",fail"), "{}: {text}", path.display());
        seen += 1;
    }
    assert!(seen >= 4);
}

#[test]
fn error_classes_exit_one_with_one_line() {
    let cases: Vec<Vec<String>> = vec![
        vec![
            "expval".into(),
            "--circuit".into(),
            "missing.json".into(),
            "--observable".into(),
            data("observables/zz.txt"),
            "--ell".into(),
            "2".into(),
        ],
        vec![
            "expval".into(),
            "--circuit".into(),
            data("circuits/bell.json"),
            "--observable".into(),
            data("observables/z3.txt"),
            "--ell".into(),
            "2".into(),
        ],
        vec![
            "expval".into(),
            "--circuit".into(),
            data("circuits/rotations_readout.json"),
            "--observable".into(),
            data("observables/z3.txt"),
            "--epsilon".into(),
            "0.1".into(),
        ],
        vec![
            "state".into(),
            "--circuit".into(),
            data("circuits/ghz4_gate.json"),
            "--ell".into(),
            "2".into(),
            "--check".into(),
            "--cap".into(),
            "2".into(),
        ],
        vec![
            "analyze".into(),
            "--gamma".into(),
            "-1".into(),
            "--depth".into(),
            "3".into(),
            "--epsilon".into(),
            "0.1".into(),
        ],
        vec!["expval".into(), "--circuit".into(), data("circuits/bell.json")],
    ];
    for args in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = run(&refs);
        assert_eq!(out.status.code(), Some(1), "{refs:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.starts_with("error: "), "{err}");
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    }
}

#[test]
fn formats_share_a_version_header() {
    let base = ["analyze", "--gamma", "0.2", "--depth", "4", "--epsilon", "0.05"];
    let text = stdout(&base);
    assert!(text.starts_with("# pauliprop analyze v1\n# quantity value\n"));
    let csv = stdout(&[&["--format", "csv"][..], &base[..]].concat());
    assert!(csv.starts_with("# pauliprop analyze v1\nquantity,value\n"));
    let jsonl = stdout(&[&["--format", "jsonl"][..], &base[..]].concat());
    let mut lines = jsonl.lines();
    assert_eq!(lines.next(), Some(r#"{"format":"pauliprop analyze v1"}"#));
    for l in lines {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert!(v.get("quantity").is_some());
    }
}

#[test]
fn sampler_distribution_sums_to_one() {
    let text = stdout(&[
        "--format",
        "csv",
        "sample",
        "--circuit",
        &data("circuits/rotations_readout.json"),
        "--ell-s",
        "2",
        "--distribution",
    ]);
    let total: f64 = text.lines().skip(2).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let args = [
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
        "analyze",
        "--gamma",
        "0.1",
        "--depth",
        "15",
        "--epsilon",
        "0.01",
    ];
    let out = run(&args);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.contains("ell_gate,59"));
}

#[test]
fn thread_count_does_not_change_output() {
    let args =
        ["weights", "--circuit", &data("circuits/ghz4_gate.json"), "--observable", &data("observables/ghz4.txt")];
    let one = stdout(&[&["--threads", "1"][..], &args[..]].concat());
    let four = stdout(&[&["--threads", "4"][..], &args[..]].concat());
    assert_eq!(one, four);
}
