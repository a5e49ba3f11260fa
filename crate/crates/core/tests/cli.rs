//! End-to-end runs of the `qccd` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qccd::report;

fn qccd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qccd")).args(args).output().expect("spawn qccd")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit status")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_circuit(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn compile_writes_schedule_metrics_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qccd(&["compile", "--bench", "qft:16", "--traps", "2", "--capacity", "10", "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tsv = fs::read_to_string(dir.path().join("qft-16.sta.s0.schedule.tsv")).unwrap();
    assert!(tsv.starts_with("start_us\tend_us\tkind\tqubits\ttraps"));
    let metrics = fs::read_to_string(dir.path().join("qft-16.sta.s0.metrics.txt")).unwrap();
    assert!(metrics.contains("total_time_s"));
    let csv = fs::read_to_string(dir.path().join("qft-16.runs.csv")).unwrap();
    let recs = report::read_csv(&csv).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].metrics.gates_2q, 120);
    assert!(recs[0].invocation.starts_with("qccd compile"));
}

#[test]
fn compile_from_file_with_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_circuit(dir.path(), "bell.txt", "qubits 2\nh 0\ncx 0 1\n");
    let o = qccd(&["compile", &path, "--traps", "2", "--capacity", "3", "--excess", "1", "--format", "json", "--placement", "sta,greedy"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let runs = v.as_array().or_else(|| v["runs"].as_array()).expect("run list");
    assert!(runs.len() >= 2);
}

#[test]
fn bench_gen_round_trips_through_compile() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("qv.txt");
    let o = qccd(&["bench", "gen", "--family", "qv", "--qubits", "8", "--seed", "3", "-o", file.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("96 two-qubit gates"), "{}", stderr(&o));
    let o = qccd(&["compile", file.to_str().unwrap(), "--traps", "3", "--capacity", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn same_seed_gives_identical_output() {
    let args = ["compile", "--bench", "rnd:12", "--placement", "random", "--seed", "7", "--traps", "3", "--capacity", "6"];
    let a = qccd(&args);
    let b = qccd(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_circuit(dir.path(), "bad.txt", "qubits 2\ncx 0 5\n");
    for args in [
        vec!["compile", bad.as_str()],
        vec!["compile", "/nonexistent/circuit.txt"],
        vec!["compile", "--bench", "nope:8"],
        vec!["compile", "--bench", "qft:64", "--traps", "2", "--capacity", "4"],
        vec!["compile", "--bench", "ca:7"],
        vec!["frobnicate"],
    ] {
        let o = qccd(&args);
        assert_eq!(code(&o), 1, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn deadlock_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_circuit(dir.path(), "star.txt", "qubits 4\ncx 0 1\ncx 0 2\ncx 0 3\n");
    let o = qccd(&["compile", &path, "--traps", "2", "--capacity", "2", "--excess", "0"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("deadlock"), "{}", stderr(&o));
}

#[test]
fn verification_failures_map_to_three() {
    let e = qccd::Error::Verify(qccd::scheduler::Violation::MissingGate(0));
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn sweep_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qccd(&["sweep", "excess", "--family", "qft", "--qubits", "20", "--placement", "sta,greedy", "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv_path = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).find(|p| p.extension().is_some_and(|x| x == "csv")).unwrap();
    let recs = report::read_csv(&fs::read_to_string(&csv_path).unwrap()).unwrap();
    assert_eq!(recs.len(), 20);
    let o = qccd(&["compare", csv_path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() > 1, "{text}");
}
