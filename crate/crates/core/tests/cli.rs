use std::io::Cursor;
use std::process::{Command, Stdio};
use std::io::Write;

use qsat::cli::{main_with, EXIT_ERROR, EXIT_SAT, EXIT_UNSAT};
use qsat::{compile, parse_dimacs, Circuit};
use serde_json::Value;

const WORKED: &str = "c worked example\np cnf 3 4\n1 0\n2 3 0\n1 -3 0\n-1 -2 3 0\n";
const CONTRADICTION: &str = "p cnf 1 2\n1 0\n-1 0";

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_cli(args: &[&str], stdin: &str) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qsat").chain(args.iter().copied());
    let code = main_with(argv, &mut Cursor::new(stdin.as_bytes()), &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(run: &Run) -> Value {
    serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("{e}: {}", run.stdout))
}

#[test]
fn worked_example_json_report() {
    let r = run_cli(&["--json", "--dense-check", "--literal-v-theta"], WORKED);
    assert_eq!(r.code, EXIT_SAT, "{}", r.stderr);
    let v = json(&r);
    assert_eq!(v["verdict"], "SAT");
    assert_eq!(v["model_count"], 2);
    assert!((v["beta_squared"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((v["expectation_e"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((v["alpha"].as_f64().unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-12);
    assert!((v["theta"].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    assert_eq!(v["qubits"]["vars"], 3);
    assert_eq!(v["qubits"]["dust"], 14);
    assert_eq!(v["qubits"]["result"], 1);
    assert_eq!(v["gate_count"], 26);
    assert_eq!(v["complexity"]["n1_input_size"], 26);
    assert_eq!(v["complexity"]["n2_dust_bound"], 47);
    assert_eq!(v["complexity"]["n3_step_bound"], 120);
    assert_eq!(v["complexity"]["within_bounds"], true);
    assert_eq!(v["oracle"]["status"], "checked");
    assert_eq!(v["oracle"]["agrees"], true);
    assert_eq!(v["dense_check"]["agrees"], true);
    assert!(v["literal_v_theta"]["norm_sqr"].as_f64().unwrap() > 1.0);
    assert!(v["wall_time_ms"].as_f64().is_some());
}

#[test]
fn contradiction_is_unsat() {
    let r = run_cli(&["--json"], CONTRADICTION);
    assert_eq!(r.code, EXIT_UNSAT);
    let v = json(&r);
    assert_eq!(v["verdict"], "UNSAT");
    assert_eq!(v["beta_squared"], 0.0);
    assert_eq!(v["model_count"], 0);
}

#[test]
fn text_report() {
    let r = run_cli(&["--theta", "1.0", "--show-state"], WORKED);
    assert_eq!(r.code, EXIT_SAT);
    assert!(r.stdout.contains("verdict       SAT"), "{}", r.stdout);
    assert!(r.stdout.contains("model count   2"));
    assert!(r.stdout.contains("theta = 1.000000000000"));
    // one line per branch in register notation
    assert_eq!(r.stdout.lines().filter(|l| l.contains(";1>")).count(), 2);
}

#[test]
fn negative_theta_is_accepted() {
    let r = run_cli(&["--json", "--theta", "-0.5"], WORKED);
    assert_eq!(r.code, EXIT_SAT);
    assert_eq!(json(&r)["theta"], -0.5);
}

#[test]
fn emitted_circuit_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("worked.cnf");
    let qc = dir.path().join("out.qc");
    std::fs::write(&cnf, WORKED).unwrap();
    let r = run_cli(
        &[cnf.to_str().unwrap(), "--emit-circuit", qc.to_str().unwrap()],
        "",
    );
    assert_eq!(r.code, EXIT_SAT, "{}", r.stderr);
    let text = std::fs::read_to_string(&qc).unwrap();
    assert!(text.starts_with("qubits 18 vars 3 dust 14\n"));
    let parsed: Circuit = text.parse().unwrap();
    assert_eq!(parsed, compile(&parse_dimacs(WORKED).unwrap()).unwrap().circuit);
}

#[test]
fn parse_errors_report_line() {
    let bad = "p cnf 2 1\n1 -3 0\n";
    let r = run_cli(&[], bad);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.stderr.contains("line 2"), "{}", r.stderr);

    let r = run_cli(&["--json"], bad);
    assert_eq!(r.code, EXIT_ERROR);
    let v = json(&r);
    assert_eq!(v["verdict"], "ERROR");
    assert_eq!(v["line"], 2);
}

#[test]
fn caps_are_errors() {
    let r = run_cli(&["--json", "--max-vars", "2"], WORKED);
    assert_eq!(r.code, EXIT_ERROR);
    let v = json(&r);
    assert_eq!(v["verdict"], "ERROR");
    assert!(v["error"].as_str().unwrap().contains("branch cap"));

    let r = run_cli(&["--max-qubits", "10"], WORKED);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.stderr.contains("exceeds the cap"), "{}", r.stderr);
}

#[test]
fn missing_file_is_an_error() {
    let r = run_cli(&["--json", "/nonexistent/x.cnf"], "");
    assert_eq!(r.code, EXIT_ERROR);
    assert_eq!(json(&r)["verdict"], "ERROR");
}

#[test]
fn bad_flag_in_json_mode_still_emits_json() {
    let r = run_cli(&["--json", "--frobnicate"], WORKED);
    assert_eq!(r.code, EXIT_ERROR);
    assert_eq!(json(&r)["verdict"], "ERROR");
}

#[test]
fn json_is_valid_for_every_corpus_input() {
    let corpus = [
        WORKED,
        CONTRADICTION,
        "p cnf 1 0\n",
        "p cnf 4 2\n1 -1 0\n2 3 4 0\n%\n0\n",
        "p cnf 2 1\n1 -3 0",
        "p cnf 2 2\n1 0",
        "garbage",
        "",
        "p cnf 2 1\n1 2",
    ];
    for input in corpus {
        let r = run_cli(&["--json", "--dense-check"], input);
        let v = json(&r);
        assert!(v["verdict"].is_string(), "{input:?}");
        assert!([EXIT_SAT, EXIT_UNSAT, EXIT_ERROR].contains(&r.code));
    }
}

#[test]
fn no_oracle_skips_check() {
    let r = run_cli(&["--json", "--no-oracle"], WORKED);
    assert_eq!(r.code, EXIT_SAT);
    let v = json(&r);
    assert_eq!(v["oracle"]["status"], "skipped");
    assert_eq!(v["model_count"], 2);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_qsat");
    for (input, code) in [(WORKED, 10), (CONTRADICTION, 20), ("p cnf 0 0", 1)] {
        let mut child = Command::new(exe)
            .arg("-")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
        let out = child.wait_with_output().unwrap();
        assert_eq!(out.status.code(), Some(code), "{input:?}");
    }
}
