//! End-to-end checks of the `nsbox` binary: pipelines, exit codes, and
//! output formats.

use std::io::Write;
use std::process::{Command, Stdio};

fn nsbox(args: &[&str], stdin: &str) -> (String, String, i32) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_nsbox"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn nsbox");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap_or(-1),
    )
}

fn pr_file() -> String {
    let (out, _, code) = nsbox(&["gallery", "pr"], "");
    assert_eq!(code, 0);
    out
}

#[test]
fn gallery_output_validates() {
    let pr = pr_file();
    let (out, _, code) = nsbox(&["validate", "--require-nonnegative"], &pr);
    assert_eq!(code, 0, "stdout: {out}");
    assert!(out.contains("pass"));
}

#[test]
fn model_eval_round_trip_is_byte_identical() {
    let pr = pr_file();
    for kind in ["neg-meas", "neg-state"] {
        let (model, _, code) = nsbox(&["model", "--kind", kind], &pr);
        assert_eq!(code, 0);
        let (rebuilt, _, code) = nsbox(&["eval"], &model);
        assert_eq!(code, 0);
        assert_eq!(rebuilt, pr, "kind {kind}");
    }
}

#[test]
fn compressed_models_still_evaluate_back() {
    let pr = pr_file();
    let (model, _, _) = nsbox(&["model", "--kind", "neg-state"], &pr);
    let (compressed, _, code) = nsbox(&["compress"], &model);
    assert_eq!(code, 0);
    assert!(compressed.contains("\"compressed\": true"));
    assert!(compressed.contains("eta"));
    let (rebuilt, _, _) = nsbox(&["eval"], &compressed);
    assert_eq!(rebuilt, pr);
}

#[test]
fn malformed_json_exits_one_with_position() {
    let (_, err, code) = nsbox(&["validate"], "{ not json");
    assert_eq!(code, 1);
    assert!(err.contains("line 1"), "stderr: {err}");
}

#[test]
fn broken_normalization_exits_two() {
    let bad = pr_file().replace(
        "\"1/2\", \"0/1\", \"0/1\", \"1/2\"",
        "\"3/5\", \"0/1\", \"0/1\", \"1/2\"",
    );
    let (out, _, code) = nsbox(&["validate"], &bad);
    assert_eq!(code, 2, "stdout: {out}");
    assert!(out.contains("FAIL"));
}

#[test]
fn local_verdicts_and_exit_codes() {
    let pr = pr_file();
    let (out, _, code) = nsbox(&["local"], &pr);
    assert_eq!(code, 0);
    assert!(out.contains("NONLOCAL"));

    let (uniform, _, _) = nsbox(&["gallery", "uniform"], "");
    let (out, _, code) = nsbox(&["--format", "machine", "local"], &uniform);
    assert_eq!(code, 0);
    assert!(out.contains("verdict=local"), "stdout: {out}");
}

#[test]
fn quantum_verify_flags_tampered_state() {
    let pr = pr_file();
    let (qfile, _, code) = nsbox(&["quantum", "--kind", "neg-state"], &pr);
    assert_eq!(code, 0);
    let (report, _, code) = nsbox(&["quantum-verify"], &qfile);
    assert_eq!(code, 0, "report: {report}");

    // Break the trace.
    let tampered = qfile.replacen("\"1/2\"", "\"2/3\"", 1);
    assert_ne!(tampered, qfile);
    let (report, _, code) = nsbox(&["quantum-verify"], &tampered);
    assert_eq!(code, 2, "report: {report}");
    assert!(report.contains("FAIL") || report.contains("NO"));
}

#[test]
fn sampling_is_seed_deterministic_via_cli() {
    let pr = pr_file();
    let (model, _, _) = nsbox(&["model", "--kind", "neg-meas"], &pr);
    let run = |seed: &str| {
        let (out, _, code) = nsbox(
            &[
                "--format", "machine", "sample", "--input", "1,1", "--shots", "2000", "--seed",
                seed,
            ],
            &model,
        );
        assert_eq!(code, 0);
        out
    };
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
}

#[test]
fn negativity_machine_output() {
    let pr = pr_file();
    let (model, _, _) = nsbox(&["model", "--kind", "neg-state"], &pr);
    let (out, _, code) = nsbox(&["--format", "machine", "negativity"], &model);
    assert_eq!(code, 0);
    assert!(out.contains("state_negativity=4/1"), "stdout: {out}");
    assert!(out.contains("response_negativity=0/1"));
}

#[test]
fn gallery_scenario_strategy_and_seed_flags() {
    let (det, _, code) = nsbox(
        &[
            "gallery",
            "deterministic",
            "--scenario",
            "2,2/2,2",
            "--strategy",
            "1,2/2,1",
        ],
        "",
    );
    assert_eq!(code, 0);
    assert!(det.contains("\"probabilities\""));

    let (a, _, _) = nsbox(
        &[
            "gallery",
            "random-ns",
            "--scenario",
            "2,2,2/2,2,2",
            "--seed",
            "3",
        ],
        "",
    );
    let (b, _, _) = nsbox(
        &[
            "gallery",
            "random-ns",
            "--scenario",
            "2,2,2/2,2,2",
            "--seed",
            "3",
        ],
        "",
    );
    assert_eq!(a, b);

    let (_, err, code) = nsbox(&["gallery", "pr", "--scenario", "3,3/2,2"], "");
    assert_eq!(code, 2);
    assert!(err.contains("2,2/2,2"));
}

#[test]
fn marginals_round_trip_through_files() {
    let pr = pr_file();
    let (table, _, code) = nsbox(&["marginals"], &pr);
    assert_eq!(code, 0);
    let (rebuilt, _, code) = nsbox(&["from-marginals"], &table);
    assert_eq!(code, 0);
    assert_eq!(rebuilt, pr);
}

#[test]
fn signalling_boxes_exit_two_with_a_witness() {
    // Party 1 outputs party 2's input: normalized, non-negative, signalling.
    let signalling = r#"{
        "scenario": {"outputs": [2, 2], "inputs": [2, 2]},
        "probabilities": {
            "1,1": ["1/2", "1/2", "0/1", "0/1"],
            "1,2": ["0/1", "0/1", "1/2", "1/2"],
            "2,1": ["1/2", "1/2", "0/1", "0/1"],
            "2,2": ["0/1", "0/1", "1/2", "1/2"]
        }
    }"#;
    for args in [
        &["marginals"][..],
        &["local"][..],
        &["model", "--kind", "neg-state"][..],
    ] {
        let (_, err, code) = nsbox(args, signalling);
        assert_eq!(code, 2, "args {args:?}, stderr: {err}");
        assert!(err.contains("signal"), "args {args:?}, stderr: {err}");
    }
}

#[test]
fn vertex_cap_is_reported() {
    let pr = pr_file();
    let (_, err, code) = nsbox(&["local", "--cap", "10"], &pr);
    assert_eq!(code, 2);
    assert!(err.contains("16"), "stderr: {err}");
}
