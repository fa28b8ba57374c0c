//! The `freqbin` binary end to end: report formats, overrides, sweeps,
//! the verification suite, and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

use freqbin::circuits::w_fraction_formula;
use num_complex::Complex64 as C64;
use serde_json::Value;

fn freqbin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqbin"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("circuits")
        .join(name)
        .display()
        .to_string()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no exit code")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout should be UTF-8")
}

#[test]
fn text_report_prints_twelve_digit_values() {
    let output = freqbin(&["--circuit", &fixture("ghz_equal.circuit")]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let text = stdout(&output);
    assert!(
        text.contains("fraction of 4-photon sector: 0.500000000000"),
        "{text}"
    );
    assert!(text.contains("colour pattern: SIIS"), "{text}");
    assert!(text.contains("fidelity: 1.00000000000"), "{text}");

    let output = freqbin(&["--circuit", &fixture("w_canonical.circuit")]);
    assert_eq!(exit_code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains("0.0357142857143"), "{text}");
    assert!(text.contains("herald: bins 1 on paths 4"), "{text}");
}

#[test]
fn structured_output_is_byte_identical_across_runs() {
    let args = [
        "--circuit",
        &fixture("w_canonical.circuit"),
        "--format",
        "structured",
    ];
    let first = freqbin(&args);
    let second = freqbin(&args);
    assert_eq!(exit_code(&first), 0);
    assert_eq!(first.stdout, second.stdout, "non-deterministic output");

    let doc: Value = serde_json::from_slice(&first.stdout).expect("valid JSON");
    assert_eq!(doc["format"], "freqbin-result");
    assert_eq!(doc["version"], 1);
    assert_eq!(doc["device"], "w");
    let fraction = doc["result"]["fraction_of_n_photon_sector"]
        .as_f64()
        .expect("fraction field");
    assert!((fraction - 1.0 / 28.0).abs() < 1e-12);
}

#[test]
fn set_overrides_change_the_result() {
    let output = freqbin(&[
        "--circuit",
        &fixture("w_canonical.circuit"),
        "--set",
        "beta1=0.3",
        "--format",
        "structured",
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let doc: Value = serde_json::from_slice(&output.stdout).unwrap();
    let fraction = doc["result"]["fraction_of_n_photon_sector"]
        .as_f64()
        .unwrap();
    let expected = w_fraction_formula(C64::new(0.3, 0.0), C64::new(0.1, 0.0)).unwrap();
    assert!((fraction - expected).abs() < 1e-12);
    assert_eq!(doc["parameters"]["beta1"].as_f64(), Some(0.3));
}

#[test]
fn grid_sweeps_run_every_assignment() {
    let output = freqbin(&[
        "--circuit",
        &fixture("w_canonical.circuit"),
        "--grid",
        "beta_ratio=0.5,1,2,4",
        "--format",
        "structured",
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let doc: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(doc["format"], "freqbin-sweep");
    assert_eq!(doc["grid"], serde_json::json!(["beta_ratio"]));
    let rows = doc["rows"].as_array().expect("rows array");
    assert_eq!(rows.len(), 4);
    for (row, ratio) in rows.iter().zip([0.5, 1.0, 2.0, 4.0]) {
        let fraction = row["result"]["fraction_of_n_photon_sector"]
            .as_f64()
            .unwrap();
        let beta2 = C64::new(0.1, 0.0);
        let expected = w_fraction_formula(beta2 * ratio, beta2).unwrap();
        assert!(
            (fraction - expected).abs() < 1e-12,
            "ratio {ratio}: fraction {fraction} != {expected}"
        );
    }

    // The text flavour renders one table row per assignment.
    let output = freqbin(&[
        "--circuit",
        &fixture("w_canonical.circuit"),
        "--grid",
        "beta_ratio=0.5,1,2,4",
    ]);
    assert_eq!(exit_code(&output), 0);
    assert!(stdout(&output).contains("4 rows"), "{}", stdout(&output));
}

#[test]
fn check_mode_runs_the_builtin_suite() {
    let output = freqbin(&["--check"]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let text = stdout(&output);
    assert!(text.contains("PASS"), "{text}");
    assert!(text.contains("all checks passed"), "{text}");
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let path = std::env::temp_dir().join(format!("freqbin-out-{}.json", std::process::id()));
    let path_text = path.display().to_string();
    let to_file = freqbin(&[
        "--circuit",
        &fixture("ghz_equal.circuit"),
        "--format",
        "structured",
        "--out",
        &path_text,
    ]);
    assert_eq!(exit_code(&to_file), 0);
    assert!(to_file.stdout.is_empty());
    let written = std::fs::read(&path).expect("report file");
    std::fs::remove_file(&path).ok();

    let to_stdout = freqbin(&[
        "--circuit",
        &fixture("ghz_equal.circuit"),
        "--format",
        "structured",
    ]);
    assert_eq!(written, to_stdout.stdout);
}

#[test]
fn invalid_inputs_exit_with_code_two() {
    // No circuit and no check mode.
    assert_eq!(exit_code(&freqbin(&[])), 2);

    // Missing file.
    assert_eq!(
        exit_code(&freqbin(&["--circuit", "/nonexistent.circuit"])),
        2
    );

    // Unparseable circuit text.
    let path = std::env::temp_dir().join(format!("freqbin-bad-{}.circuit", std::process::id()));
    std::fs::write(&path, "device = ghz\nnot a stanza\n").unwrap();
    let output = freqbin(&["--circuit", &path.display().to_string()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(exit_code(&output), 2);
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("line 2"), "stderr names the line: {stderr}");

    // Undeclared override name.
    let output = freqbin(&[
        "--circuit",
        &fixture("ghz_equal.circuit"),
        "--set",
        "bogus=1",
    ]);
    assert_eq!(exit_code(&output), 2);
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("bogus"), "{stderr}");

    // Malformed override syntax.
    let output = freqbin(&["--circuit", &fixture("ghz_equal.circuit"), "--set", "beta"]);
    assert_eq!(exit_code(&output), 2);
}
