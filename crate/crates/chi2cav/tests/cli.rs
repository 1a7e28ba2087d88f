//! End-to-end tests of the `chi2cav` binary: exit codes, table layout,
//! determinism and config validation.

use std::path::Path;
use std::process::{Command, Output};

fn chi2cav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chi2cav"))
        .args(args)
        .env("CHI2CAV_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const REFERENCE: &str = r#"{
    "gamma1": 1e7, "gamma1_c": 1e7, "gamma_s": 1e7, "gamma_i": 1e7,
    "mu1": 1.0, "mu2": 1.0, "nu_hz": 2.818e14
}"#;

#[test]
fn threshold_reference_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.json", REFERENCE);
    let out = chi2cav(&["threshold", "--config", &config]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p1_thr_w,p1_min_w,eta,clamped_p2_w,efficiency_at_threshold,mode"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let p1_thr: f64 = row[0].parse().unwrap();
    let p1_min: f64 = row[1].parse().unwrap();
    let clamp: f64 = row[3].parse().unwrap();
    let efficiency: f64 = row[4].parse().unwrap();
    assert!((p1_thr - 3.7345e-5).abs() < 1e-8);
    assert!((p1_min - p1_thr).abs() < 1e-16);
    assert!((clamp - p1_thr).abs() < 1e-16);
    assert!((efficiency - 1.0).abs() < 1e-12);
}

#[test]
fn threshold_detuned_and_numeric_modes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "detuned.json",
        r#"{
            "gamma1": 1e7, "gamma1_c": 1e7, "gamma_s": 1e7, "gamma_i": 1e7,
            "delta_s": 1e7, "delta_i": 1e7,
            "mu1": 1.0, "mu2": 1.0, "nu_hz": 2.818e14
        }"#,
    );
    let detuned = chi2cav(&["threshold", "--config", &config, "--detuned"]);
    let numeric = chi2cav(&["threshold", "--config", &config, "--numeric"]);
    assert!(detuned.status.success() && numeric.status.success());
    let parse = |out: &Output| -> (f64, String) {
        let text = String::from_utf8(out.stdout.clone()).unwrap();
        let row = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        (fields[0].parse().unwrap(), fields[5].to_string())
    };
    let (p_detuned, detuned_mode) = parse(&detuned);
    let (p_numeric, numeric_mode) = parse(&numeric);
    assert_eq!(detuned_mode, "effective_decay_substitution");
    assert_eq!(numeric_mode, "numeric_bifurcation");
    // The substitution rule is exact in this symmetric-detuning case.
    assert!((p_detuned - p_numeric).abs() < 1e-6 * p_numeric);
    assert!((p_detuned / 3.734453e-5 - 2.0607).abs() < 1e-3);
}

#[test]
fn steady_command_above_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.json", REFERENCE);
    let out = chi2cav(&[
        "steady",
        "--config",
        &config,
        "--power",
        "7.468906273076e-5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[6], "ndopo");
    let sh_flux: f64 = row[7].parse().unwrap();
    assert!((sh_flux - 1e14).abs() < 1e7, "sh_flux {sh_flux}");
    let conservation: f64 = row[10].parse().unwrap();
    assert!(conservation < 1e-9);
}

#[test]
fn steady_requires_a_power() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.json", REFERENCE);
    let out = chi2cav(&["steady", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("pump power"), "{err}");
}

#[test]
fn clamp_curve_writes_json_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("curve.json");
    let config = write_config(
        dir.path(),
        "sweep.json",
        &format!(
            r#"{{
                "gamma1": 1e7, "gamma1_c": 1e7, "gamma_s": 1e7, "gamma_i": 1e7,
                "mu1": 1.0, "mu2": 1.0, "nu_hz": 2.818e14,
                "sweep": {{"start": 0.0, "stop": 7.5e-5, "steps": 11, "spacing": "linear"}},
                "output": {{"path": "{}", "format": "json"}}
            }}"#,
            out_path.display()
        ),
    );
    let out = chi2cav(&["clamp-curve", "--config", &config]);
    assert!(out.status.success());
    let document: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(document["columns"][0], "p1_w");
    assert_eq!(document["rows"].as_array().unwrap().len(), 11);
}

#[test]
fn spectrum_emits_minimum_footer() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.json", REFERENCE);
    let out = chi2cav(&[
        "spectrum",
        "--config",
        &config,
        "--model",
        "eq6",
        "--n",
        "3",
        "--omega-max",
        "16",
        "--points",
        "301",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("omega_hat,f_hz,v2,v2_db\n"));
    let footer = text.lines().last().unwrap();
    assert!(footer.starts_with("# minimum omega_hat"), "{footer}");
    let fields: Vec<&str> = footer.split_whitespace().collect();
    let omega_min: f64 = fields[3].parse().unwrap();
    let v_min: f64 = fields[5].parse().unwrap();
    assert!((omega_min - 3.238).abs() < 5e-3);
    assert!((v_min - 0.9622).abs() < 1e-3);
}

#[test]
fn spectrum_eq5_below_threshold_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.json", REFERENCE);
    let out = chi2cav(&[
        "spectrum",
        "--config",
        &config,
        "--model",
        "eq5",
        "--n",
        "0.5",
        "--omega-max",
        "4",
        "--points",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cascade_reproduces_nondegenerate_wavelengths() {
    let c = 299792458.0;
    let nu = c / 1064e-9;
    let delta = (c / 1033e-9 - c / 1095e-9) / 2.0;
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "nm.json",
        &format!(
            r#"{{
                "gamma1": 1e7, "gamma1_c": 1e7, "gamma_s": 1e7, "gamma_i": 1e7,
                "mu1": 1.0, "mu2": 1.0, "nu_hz": {nu}
            }}"#
        ),
    );
    let out = chi2cav(&[
        "cascade",
        "--config",
        &config,
        "--delta",
        &delta.to_string(),
        "--order",
        "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let wavelengths: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("ir,"))
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(wavelengths.len(), 3);
    assert!(
        (wavelengths[0] - 1095.0).abs() < 1.0,
        "idler {}",
        wavelengths[0]
    );
    assert!((wavelengths[1] - 1064.0).abs() < 0.01);
    assert!(
        (wavelengths[2] - 1033.0).abs() < 1.0,
        "signal {}",
        wavelengths[2]
    );
}

#[test]
fn verify_reference_passes_with_documented_item() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.json", REFERENCE);
    let out = chi2cav(&["verify", "--config", &config]);
    assert!(
        out.status.success(),
        "verify must exit 0 on the reference cavity"
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("overall: PASS"));
    assert!(
        text.contains("[DOC ]"),
        "documented comparison item missing"
    );
    assert!(!text.contains("[FAIL]"));
    let json_start = text.find('{').expect("JSON report appended");
    let document: serde_json::Value = serde_json::from_str(&text[json_start..]).unwrap();
    assert_eq!(document["report"]["overall"], true);
    let checks = document["report"]["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .any(|c| c["status"] == "documented-discrepancy"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = write_config(
        dir.path(),
        "bad_key.json",
        r#"{"gamma1": 1e7, "gamma1_c": 1e7, "gamma_s": 1e7, "gamma_i": 1e7,
            "mu1": 1.0, "mu2": 1.0, "mu3": 1.0, "nu_hz": 2.818e14}"#,
    );
    let out = chi2cav(&["threshold", "--config", &bad_key]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("mu3"));

    let overcoupled = write_config(
        dir.path(),
        "overcoupled.json",
        r#"{"gamma1": 1e7, "gamma1_c": 2e7, "gamma_s": 1e7, "gamma_i": 1e7,
            "mu1": 1.0, "mu2": 1.0, "nu_hz": 2.818e14}"#,
    );
    let out = chi2cav(&["threshold", "--config", &overcoupled]);
    assert_eq!(out.status.code(), Some(2));

    let out = chi2cav(&["threshold", "--config", "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.json", REFERENCE);
    for args in [
        vec!["threshold", "--config", config.as_str()],
        vec![
            "clamp-curve",
            "--config",
            config.as_str(),
            "--pmin",
            "0",
            "--pmax",
            "7e-5",
            "--steps",
            "17",
        ],
        vec![
            "spectrum",
            "--config",
            config.as_str(),
            "--model",
            "eq4",
            "--n",
            "0.8",
            "--omega-max",
            "10",
            "--points",
            "33",
        ],
        vec!["verify", "--config", config.as_str()],
    ] {
        let first = chi2cav(&args);
        let second = chi2cav(&args);
        assert_eq!(
            first.stdout, second.stdout,
            "non-deterministic output for {args:?}"
        );
    }
}

#[test]
fn bad_thread_cap_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.json", REFERENCE);
    let out = Command::new(env!("CARGO_BIN_EXE_chi2cav"))
        .args(["threshold", "--config", &config])
        .env("CHI2CAV_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
