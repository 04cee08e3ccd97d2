use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn photonsub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photonsub")).args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn e_n(args: &[&str]) -> f64 {
    json_stdout(&photonsub(args))["log_negativity"].as_f64().unwrap()
}

#[test]
fn displacement_raises_entanglement() {
    let displaced = e_n(&["run", "--lambda", "0.15", "--reflectance", "0.1", "--alpha", "0.35", "--beta", "-0.35"]);
    let plain = e_n(&["run", "--lambda", "0.15", "--reflectance", "0.1", "--alpha", "0", "--beta", "0"]);
    assert!(displaced > plain, "{displaced} vs {plain}");
}

#[test]
fn run_reports_diagnostics() {
    let v = json_stdout(&photonsub(&["run", "--lambda", "0.2", "--squeezing", "0.2"]));
    for key in ["success_probability", "trace_norm_pt", "min_pt_eigenvalue", "truncation_deficit", "psd_floor"] {
        assert!(v[key].is_number(), "missing {key}");
    }
    assert_eq!(v["params"]["local_op"]["kind"], "squeezing");
    assert_eq!(v["params"]["cutoff"], 10);
}

#[test]
fn loss_lowers_entanglement() {
    let lossless = e_n(&["run", "--lambda", "0.25", "--alpha", "0.3", "--beta", "-0.3"]);
    let lossy = e_n(&["run", "--lambda", "0.25", "--nu", "0.2", "--alpha", "0.3", "--beta", "-0.3"]);
    assert!(lossy < lossless);
}

#[test]
fn vacuum_input_is_a_parameter_error() {
    let out = photonsub(&["run", "--lambda", "0", "--alpha", "0", "--beta", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "zero_success");
}

#[test]
fn guard_violations_name_the_guard() {
    let out = photonsub(&["run", "--lambda", "0.2", "--eta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));
    let out = photonsub(&["run", "--lambda", "0.2", "--alpha", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncation"));
    assert_eq!(photonsub(&["run", "--lambda", "0.2", "--alpha", "0.1", "--squeezing", "0.1"]).status.code(), Some(2));
    assert_eq!(photonsub(&["run", "--lambda", "0.2", "--unknown"]).status.code(), Some(2));
}

#[test]
fn sweep_writes_deterministic_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let args = |out: &str| {
        vec![
            "sweep".to_string(),
            "--grid".into(),
            "alpha:-0.2:0.2:0.1".into(),
            "--grid".into(),
            "beta:-0.2:0.2:0.1".into(),
            "--lambda".into(),
            "0.15".into(),
            "--output".into(),
            out.to_string(),
        ]
    };
    let (a, b) = (path("a.csv"), path("b.csv"));
    for out in [&a, &b] {
        let run = Command::new(env!("CARGO_BIN_EXE_photonsub")).args(args(out)).output().unwrap();
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,beta,e_n,p_succ,error");
    assert_eq!(lines.len(), 26);
    assert!(lines[1].starts_with("-0.2,-0.2,"));
    let meta: Value = serde_json::from_str(&fs::read_to_string(format!("{a}.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["rows"], 25);
    assert_eq!(meta["command"], "sweep");
    assert_eq!(fs::read(format!("{a}.meta.json")).unwrap(), fs::read(format!("{b}.meta.json")).unwrap());
}

#[test]
fn sweep_marks_failed_rows() {
    let out = photonsub(&["sweep", "--grid", "lambda:0:0.1:0.05"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "lambda,e_n,p_succ,error");
    assert_eq!(rows[1], "0,,,zero_success");
    assert!(rows[2].ends_with(','));
}

#[test]
fn optimized_sweep_columns() {
    let out = photonsub(&["sweep", "--grid", "lambda:0.1:0.3:0.1", "--optimize-alpha", "--format", "json"]);
    let rows = json_stdout(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let d = r["e_n_displaced"].as_f64().unwrap();
        assert!(d > r["e_n_subtraction"].as_f64().unwrap());
        assert!(r["e_n_subtraction"].as_f64().unwrap() > r["e_n_input"].as_f64().unwrap());
        assert!(r["alpha_opt"].as_f64().unwrap() > 0.0);
        assert!(r["error"].is_null());
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = photonsub(&["sweep", "--grid", "nu:0:0.2:0.1", "--lambda", "0.2", "--output", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"lambda": 0.25, "nu": 0.2, "alpha": 0.3, "beta": -0.3}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = json_stdout(&photonsub(&["run", "--config", cfg]));
    assert_eq!(from_file["params"]["nu"], 0.2);
    let overridden = json_stdout(&photonsub(&["run", "--config", cfg, "--nu", "0"]));
    assert_eq!(overridden["params"]["nu"], 0.0);
    assert_eq!(overridden["params"]["lambda"], 0.25);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"lambda": 0.25, "colour": "red"}"#).unwrap();
    let out = photonsub(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"config\""));
    assert_eq!(photonsub(&["run", "--config", "/nonexistent.json"]).status.code(), Some(3));
}

#[test]
fn optimize_command() {
    let v = json_stdout(&photonsub(&["optimize", "--lambda", "0.15"]));
    let opt = &v["optimum"];
    let alpha = opt["alpha_opt"].as_f64().unwrap();
    let bracket = opt["bracket"].as_array().unwrap();
    assert!(bracket[0].as_f64().unwrap() <= alpha && alpha <= bracket[1].as_f64().unwrap());
    let csv = photonsub(&["optimize", "--lambda", "0.15", "--format", "csv"]);
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("alpha_opt,e_n_at_opt,p_succ_at_opt"));
}

#[test]
fn validate_command() {
    let ok = photonsub(&["validate"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8(ok.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 6);

    let small = photonsub(&["validate", "--cutoff", "3"]);
    assert_eq!(small.status.code(), Some(1));
    assert!(String::from_utf8(small.stdout).unwrap().contains("FAIL tmsv_closed_form"));

    let strong = photonsub(&["validate", "--lambda", "0.9"]);
    assert_eq!(strong.status.code(), Some(1));
    assert!(String::from_utf8(strong.stdout).unwrap().contains("FAIL norm_deficit"));
}
