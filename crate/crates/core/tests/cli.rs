use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shewpt"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Path, command: &str) -> Value {
    let text = std::fs::read_to_string(out.join(format!("{command}_report.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn angles(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn solve_from_printed_angles() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["solve", "--harmonics", "3,5,7", "--init", "11,41,85"],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = report(dir.path(), "solve");
    for (got, want) in angles(&r["outputs"]["angles_deg"])
        .iter()
        .zip([12.0, 41.9, 85.7])
    {
        assert!((got - want).abs() < 0.05);
    }
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("theta_index,theta_deg\n"));
    assert_eq!(csv.lines().count(), 4);
    let sol: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("solution.json")).unwrap())
            .unwrap();
    assert!(sol["residual_norm"].as_f64().unwrap() < 1e-12);
    assert_eq!(sol["targets"], serde_json::json!([3, 5, 7]));
}

#[test]
fn solve_single_and_multistart() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["solve", "--harmonics", "3"])
        .status
        .success());
    let r = report(dir.path(), "solve");
    assert!((angles(&r["outputs"]["angles_deg"])[0] - 30.0).abs() < 1e-9);

    let o = run(
        dir.path(),
        &[
            "solve",
            "--harmonics",
            "3,5,7,9",
            "--multistart",
            "--grid-deg",
            "5",
        ],
    );
    assert!(o.status.success());
    let r = report(dir.path(), "solve");
    let hit = r["outputs"]["branches_deg"]
        .as_array()
        .unwrap()
        .iter()
        .any(|b| {
            angles(b)
                .iter()
                .zip([9.0, 26.0, 50.0, 86.0])
                .all(|(g, w)| (g - w).abs() < 1.0)
        });
    assert!(hit);
}

#[test]
fn synth_and_spectrum_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "synth",
            "--harmonics",
            "3,5,7",
            "--init",
            "11,41,85",
            "--step-voltage",
            "500",
        ],
    );
    assert!(o.status.success());
    let r = report(dir.path(), "synth");
    assert!((r["outputs"]["fundamental_rms_V"].as_f64().unwrap() - 809.19).abs() < 1.0);
    assert_eq!(r["outputs"]["peak_V"].as_f64().unwrap(), 1500.0);
    let csv = std::fs::read_to_string(dir.path().join("waveform.csv")).unwrap();
    assert!(csv.starts_with("t_s,v_V\n"));
    assert_eq!(csv.lines().count(), 8192 + 1);
    assert!(std::fs::read_to_string(dir.path().join("waveform.svg"))
        .unwrap()
        .contains("<polyline"));

    let o = run(
        dir.path(),
        &[
            "spectrum",
            "--harmonics",
            "3,5,7,9",
            "--init",
            "9,26,50,86",
            "--step-voltage",
            "375",
        ],
    );
    assert!(o.status.success());
    let r = report(dir.path(), "spectrum");
    assert!((r["outputs"]["fundamental_rms_V"].as_f64().unwrap() - 869.7).abs() < 1.5);
    assert!(
        r["outputs"]["thd"]["eliminated_orders_max_relative"]
            .as_f64()
            .unwrap()
            < 1e-6
    );
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("n,f_Hz,amp_V,rel_to_fund\n"));
    assert_eq!(csv.lines().count(), 99 + 1);
}

#[test]
fn sinusoid_self_test_has_no_distortion() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["spectrum", "--sinusoid"])
        .status
        .success());
    let thd = &report(dir.path(), "spectrum")["outputs"]["thd"];
    assert!(thd["thd_21"].as_f64().unwrap() < 1e-9);
    assert!(thd["thd_total"].as_f64().unwrap() < 1e-9);
}

#[test]
fn wpt_fha_and_transient() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("bench_100V.json");
    let o = run(
        dir.path(),
        &["wpt", "--config", cfg.to_str().unwrap(), "--mode", "fha"],
    );
    assert!(o.status.success());
    let r = report(dir.path(), "wpt");
    let p = r["outputs"]["fha"]["P_out_W"].as_f64().unwrap();
    assert!((p - 201.0).abs() < 3.0, "{p}");
    assert_eq!(r["comparisons"][0]["reference"].as_f64(), Some(215.0));

    let o = run(
        dir.path(),
        &[
            "wpt",
            "--config",
            cfg.to_str().unwrap(),
            "--mode",
            "transient",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "wpt");
    let pt = r["outputs"]["transient"]["metrics"]["P_out_W"]
        .as_f64()
        .unwrap();
    assert!((pt - p).abs() < 0.05 * p);
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("t_s,v_drive_V,i1_A,i2_A,vC1_V,vC2_V\n"));

    let cfg = config("uncoupled.json");
    assert!(run(dir.path(), &["wpt", "--config", cfg.to_str().unwrap()])
        .status
        .success());
    assert_eq!(
        report(dir.path(), "wpt")["outputs"]["fha"]["P_out_W"].as_f64(),
        Some(0.0)
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["solve", "--harmonics", "3,5,7", "--init", "41,11,85"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("angles"));

    let o = run(
        dir.path(),
        &["synth", "--angles-deg", "10,20", "--step-voltage=-5"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step_voltage"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"L1_H": 245e-6, "C1_F": 14e-9, "k": 0.309, "R_load_ohm": 50, "V_dc_V": 100, "f_s_Hz": 0}"#)
        .unwrap();
    let o = run(dir.path(), &["wpt", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("f_s_Hz"));

    let o = run(dir.path(), &["solve", "--harmonics", "3", "--init", "60"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(
        dir.path(),
        &[
            "solve",
            "--harmonics",
            "3,5,7",
            "--init",
            "11,41,85",
            "--max-iter",
            "1",
        ],
    );
    assert_eq!(o.status.code(), Some(3));

    // Three cycles from rest are far from steady state.
    let cfg = config("bench_100V.json");
    let o = run(
        dir.path(),
        &[
            "wpt",
            "--config",
            cfg.to_str().unwrap(),
            "--mode",
            "transient",
            "--cycles",
            "3",
            "--steps-per-cycle",
            "512",
        ],
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["spectrum", "--harmonics", "3,5,7", "--init", "11,41,85"];
    assert!(run(a.path(), &args).status.success());
    assert!(run(b.path(), &args).status.success());
    for f in [
        "spectrum.csv",
        "thd.json",
        "spectrum.svg",
        "spectrum_report.json",
    ] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(a.path().join("run_meta.json").exists());
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_shewpt"))
        .env("SHEWPT_OUT_DIR", dir.path())
        .args(["solve", "--harmonics", "3"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("solution.csv").exists());
}

#[test]
fn reproduce_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["reproduce", "--case", "all"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = report(dir.path(), "reproduce");
    let rows = r["comparisons"].as_array().unwrap();
    assert!(rows.len() >= 10);
    assert!(rows
        .iter()
        .all(|c| c["pass"] == Value::Bool(true) && c["tolerance"]["kind"].is_string()));
    assert_eq!(r["inputs"]["case"], "all");
    assert_eq!(
        r["outputs"]["design_targets"]["efficiency_modeled"],
        Value::Bool(false)
    );
}
