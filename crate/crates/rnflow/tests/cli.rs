//! End-to-end tests for the `rnflow` binary: artifact layout, exit codes, and
//! the bits of output format scripts are allowed to depend on.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn rnflow() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rnflow"));
    // Keep the ambient environment from redirecting test outputs.
    c.env_remove("RNFLOW_OUT");
    c
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

/// Short nonsmooth run: `sum_abs` kinks at +-1, argmin is the slab [-1, 1]
/// after the value shift, minimum value 0.
fn two_kinks_config(out_dir: &Path) -> Value {
    json!({
        "problem": {
            "type": "shift_value",
            "inner": {"type": "sum_abs", "anchors": [-1.0, 1.0], "weights": [1.0, 1.0]},
            "offset": -2.0
        },
        "flow": "rn_tikhonov",
        "mu": 1.0,
        "schedule": {"family": "power", "c": 1.0, "p": 0.75},
        "x0": [5.0],
        "v0": [2.0],
        "T": 5.0,
        "h": 1.0e-3,
        "sample_stride": 100,
        "output_dir": out_dir
    })
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_artifacts_and_reruns_bit_identically() {
    let tmp = TempDir::new().unwrap();
    let cfg_a = write_config(tmp.path(), "a.json", &two_kinks_config(&tmp.path().join("out_a")));
    let cfg_b = write_config(tmp.path(), "b.json", &two_kinks_config(&tmp.path().join("out_b")));

    let out = rnflow().arg("run").arg(&cfg_a).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("run: wrote"));

    let traj_a = tmp.path().join("out_a/trajectory.csv");
    let report_path = tmp.path().join("out_a/report.json");
    let csv = fs::read_to_string(&traj_a).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,y_0,x_0,v_0,phi_x,norm_x,ydot_norm");

    let report: Value = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report["dist_to_target"].as_f64().unwrap().is_finite());
    assert_eq!(report["target"], json!([0.0]));
    assert_eq!(report["hypothesis_flags"]["slow"], json!(true));

    let out_b = rnflow().arg("run").arg(&cfg_b).output().unwrap();
    assert_eq!(out_b.status.code(), Some(0));
    let bytes_a = fs::read(&traj_a).unwrap();
    let bytes_b = fs::read(tmp.path().join("out_b/trajectory.csv")).unwrap();
    assert_eq!(bytes_a, bytes_b, "same config must reproduce the trajectory byte for byte");
}

#[test]
fn dump_config_is_a_fixpoint_and_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("never_created");
    let mut cfg = two_kinks_config(&out_dir);
    cfg["seed"] = json!(7);
    let path = write_config(tmp.path(), "cfg.json", &cfg);

    let first = rnflow().arg("run").arg(&path).arg("--dump-config").output().unwrap();
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr_of(&first));
    assert!(!out_dir.exists(), "--dump-config must not run the experiment");
    let dumped = stdout_of(&first);
    assert!(dumped.contains("\"seed\": 7"), "seed key survives the round trip");

    let path2 = tmp.path().join("cfg2.json");
    fs::write(&path2, &dumped).unwrap();
    let second = rnflow().arg("run").arg(&path2).arg("--dump-config").output().unwrap();
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(dumped, stdout_of(&second), "canonical dump must be a fixpoint");
}

#[test]
fn invalid_configs_exit_2_with_a_pointed_message() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");

    let mut box_cfg = two_kinks_config(&out_dir);
    box_cfg["problem"] = json!({"type": "indicator_box", "lo": [3.0], "hi": [2.0]});
    box_cfg["x0"] = json!([2.5]);
    let p = write_config(tmp.path(), "box.json", &box_cfg);
    let out = rnflow().arg("run").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("lo[0]"), "stderr: {}", stderr_of(&out));

    let mut bad_v0 = two_kinks_config(&out_dir);
    bad_v0["problem"] = json!({"type": "quadratic", "a": [[1.0]], "b": [0.0]});
    bad_v0["x0"] = json!([1.0]);
    bad_v0["v0"] = json!([0.0]);
    let p = write_config(tmp.path(), "bad_v0.json", &bad_v0);
    let out = rnflow().arg("run").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("v0 not a subgradient at x0"));

    let mut no_v0 = two_kinks_config(&out_dir);
    no_v0.as_object_mut().unwrap().remove("v0");
    let p = write_config(tmp.path(), "no_v0.json", &no_v0);
    let out = rnflow().arg("run").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("v0 is required"));

    let mut stray = two_kinks_config(&out_dir);
    stray["stray_knob"] = json!(1);
    let p = write_config(tmp.path(), "stray.json", &stray);
    let out = rnflow().arg("run").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("stray_knob"));

    let out = rnflow().arg("run").arg(tmp.path().join("missing.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("missing.json"));
}

#[test]
fn check_reports_hypotheses_and_exits_by_verdict() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");

    let p = write_config(tmp.path(), "ok.json", &two_kinks_config(&out_dir));
    let out = rnflow().arg("check").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let summary: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(summary["slow"], json!(true));
    assert_eq!(summary["in_L2"], json!(true));
    assert_eq!(summary["phi0_finite"], json!(true));
    let r = summary["h1_model_r"].as_f64().unwrap();
    assert!((1.9..=2.1).contains(&r), "growth exponent near the kink should be 2, got {r}");

    let mut fast = two_kinks_config(&out_dir);
    fast["schedule"] = json!({"family": "power", "c": 1.0, "p": 2.0});
    let p = write_config(tmp.path(), "fast.json", &fast);
    let out = rnflow().arg("check").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let summary: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(summary["slow"], json!(false));

    let mut inf_at_zero = two_kinks_config(&out_dir);
    inf_at_zero["problem"] = json!({"type": "indicator_box", "lo": [1.0], "hi": [2.0]});
    inf_at_zero["x0"] = json!([1.5]);
    inf_at_zero["v0"] = json!([0.0]);
    let p = write_config(tmp.path(), "inf0.json", &inf_at_zero);
    let out = rnflow().arg("check").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let summary: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(summary["phi0_finite"], json!(false));

    fs::write(tmp.path().join("garbage.json"), "not json").unwrap();
    let out = rnflow().arg("check").arg(tmp.path().join("garbage.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_survives_failed_cells_and_rejects_unknown_axes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "cfg.json", &two_kinks_config(&tmp.path().join("sweep")));

    // p = -1 is an invalid schedule exponent: that cell fails, the sweep does not.
    let out = rnflow()
        .args(["sweep", cfg.to_str().unwrap(), "--axis", "p", "--values", "0.75,2,-1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("3 cells"));
    assert!(stderr_of(&out).contains("p=-1"), "failed cell goes to stderr: {}", stderr_of(&out));

    let summary = fs::read_to_string(tmp.path().join("sweep/sweep_summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 4, "header plus one row per cell:\n{summary}");
    assert_eq!(lines[0], "value,dist_to_target,phi_gap,v_norm_final,slow,in_L2");
    assert!(lines[3].starts_with("-1,"), "failed cell keeps its row: {}", lines[3]);
    assert_eq!(lines[3].matches(',').count(), 5, "failed cell leaves metric columns empty");
    assert!(tmp.path().join("sweep/p=0.75/trajectory.csv").exists());

    let out = rnflow()
        .args(["sweep", cfg.to_str().unwrap(), "--axis", "volume", "--values", "1,2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("volume"));

    let out = rnflow().args(["sweep", cfg.to_str().unwrap(), "--axis", "p"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "missing --values is a usage error");
}

#[test]
fn numerical_blowup_exits_3() {
    let tmp = TempDir::new().unwrap();
    // Stiff problem, huge step: RK4 overflows to non-finite state quickly.
    let cfg = json!({
        "problem": {"type": "quadratic", "a": [[1.0]], "b": [0.0]},
        "flow": "rn_tikhonov",
        "mu": 1.0,
        "schedule": {"family": "constant", "c": 100.0},
        "x0": [1.0],
        "v0": [1.0],
        "T": 1000.0,
        "h": 10.0,
        "sample_stride": 1,
        "output_dir": tmp.path().join("blowup")
    });
    let p = write_config(tmp.path(), "blowup.json", &cfg);
    let out = rnflow().arg("run").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("non-finite"), "stderr: {}", stderr_of(&out));
}

#[test]
fn rnflow_out_redirects_all_artifacts() {
    let tmp = TempDir::new().unwrap();
    let ignored = tmp.path().join("ignored");
    let actual = tmp.path().join("actual");
    let cfg = write_config(tmp.path(), "cfg.json", &two_kinks_config(&ignored));

    let out = rnflow().arg("run").arg(&cfg).env("RNFLOW_OUT", &actual).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(actual.join("trajectory.csv").exists());
    assert!(actual.join("report.json").exists());
    assert!(!ignored.exists(), "RNFLOW_OUT replaces the configured directory");
}
