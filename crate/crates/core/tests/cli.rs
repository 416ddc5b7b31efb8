//! End-to-end runs of the `cartan-motion` binary.

use std::f64::consts::PI;
use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::NamedTempFile;

const SMALL_GRID: &str = "[grid]\ntorus = 16\nradial = 32\nangular = 32\ninverse_radial = 48\ninverse_angular = 48\n";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cartan-motion"));
    c.env_remove("CARTAN_THREADS");
    c
}

fn config(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn run(args: &[&str], cfg: Option<&NamedTempFile>) -> Output {
    let mut c = bin();
    c.args(args);
    if let Some(f) = cfg {
        c.arg("--config").arg(f.path());
    }
    c.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn det_check_flags_singular_rows() {
    let cfg = config(&format!("x_angles = [{}, 0.0]", PI / 3.0));
    let out = run(&["det-check"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta,det_direct,det_character,abs_diff,singular");
    assert!(lines[1].starts_with("1.0471975511965976e0,"));
    assert!(lines[2].ends_with(",true"));
}

#[test]
fn det_check_on_product_model() {
    let out = run(&["det-check", "--model", "sl2r_x_sl2r", "--format", "json"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["table"]["columns"][1], "theta2");
    assert_eq!(v["table"]["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn malformed_config_exits_2() {
    let cfg = config("x_angles = []");
    let out = run(&["det-check"], Some(&cfg));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("x_angles is empty"));
    let cfg = config("x_angles = [0.5");
    assert_eq!(run(&["det-check"], Some(&cfg)).status.code(), Some(2));
}

#[test]
fn pair_example_at_quarter_turn() {
    let cfg = config(&format!("x_angles = [{}]\nmu = [2]\n{SMALL_GRID}", PI / 2.0));
    let out = run(&["pair"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &v["table"]["rows"][0];
    assert!(row[1].as_f64().unwrap().abs() < 1e-12);
    assert!((row[2].as_f64().unwrap() + 0.5).abs() < 1e-12);
    assert!((row[4].as_f64().unwrap() + 0.5).abs() < 1e-6);
    assert!(row[5].as_f64().unwrap() < 1e-6);
    let reports = v["details"]["reports"].as_array().unwrap();
    assert_eq!(reports[0]["method"], "closed-form");
    assert_eq!(reports[1]["method"], "quadrature");
    for key in ["model", "mu", "x_angles", "t_list", "values", "tolerance"] {
        assert!(reports[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn pair_with_trivial_weight() {
    let cfg = config(&format!("x_angles = [{}]\nmu = [0]\n{SMALL_GRID}", PI / 2.0));
    let out = run(&["pair", "--format", "csv"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn pair_near_identity_is_guarded() {
    let cfg = config(&format!("x_angles = [1e-12]\n{SMALL_GRID}"));
    let out = run(&["pair"], Some(&cfg));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("x not regular"));
}

#[test]
fn verify_limit_single_entry_schedule_warns() {
    let cfg = config(&format!("x_angles = [{}]\nt_schedule = [1.0]\n{SMALL_GRID}", PI / 2.0));
    let out = run(&["verify-limit"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("convergence check skipped"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "theta,t,re,im,gap,grid_signature");
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn verify_limit_fails_on_absurd_tolerance() {
    let cfg = config(&format!("x_angles = [{}]\nt_schedule = [0.5, 0.25, 0.125]\n{SMALL_GRID}", PI / 2.0));
    let out = run(&["verify-limit", "--tolerance.limit=1e-30"], Some(&cfg));
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("convergence failed"));
}

#[test]
fn l2_scaling_table() {
    let cfg = config("t_schedule = [1.0, 0.5, 0.25]");
    let out = run(&["l2-scaling"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(2).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(row, vec![0.5, 0.25, 0.25, 0.0]);
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(first[1], 1.0);
}

#[test]
fn report_tolerances_drive_exit_code() {
    let base = format!("x_angles = [{}]\nt_schedule = [0.5, 0.25, 0.125]\n{SMALL_GRID}", PI / 2.0);
    let loose = config(&format!(
        "{base}[tolerances]\ndet = 0.1\nprop_tau = 0.1\nlimit = 0.1\npair = 0.1\nl2 = 0.1\n"
    ));
    let out = run(&["report", "--threads", "1"], Some(&loose));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["experiments"].as_array().unwrap().len(), 5);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));

    let out = run(
        &[
            "report",
            "--tolerance.det=1e-30",
            "--tolerance.prop_tau=1e-30",
            "--tolerance.limit=1e-30",
            "--tolerance.pair=1e-30",
        ],
        Some(&loose),
    );
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
    let failures: Vec<&str> = v["failures"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert!(failures.contains(&"verify-limit"), "{failures:?}");
    assert!(failures.contains(&"pair"), "{failures:?}");
}

#[test]
fn thread_env_is_validated() {
    let out = bin().env("CARTAN_THREADS", "many").arg("l2-scaling").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().env("CARTAN_THREADS", "2").arg("l2-scaling").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn flags_override_config_and_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l2.csv");
    let cfg = config("model = \"sl2r_x_sl2r\"\nt_schedule = [0.5]\n[output]\nformat = \"json\"\n");
    let out = run(
        &["l2-scaling", "--model", "sl2r", "--format", "csv", "--out", path.to_str().unwrap()],
        Some(&cfg),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,ratio"));
    assert!(text.contains("2.5000000000000000e-1"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(run(&["integrate-everything"], None).status.code(), Some(2));
    assert_eq!(run(&["det-check", "--tolerance.bogus=1"], None).status.code(), Some(2));
}
