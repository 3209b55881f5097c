use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bscope")).args(args).output().expect("spawn bscope")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad report ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

#[test]
fn half_turn_tube_index_is_one() {
    let out = bscope(&["index", "--builtin", "twisted-tube", "--R", "3.14159", "--L", "6.28318", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["index"]["boundary"]["kind"], "meridional-foliation");
    assert_eq!(r["index"]["index"], 1);
    assert_eq!(r["index"]["branch"], 3);
}

#[test]
fn tight_tube_index_is_zero() {
    let out = bscope(&["index", "--builtin", "twisted-tube", "--R", "1.0", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["index"]["slk"]["slk"], -1);
    assert_eq!(r["index"]["index"], 0);
    // Integers stay integers in the JSON.
    assert!(r["index"]["slk"]["slk"].is_i64());
    assert!(r["index"]["verdict"].is_null(), "tube is not Beltrami, so the verdict is withheld");
}

#[test]
fn missing_grid_is_input_error() {
    let out = bscope(&["index", "--grid", "missing.bsg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.bsg"));
}

#[test]
fn strict_index_and_check_beltrami_exit_four_on_tube() {
    assert_eq!(bscope(&["index", "--builtin", "twisted-tube", "--strict"]).status.code(), Some(4));
    assert_eq!(bscope(&["check-beltrami", "--builtin", "twisted-tube"]).status.code(), Some(4));
    assert_eq!(bscope(&["check-beltrami", "--builtin", "lundquist"]).status.code(), Some(0));
}

#[test]
fn bad_config_and_args_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"field": {"type": "twisted-tube"}, "colour": "red"}"#).unwrap();
    assert_eq!(bscope(&["index", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bscope(&["index", "--builtin", "nope"]).status.code(), Some(2));
    assert_eq!(bscope(&["index", "--R", "-1"]).status.code(), Some(2));
    assert_eq!(bscope(&["frobnicate"]).status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_bscope"))
        .args(["boundary", "--builtin", "lundquist"])
        .env("BSCOPE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn radial_field_is_not_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("radial.json");
    std::fs::write(&cfg, r#"{"field": {"type": "affine", "matrix": [[1,0,0],[0,1,0],[0,0,0]], "offset": [0,0,1]}}"#).unwrap();
    let out = bscope(&["index", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn thread_cap_does_not_change_report() {
    let run = |n: &str| {
        Command::new(env!("CARGO_BIN_EXE_bscope"))
            .args(["index", "--builtin", "five-point", "--no-timestamp"])
            .env("BSCOPE_THREADS", n)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("4"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_echo_replays_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let out = bscope(&["index", "--builtin", "lundquist", "--R", "2", "--no-timestamp", "--out", first.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty(), "report goes to --out, not stdout");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let cfg = dir.path().join("echo.json");
    std::fs::write(&cfg, serde_json::to_string(&doc["config"]).unwrap()).unwrap();
    let second = dir.path().join("second.json");
    let out = bscope(&["index", "--config", cfg.to_str().unwrap(), "--no-timestamp", "--out", second.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn timestamp_present_unless_suppressed() {
    let r = report(&bscope(&["boundary", "--builtin", "lundquist"]));
    assert!(r["timestamp"].as_str().unwrap().starts_with("unix:"));
    let r = report(&bscope(&["boundary", "--builtin", "lundquist", "--no-timestamp"]));
    assert!(r.get("timestamp").is_none());
    assert_eq!(r["report_version"], 1);
    assert_eq!(r["conventions"]["slk_sign"], -1);
}

#[test]
fn exported_grid_runs_through_index() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("lq.bsg");
    let g = grid.to_str().unwrap();
    let out = bscope(&["export-grid", "--builtin", "lundquist", "--grid-out", g, "--dims", "32", "32", "16"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&bscope(&["index", "--grid", g, "--no-timestamp"]));
    assert_eq!(r["index"]["index"], 0);
    assert_eq!(r["index"]["slk"]["slk"], -1);
    assert_eq!(r["config"]["field"]["type"], "grid");
    // Explicit chart that disagrees with the grid header.
    assert_eq!(bscope(&["index", "--grid", g, "--R", "2"]).status.code(), Some(2));
}

#[test]
fn slk_reports_oracle_and_orbits_find_witness() {
    let r = report(&bscope(&["slk", "--builtin", "five-point", "--no-timestamp"]));
    assert_eq!(r["slk"]["slk"], -3);
    assert_eq!(r["oracle"]["slk"], -3);
    let r = report(&bscope(&["orbits", "--builtin", "twisted-tube", "--R", "3.141592653589793", "--no-timestamp"]));
    let orbits = r["orbits"].as_array().unwrap();
    assert!(orbits.iter().any(|o| o["contractible"] == true && o["winding"][1] == 0));
}

#[test]
fn calibrate_prints_stable_sign() {
    let out = bscope(&["calibrate", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["calibration"]["stable"], true);
    assert_eq!(r["calibration"]["slk_sign"], -1);
}

#[test]
fn render_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("f5.svg");
    let out = bscope(&["render", "--builtin", "five-point", "--render-out", svg.to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains("slk = -3"));
    assert!(Path::new(&svg).metadata().unwrap().len() > 1000);
}

#[test]
fn index_with_cross_validation() {
    let r = report(&bscope(&[
        "index",
        "--builtin",
        "twisted-tube",
        "--R",
        "3.141592653589793",
        "--cross-validate",
        "--no-timestamp",
    ]));
    assert_eq!(r["cross_validation"]["annotation"], "confirmed");
}
