//! End-to-end checks of the binary surface: flag grammar, JSON output,
//! exit codes, and reproducibility of printed reports.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srps"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn constants_reports_the_closed_forms() {
    let v = stdout_json(&run(&["constants"]));
    assert!((v["mean"].as_f64().unwrap() - 1.4658075).abs() < 1e-6);
    assert!((v["second_moment"].as_f64().unwrap() - 4.82699).abs() < 1e-4);
    assert!((v["variance"].as_f64().unwrap() - 2.67840).abs() < 1e-4);
    assert!((v["win_prob"].as_f64().unwrap() - 0.064677).abs() < 1e-5);
}

#[test]
fn solve_small_instance() {
    let v = stdout_json(&run(&["solve", "--n", "1"]));
    assert_eq!(v["n"], 1);
    assert!((v["value"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-8);
    assert!((v["value_per_sqrt_n"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-8);
}

#[test]
fn solve_table_export() {
    let path = std::env::temp_dir().join(format!("srps-table-{}.csv", std::process::id()));
    let v = stdout_json(&run(&[
        "solve",
        "--n",
        "2",
        "--table-out",
        path.to_str().unwrap(),
    ]));
    assert!((v["value"].as_f64().unwrap() - 1.975308642).abs() < 1e-8);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.starts_with("a,b,c,value\n"));
    assert_eq!(text.lines().count(), 1 + 27); // header + 3^3 states
}

#[test]
fn solve_rejects_oversized_n() {
    let out = run(&["solve", "--n", "5000"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "--n", "300", "--table-out", "/tmp/nope.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_reports_and_reproduces() {
    let args = [
        "simulate",
        "--n",
        "20",
        "--games",
        "500",
        "--r",
        "greedy-r",
        "--nn",
        "greedy-n",
        "--seed",
        "7",
        "--diagnostics",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout, "simulate output must be reproducible");
    let v = stdout_json(&a);
    assert_eq!(v["count"], 500);
    assert_eq!(v["config"]["strategy_r"], "greedy-r");
    let p_total = v["p_r_wins"].as_f64().unwrap()
        + v["p_draw"].as_f64().unwrap()
        + v["p_n_wins"].as_f64().unwrap();
    assert!((p_total - 1.0).abs() < 1e-9);
    assert!(v["esn_gap"].is_number());
    assert!(v["t1_scaling"].is_number());
    assert!(v["ks_vs_limit"].is_number());
}

#[test]
fn simulate_writes_diagnostics_csv() {
    let path = std::env::temp_dir().join(format!("srps-diag-{}.csv", std::process::id()));
    let out = run(&[
        "simulate",
        "--n",
        "5",
        "--games",
        "40",
        "--r",
        "greedy-r",
        "--nn",
        "uniform-n",
        "--seed",
        "3",
        "--diagnostics",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "game,final_score,t1,t2,s_t0,x1,x2,x3,x_max,l1_residual,t1_before_t0"
    );
    assert_eq!(lines.count(), 40);
}

#[test]
fn simulate_usage_errors() {
    // --out without --diagnostics
    let out = run(&[
        "simulate",
        "--n",
        "5",
        "--games",
        "10",
        "--r",
        "greedy-r",
        "--nn",
        "greedy-n",
        "--seed",
        "1",
        "--out",
        "/tmp/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // unknown strategy
    let out = run(&[
        "simulate", "--n", "5", "--games", "10", "--r", "what", "--nn", "greedy-n", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // missing required flag (clap)
    let out = run(&["simulate", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn limit_sample_lines_and_summary() {
    let out = run(&["limit-sample", "--rep", "d", "--count", "5", "--seed", "11"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 5);

    let v = stdout_json(&run(&[
        "limit-sample",
        "--rep",
        "erock",
        "--count",
        "20000",
        "--seed",
        "11",
        "--summary",
    ]));
    assert_eq!(v["rep"], "erock");
    assert_eq!(v["count"], 20000);
    let p_zero = v["p_zero_atom"].as_f64().unwrap();
    assert!((p_zero - 1.0 / 3.0).abs() < 0.02, "p_zero = {p_zero}");
    assert_eq!(v["p_negative"].as_f64().unwrap(), 0.0);

    let out = run(&[
        "limit-sample",
        "--rep",
        "zzz",
        "--count",
        "5",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn threads_flag_does_not_change_output() {
    let base = run(&[
        "simulate",
        "--n",
        "10",
        "--games",
        "300",
        "--r",
        "cyclic-r",
        "--nn",
        "uniform-n",
        "--seed",
        "5",
    ]);
    let capped = run(&[
        "--threads",
        "1",
        "simulate",
        "--n",
        "10",
        "--games",
        "300",
        "--r",
        "cyclic-r",
        "--nn",
        "uniform-n",
        "--seed",
        "5",
    ]);
    assert_eq!(base.stdout, capped.stdout);
}

/// The full quick suite; slow. Three checks are pinned to targets the
/// underlying math contradicts (see the acceptance suite notes): the
/// win-probability sub-checks and the rock-opening atom bound. The suite
/// must exit 1 with exactly those checks failing.
#[test]
#[ignore = "runs the quick verification suite, about a minute"]
fn verify_quick_reports_known_red_checks() {
    let out = run(&["verify", "--level", "quick", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let fails: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(
        fails.len(),
        3,
        "expected exactly the known-red checks:\n{text}"
    );
    assert!(fails.iter().any(|l| l.contains("limit_law_constants")));
    assert!(fails.iter().any(|l| l.contains("greedy_convergence")));
    assert!(fails.iter().any(|l| l.contains("rock_opening_example")));
}

#[test]
fn verify_rejects_bad_level() {
    let out = run(&["verify", "--level", "nope", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
