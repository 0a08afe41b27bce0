use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trikernel")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{}: {}", e, String::from_utf8_lossy(&out.stdout)))
}

fn error(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|e| panic!("{}: {}", e, String::from_utf8_lossy(&out.stderr)))
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{:?}: {}", args, String::from_utf8_lossy(&out.stdout));
    out
}

#[test]
fn enumerate_empty_walk() {
    let v = json(&ok(&["enumerate", "--model", "simple", "--domain", "3q", "--n", "0"]));
    assert_eq!(v["n"], 0);
    assert_eq!(v["cells"], serde_json::json!([[0, 0, "1"]]));
}

#[test]
fn enumerate_to_file_and_from_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("rk.json");
    std::fs::write(&model, r#"{"name": "rk", "steps": [[1,0],[0,1],[-1,-1]]}"#).unwrap();
    let out = dir.path().join("counts.json");
    ok(&["enumerate", "--model", model.to_str().unwrap(), "--n", "6", "--out", out.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let origin = v["cells"].as_array().unwrap().iter().find(|c| c[0] == 0 && c[1] == 0).unwrap().clone();
    assert_eq!(origin[2], "46");
    // Counts are decimal strings.
    assert!(v["cells"].as_array().unwrap().iter().all(|c| c[2].is_string()));
}

#[test]
fn validation_failures_exit_2() {
    for args in [
        &["enumerate", "--model", "no-such-model", "--n", "3"][..],
        &["enumerate", "--model", "simple", "--domain", "octagon", "--n", "3"],
        &["kernel", "--model", "reverse-kreweras", "--t", "1/3"],
        &["kernel", "--model", "reverse-kreweras", "--t", "-0.1"],
        &["solve", "--model", "kreweras", "--t", "0.1"],
        &["solve", "--model", "reverse-kreweras", "--t", "0.1", "--method", "thm7"],
        &["solve", "--model", "double-kreweras", "--t", "0.1", "--method", "series"],
        &["gluing", "--model", "simple", "--t", "0.1", "--check", "everything"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{:?}", args);
        let v = error(&out);
        assert!(out.stdout.is_empty());
        assert!(v["error"].is_string() && v["message"].is_string(), "{:?}", args);
    }
    let v = error(&run(&["solve", "--model", "kreweras", "--t", "0.1"]));
    assert_eq!(v["error"], "UnboundedContour");
}

#[test]
fn tolerance_failure_exits_3() {
    let out = run(&["solve", "--model", "reverse-kreweras", "--t", "0.1", "--tolerance", "0", "--json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error(&out)["error"], "ToleranceExceeded");
    // The report itself is still printed.
    assert_eq!(json(&out)["converged"], false);
}

#[test]
fn kernel_dump() {
    let v = json(&ok(&["kernel", "--model", "reverse-kreweras", "--t", "0.125", "--json"]));
    assert_eq!(v["t"], 0.125);
    assert_eq!(v["d_tilde"], "-4*t^2*y^3 + y^2 - 2*t*y + t^2");
    let bp = &v["branch_points"];
    assert!(bp["x1"].as_f64().unwrap() < bp["x2"].as_f64().unwrap());
    assert!(bp["x4"].is_null());
    let text = String::from_utf8(ok(&["kernel", "--model", "simple", "--t", "1/10"]).stdout).unwrap();
    assert!(text.contains("d_tilde"));
}

#[test]
fn curve_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    ok(&["curve", "--model", "reverse-kreweras", "--t", "0.1", "--n", "64", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_param,re_y,im_y"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert!(rows.len() >= 64);
    assert!(rows.iter().all(|r| r.len() == 3));
    assert!(rows.iter().any(|r| r[2] > 0.0) && rows.iter().any(|r| r[2] < 0.0));
}

#[test]
fn gluing_checks() {
    let v = json(&ok(&["gluing", "--model", "simple", "--t", "0.1", "--check", "all"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["gluing"], "WeierstrassComposite");
    assert_eq!(v["checks"].as_array().unwrap().len(), 4);
    let v = json(&ok(&["gluing", "--model", "kreweras", "--t", "0.1"]));
    assert_eq!(v["checks"][0]["skipped"], "the curve is unbounded");
    let v = json(&ok(&["gluing", "--model", "reverse-kreweras", "--t", "0.1", "--check", "ode"]));
    assert!(v["checks"][0]["value"].as_f64().unwrap() < 1e-7);
}

#[test]
fn solve_methods_agree() {
    let mut values = Vec::new();
    for method in ["thm1", "thm2", "series"] {
        let v = json(&ok(&["solve", "--model", "reverse-kreweras", "--method", method, "--t", "0.1", "--y", "0", "--json"]));
        assert_eq!(v["converged"], true);
        assert!(v["error_estimate"].as_f64().unwrap() < 1e-8);
        assert!(v["contour"]["kind"].is_string());
        values.push(v["value"]["re"].as_f64().unwrap());
    }
    for d in &values {
        assert!((d - 1.004046718716603).abs() < 1e-12, "{:?}", values);
    }
    let v = json(&ok(&[
        "solve", "--model", "double-kreweras", "--t", "0.1", "--y", "0.3", "--y-im", "-0.2", "--contour", "circle", "--json",
    ]));
    assert_eq!(v["contour"]["kind"], "unit_circle");
    assert!(v["value"]["im"].as_f64().unwrap().abs() > 0.0);
    let text = String::from_utf8(ok(&["solve", "--model", "reverse-kreweras", "--t", "0.1"]).stdout).unwrap();
    assert!(text.starts_with("D(0+0i) = 1.00404671871660"));
}

#[test]
fn d0_series_prints_counts() {
    let text = String::from_utf8(ok(&["d0-series", "--order", "24"]).stdout).unwrap();
    assert!(text.starts_with("1 + 4t³ + 46t⁶ + 706t⁹ + 12472t¹²"), "{}", text);
    assert!(text.contains("102995616t²¹"));
    let v = json(&ok(&["d0-series", "--order", "7", "--json"]));
    assert_eq!(v["series"]["terms"], serde_json::json!([["1", "1", 0, 1], ["4", "1", 3, 1], ["46", "1", 6, 1]]));
}

#[test]
fn verify_reports_every_residual() {
    let v = json(&ok(&["verify", "--all", "--model", "reverse-kreweras"]));
    assert_eq!(v["pass"], true);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for want in ["functional_equations_t8", "group_order", "indices", "w_ode", "theorem1_vs_theorem2", "d0_series_t21"] {
        assert!(names.contains(&want), "{:?}", names);
    }
    // Gessel's model is not symmetric: the report is printed, then exit 3.
    let out = run(&["verify", "--model", "gessel"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["checks"][0]["pass"], false);
    assert_eq!(error(&out)["error"], "ToleranceExceeded");
}

#[test]
fn group_and_phi() {
    let v = json(&ok(&["group", "--model", "reverse-kreweras"]));
    assert_eq!(v["order"], "6");
    let v = json(&ok(&["group", "--model", "e-ne-n-sw"]));
    assert_eq!(v["order"], "Infinite(400)");
    let v = json(&ok(&["phi", "--model", "reverse-kreweras"]));
    assert_eq!(v["phi_text"], "{W,S,NE}");
    assert_eq!(v["small"], true);
}

#[test]
fn output_is_deterministic() {
    let args = ["solve", "--model", "e-n-w-sw-s", "--t", "0.07", "--y", "0.2", "--json"];
    let a = ok(&args).stdout;
    let b = Command::new(env!("CARGO_BIN_EXE_trikernel"))
        .args(args)
        .env("TRIKERNEL_THREADS", "1")
        .output()
        .unwrap()
        .stdout;
    assert_eq!(a, b);
    let c = ok(&["curve", "--model", "simple", "--t", "0.1", "--n", "32"]).stdout;
    assert_eq!(c, ok(&["curve", "--model", "simple", "--t", "0.1", "--n", "32"]).stdout);
}

#[test]
fn bad_thread_count() {
    let out = Command::new(env!("CARGO_BIN_EXE_trikernel"))
        .args(["group", "--model", "simple"])
        .env("TRIKERNEL_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
