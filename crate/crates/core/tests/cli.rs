mod common;

use common::*;
use serde_json::Value;

fn stdout(args: &[&str]) -> String {
    String::from_utf8(run_cli(args).stdout).unwrap()
}

#[test]
fn exit_status_contract_on_the_corpus() {
    let mut wrong = Vec::new();
    for (args, expected) in CLI_CORPUS {
        let out = run_cli(args);
        let code = out.status.code().unwrap();
        if code != *expected {
            wrong.push(format!("{args:?}: {code}, expected {expected}: {}", String::from_utf8_lossy(&out.stderr)));
        }
        if code == 2 {
            assert!(out.stdout.is_empty(), "{args:?}");
            assert!(!out.stderr.is_empty(), "{args:?}");
        }
    }
    assert!(wrong.is_empty(), "{wrong:#?}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for (args, _) in CLI_CORPUS {
        for format in ["text", "structured"] {
            let mut full = args.to_vec();
            full.extend(["--format", format]);
            let a = run_cli(&full);
            let b = run_cli(&full);
            assert_eq!(a.stdout, b.stdout, "{full:?}");
            assert_eq!(a.stderr, b.stderr, "{full:?}");
        }
    }
}

#[test]
fn euler_lagrange_of_the_scalar() {
    let out = stdout(&["el", "scalar.bv", "--field", "1"]);
    assert!(out.contains("E_1 = -u[1; 1 1]\n"), "{out}");
}

#[test]
fn structured_report_layout() {
    let text = stdout(&["solve", "so3.bv", "-K", "3", "--format", "structured"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["bounds", "command", "model_digest", "pass", "residuals", "results"]);
    // serde_json sorts keys when parsing into Value; the emitted order is fixed
    let order: Vec<usize> = ["\"command\"", "\"model_digest\"", "\"pass\"", "\"residuals\"", "\"bounds\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(v["command"], "solve");
    assert_eq!(v["pass"], true);
    assert_eq!(v["residuals"], Value::Array(vec![]));
    assert_eq!(v["bounds"]["max_jet_order"], 2);
    assert_eq!(v["model_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn noether_failure_is_reported_under_the_gauge_index() {
    let v: Value = serde_json::from_str(&stdout(&["noether", "scalar.bv", "--format", "structured"])).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["residuals"][0]["label"], "1");
    assert_eq!(v["residuals"][0]["residual"], "-u[1; 1 1]");
}

#[test]
fn obstruction_is_reported() {
    let out = stdout(&["solve", "so3-fake.bv", "-K", "3"]);
    assert!(out.contains("obstruction 2: -2*C[1]*C[2]*C[3]*Cstar[1]"), "{out}");
    assert!(out.ends_with("status: fail\n"));
}

#[test]
fn bounds_flag_changes_the_digest() {
    let plain: Value = serde_json::from_str(&stdout(&["build", "so3.bv", "--format", "structured"])).unwrap();
    let wide: Value =
        serde_json::from_str(&stdout(&["build", "so3.bv", "--format", "structured", "--bounds", "jet=1,deg=3"]))
            .unwrap();
    assert_ne!(plain["model_digest"], wide["model_digest"]);
    assert_eq!(wide["bounds"]["max_poly_degree"], 3);
}

#[test]
fn extracted_so3_brackets() {
    let out = stdout(&["extract", "so3.bv", "-n", "3"]);
    for line in ["l2(C[1], C[2]) = C[3]", "l2(C[1], C[3]) = -C[2]", "l2(C[2], C[3]) = C[1]"] {
        assert!(out.contains(line), "{out}");
    }
    assert!(!out.contains("l3("));
}

#[test]
fn parse_errors_point_into_the_file() {
    let dir = std::env::temp_dir().join(format!("bvforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.bv");
    std::fs::write(&path, "dimension 1\nfields 1\ngauge 1\nlagrangian u[1] +* 2\n").unwrap();
    let out = run_cli(&["el", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.bv:4:"), "{err}");
    std::fs::remove_dir_all(dir).unwrap();
}
