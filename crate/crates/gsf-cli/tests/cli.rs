//! End-to-end tests: every command path, asserting exit code and report
//! schema.

use std::process::{Command, Output};

fn gsf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsf")).args(args).output().expect("spawn gsf")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn parse_json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout_str(out)).expect("stdout is valid JSON")
}

/// Single-report schema: command echo, config snapshot, items with
/// pass flags, tables, overall pass.
fn assert_report_schema(v: &serde_json::Value) {
    assert!(v["command"].is_string());
    assert!(v["config"]["gauge"].is_string());
    assert!(v["config"]["grid_kmin"].is_number());
    assert!(v["items"].is_array());
    for item in v["items"].as_array().unwrap() {
        assert!(item["name"].is_string());
        assert!(item["pass"].is_boolean());
    }
    assert!(v["tables"].is_array());
    assert!(v["pass"].is_boolean());
}

#[test]
fn check_moderate_net_passes() {
    let out = gsf(&["check", "--net", "eps^2 + eps^5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_json(&out);
    assert_report_schema(&v);
    let items = v["items"].as_array().unwrap();
    assert_eq!(items[0]["name"], "moderate");
    assert_eq!(items[0]["verdict"], "true");
}

#[test]
fn check_order_relation_both_ways() {
    let out = gsf(&["check", "--net", "eps^3", "--leq", "eps^2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_json(&out);
    let names: Vec<&str> =
        v["items"].as_array().unwrap().iter().map(|i| i["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"net <= other"));
    assert!(names.contains(&"other <= net"));
}

#[test]
fn check_non_moderate_net_is_assertion_failure() {
    let out = gsf(&["check", "--net", "exp(1/eps)"]);
    assert_eq!(out.status.code(), Some(1));
    let v = parse_json(&out);
    assert_eq!(v["pass"], false);
    assert_eq!(v["items"][0]["verdict"], "false");
}

#[test]
fn check_output_is_deterministic() {
    let args = ["check", "--net", "eps * sin(1/eps)", "--format", "csv"];
    let a = gsf(&args);
    let b = gsf(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn set_membership_in_shrinking_ball() {
    let out = gsf(&["set", "--point", "eps", "--set", "ball(0, 2*eps)"]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_json(&out);
    assert_report_schema(&v);
    assert_eq!(v["items"][0]["name"], "internal membership");
    assert_eq!(v["items"][0]["verdict"], "true");
    assert_eq!(v["items"][1]["verdict"], "true");
}

#[test]
fn set_union_and_halfline_literals() {
    let out = gsf(&["set", "--point", "3", "--set", "union(box(0,1),halfline(2,+))"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(parse_json(&out)["items"][0]["verdict"], "true");
}

#[test]
fn set_bad_literal_is_usage_error() {
    let out = gsf(&["set", "--point", "1", "--set", "blob(1)"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn set_dimension_mismatch_is_usage_error() {
    let out = gsf(&["set", "--point", "1,2", "--set", "box(0,1)"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn embed_delta_pairing_converges() {
    let out = gsf(&["embed", "--dist", "delta@0", "--d", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_json(&out);
    assert_report_schema(&v);
    let tables: Vec<&str> =
        v["tables"].as_array().unwrap().iter().map(|t| t["name"].as_str().unwrap()).collect();
    assert_eq!(tables, ["pairing", "samples"]);
    // pairing table has one row per grid point (k = 4..40)
    assert_eq!(v["tables"][0]["rows"].as_array().unwrap().len(), 37);
    assert_eq!(v["tables"][1]["columns"].as_array().unwrap().len(), 3);
}

#[test]
fn embed_csv_has_documented_tables() {
    let out = gsf(&["embed", "--dist", "heaviside@0", "--d", "0.5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    assert!(text.contains("# table pairing: eps,value,abs_error"));
    assert!(text.contains("# table samples: eps,x,value"));
}

#[test]
fn embed_unknown_distribution_is_usage_error() {
    let out = gsf(&["embed", "--dist", "comb@0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invert_local_sharp_with_target() {
    let out = gsf(&["invert-local", "--fn", "x + x^3", "--x0", "0", "--y", "1/40"]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_json(&out);
    assert_report_schema(&v);
    let items = v["items"].as_array().unwrap();
    assert!(items.iter().any(|i| i["name"].as_str().unwrap().starts_with("radius r")));
    assert!(items
        .iter()
        .any(|i| i["name"] == "round-trip residual negligible" && i["verdict"] == "true"));
    assert_eq!(v["tables"][0]["columns"], serde_json::json!(["eps", "x1", "residual"]));
}

#[test]
fn invert_local_fermat_rejects_infinitesimal_slope() {
    let out = gsf(&["invert-local", "--fn", "eps * x", "--x0", "0", "--kind", "fermat"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invert_local_bad_kind_is_usage_error() {
    let out = gsf(&["invert-local", "--fn", "x", "--x0", "0", "--kind", "soft"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invert_global_1d_with_target() {
    let out =
        gsf(&["invert-global", "--fn", "x + sin(x)/2", "--mode", "1d", "--r", "0.5", "--y", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_json(&out);
    assert_report_schema(&v);
    assert!(v["items"]
        .as_array()
        .unwrap()
        .iter()
        .any(|i| i["name"] == "inverse residual negligible" && i["verdict"] == "true"));
}

#[test]
fn invert_global_hadamard_map_with_properness_table() {
    let out = gsf(&[
        "invert-global",
        "--fn",
        "x1 + x1^3; x2 + x2^3",
        "--mode",
        "hadamard",
        "--y",
        "2,2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_json(&out);
    assert_eq!(v["tables"][0]["name"], "properness");
    assert_eq!(v["tables"][0]["columns"], serde_json::json!(["radius", "min_norm"]));
}

#[test]
fn invert_global_rejects_non_proper_map() {
    let out = gsf(&["invert-global", "--fn", "atan(x)", "--mode", "hadamard"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invert_global_bad_mode_is_usage_error() {
    let out = gsf(&["invert-global", "--fn", "x", "--mode", "2d"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn examples_run_single() {
    let out = gsf(&["examples", "run", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_json(&out);
    assert_report_schema(&v);
    assert_eq!(v["pass"], true);
}

#[test]
fn examples_bad_id_is_usage_error() {
    let out = gsf(&["examples", "run", "9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_single_criterion() {
    let out = gsf(&["selftest", "--criterion", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_json(&out);
    assert_report_schema(&v);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("criterion 1"));
    assert!(stderr.contains("pass"));
}

#[test]
fn config_file_and_gauge_flags_override() {
    let path = std::env::temp_dir().join("gsf_cli_e2e_config.txt");
    std::fs::write(&path, "grid = 4:30\ntail_window = 6\n").unwrap();
    let out = gsf(&["check", "--net", "eps", "--config", path.to_str().unwrap(), "--gauge", "exp"]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_json(&out);
    assert_eq!(v["config"]["gauge"], "exp");
    assert_eq!(v["config"]["grid_kmax"], 30);
    assert_eq!(v["config"]["tail_window"], 6);
}

#[test]
fn bad_config_file_is_usage_error() {
    let path = std::env::temp_dir().join("gsf_cli_e2e_bad_config.txt");
    std::fs::write(&path, "unknown_key = 3\n").unwrap();
    let out = gsf(&["check", "--net", "eps", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_format_and_grid_are_usage_errors() {
    assert_eq!(gsf(&["check", "--net", "eps", "--format", "yaml"]).status.code(), Some(2));
    assert_eq!(gsf(&["check", "--net", "eps", "--grid", "40:4"]).status.code(), Some(2));
    assert_eq!(gsf(&["frobnicate"]).status.code(), Some(2));
}
