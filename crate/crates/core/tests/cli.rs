use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn padiflow(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_padiflow"));
    cmd.args(args).env_remove("PADIFLOW_PRECISION");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn solve_flagship_solvers_agree() {
    let out = padiflow(&["solve", "--input", &fixture("ode_flagship.json"), "--order", "128"], &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["agree"], true);
    assert_eq!(v["direct"], v["newton"]);
    assert_eq!(v["order"], 128);
    assert_eq!(v["selfBounded"], true);
    assert_eq!(v["withinBound"], true);
    assert_eq!(v["ledger"]["k1"], 8);
    assert_eq!(v["direct"]["terms"][0], serde_json::json!([2, "5/3"]));
}

#[test]
fn separatrix_flagship() {
    let out = padiflow(&["separatrix", "--input", &fixture("field_flagship.json"), "--order", "64"], &[]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["phi2"]["terms"], serde_json::json!([[2, "1/3"]]));
    assert_eq!(v["phi1"]["terms"], serde_json::json!([]));
    assert_eq!(v["defectOrder"]["phi2"], "+inf");
    assert_eq!(v["class"]["kind"], "nondegenerateReduced");
    let human = padiflow(&["separatrix", "--input", &fixture("field_flagship.json"), "--human"], &[]);
    assert!(String::from_utf8_lossy(&human.stdout).contains("T^2: 1/3"));
}

#[test]
fn separatrix_normalizes_triangular_fields() {
    let out = padiflow(&["separatrix", "--input", &fixture("field_triangular.json")], &[]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["class"]["alpha"], "-1/2");
    assert!(v["normalized"]["basis"].is_array());
    assert_eq!(v["defectOrder"]["phi1"], 11);
}

#[test]
fn pclosed_scan() {
    let out = padiflow(&["pclosed", "--input", &fixture("field_flagship.json")], &[]);
    assert_eq!(code(&out), 0);
    let rows = json(&out)["primes"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 24);
    for r in rows {
        let want = if r["p"] == 3 { "not-closed" } else { "closed" };
        assert_eq!(r["status"], want, "{r}");
    }
    let out = padiflow(&["pclosed", "--input", &fixture("field_third.json"), "--to", "5"], &[]);
    let v = json(&out);
    assert_eq!(v["primes"][0], serde_json::json!({"p": 3, "status": "bad-reduction"}));
    assert_eq!(v["primes"][1], serde_json::json!({"p": 5, "status": "closed"}));
}

#[test]
fn budget_report() {
    let out = padiflow(&["budget", "--pmax", "1000", "--t", "1", "--C", "14"], &[]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["pMax"], 1000);
    assert!(v["partial"].as_array().unwrap().len() == 2);
    assert!(v["tail"].as_array().unwrap().len() == 2);
}

#[test]
fn size_reports() {
    let out = padiflow(&["size", "--input", &fixture("series_size.json")], &[]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["estimates"]["phi"]["lambdaP"], "-1");
    assert_eq!(v["estimates"]["phi"]["exact"], true);
    let out = padiflow(&["size", "--input", &fixture("field_flagship.json"), "--prime", "5"], &[]);
    assert_eq!(json(&out)["estimates"]["phi2"]["lowerBoundLogP"], "0");
}

#[test]
fn selftest_passes() {
    let out = padiflow(&["selftest"], &[]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn reports_are_deterministic() {
    let args = ["solve", "--input", &fixture("ode_flagship.json"), "--order", "64"];
    let a = padiflow(&args, &[]);
    let b = padiflow(&args, &[]);
    assert_eq!(a.stdout, b.stdout);
    let args = ["pclosed", "--input", &fixture("field_flagship.json")];
    assert_eq!(padiflow(&args, &[]).stdout, padiflow(&args, &[]).stdout);
}

#[test]
fn hypothesis_violation_names_the_index() {
    let out = padiflow(&["solve", "--input", &fixture("ode_hypothesis_violated.json")], &[]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "hypothesisViolated");
    assert_eq!(v["error"]["index"], 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("coefficient index 2"));
}

#[test]
fn error_exit_codes() {
    let cases: &[(&[&str], &str, i32, &str)] = &[
        (&["solve"], "ode_order_too_high.json", 1, "invalidArgument"),
        (&["solve"], "ode_bad_alpha.json", 2, "parse"),
        (&["separatrix"], "field_non_reduced.json", 1, "preconditionViolated"),
        (&["separatrix"], "field_constant_term.json", 1, "invalidArgument"),
        (&["separatrix"], "bad_rational.json", 2, "parse"),
        (&["separatrix"], "malformed.json", 2, "parse"),
        (&["separatrix"], "unknown_kind.json", 2, "parse"),
        (&["solve"], "field_flagship.json", 2, "parse"),
        (&["size"], "field_flagship.json", 2, "parse"),
        (&["separatrix"], "does_not_exist.json", 2, "parse"),
    ];
    for (cmd, file, want, kind) in cases {
        let f = fixture(file);
        let mut args: Vec<&str> = cmd.to_vec();
        args.extend(["--input", &f]);
        let out = padiflow(&args, &[]);
        assert_eq!(code(&out), *want, "{file}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["error"]["kind"], *kind, "{file}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&padiflow(&["frobnicate"], &[])), 2);
    assert_eq!(code(&padiflow(&["budget", "--t", "1"], &[])), 2);
    assert_eq!(code(&padiflow(&["budget", "--pmax", "100", "--t", "1", "--C", "x"], &[])), 2);
    assert_eq!(code(&padiflow(&["--help"], &[])), 0);
}

#[test]
fn precision_override() {
    let base = ["budget", "--pmax", "100", "--t", "1"];
    let out = padiflow(&base, &[("PADIFLOW_PRECISION", "1/1000000")]);
    assert_eq!(code(&out), 0);
    assert_eq!(out.stdout, padiflow(&base, &[]).stdout);
    let out = padiflow(&base, &[("PADIFLOW_PRECISION", "abc")]);
    assert_eq!(code(&out), 2);
    let out = padiflow(&base, &[("PADIFLOW_PRECISION", "-1")]);
    assert_eq!(code(&out), 2);
}
