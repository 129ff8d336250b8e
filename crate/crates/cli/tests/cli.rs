use std::process::{Command, Output};

use psd_blocks::matrix::HermitianMatrix;
use psd_blocks::witness::{witness_br, Witness};
use psd_blocks::function::Domain;
use serde_json::Value;

const DISC: &str = r#"{"kind":"disc","rho":1}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psd-blocks")).args(args).output().expect("binary runs")
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = run(&all);
    let code = out.status.code().expect("exit code");
    let body = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (code, body)
}

fn scalar(c: &str) -> String {
    format!(r#"{{"variant":"scalar_multiple","params":{{"c":{c},"inner":{{"variant":"identity"}}}}}}"#)
}

fn canonical(mut v: Value) -> String {
    v.as_object_mut().unwrap().remove("generated_at");
    serde_json::to_string(&v).unwrap()
}

#[test]
fn classify_reports_regime_and_family() {
    let (code, v) = run_json(&["classify", "--rule", r#"{"kind":"all_singletons"}"#]);
    assert_eq!(code, 0);
    assert_eq!(v["regime"], "R2-Singletons");
    assert_eq!(v["constraint"], "f(x) ≤ x on I∩ℝ≥0");

    let (_, v) = run_json(&["classify", "--rule", r#"{"kind":"contiguous_partition","params":{"k":3}}"#]);
    assert_eq!(v["c_interval"], serde_json::json!(["-1/2", "1"]));
    assert_eq!(v["K"], 3);

    let (_, v) = run_json(&["classify", "--rule", r#"{"kind":"overlapping_chain"}"#]);
    assert_eq!(v["family"], "identity only");
}

#[test]
fn classify_rejects_wrong_flags() {
    let rule = r#"{"kind":"all_singletons","flags":{"eventually_nonempty":true,"all_singletons":false,"covers_all_n":true,"K":"inf"}}"#;
    let out = run(&["classify", "--rule", rule]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flags"));
}

#[test]
fn verify_exit_codes() {
    let k2 = r#"{"kind":"contiguous_partition","params":{"k":2}}"#;
    let k3 = r#"{"kind":"contiguous_partition","params":{"k":3}}"#;
    let (code, v) = run_json(&["verify", "--rule", k2, "--f", &scalar("0.5"), "--domain", DISC, "--samples", "100"]);
    assert_eq!(code, 0);
    assert_eq!(v["outcome"], "preserved_within_budget");

    let (code, v) = run_json(&["verify", "--rule", k3, "--f", &scalar("-0.75"), "--domain", DISC]);
    assert_eq!(code, 3);
    assert_eq!(v["outcome"], "refuted");
    let cx = &v["counterexample"];
    assert_eq!(cx["provenance"], "all_ones");
    // (1 + 2c)x with c = -3/4.
    let x = cx["params"]["x"].as_f64().unwrap();
    assert!((cx["min_eig"].as_f64().unwrap() - (1.0 - 1.5) * x).abs() < 1e-12);
    let output: HermitianMatrix = serde_json::from_value(cx["output"].clone()).unwrap();
    assert_eq!(output.dim(), 3);

    for rule in [k2, r#"{"kind":"overlapping_chain"}"#, r#"{"kind":"empty"}"#] {
        let out = run(&["verify", "--rule", rule, "--f", r#"{"variant":"identity"}"#, "--samples", "50"]);
        assert_eq!(out.status.code(), Some(0), "{rule}");
    }
}

#[test]
fn verify_output_is_reproducible() {
    let args = ["verify", "--rule", r#"{"kind":"paired_partition"}"#, "--f", &scalar("0.3"), "--domain", DISC, "--samples", "60", "--seed", "11"];
    let (_, a) = run_json(&args);
    let (_, b) = run_json(&args);
    assert!(a.get("generated_at").is_some());
    assert_eq!(canonical(a), canonical(b));
}

#[test]
fn refute_scalar_outside_interval() {
    let (code, v) = run_json(&["refute", "--rule", r#"{"kind":"contiguous_partition","params":{"k":3}}"#, "--c", "-11/20"]);
    assert_eq!(code, 3);
    let cert = v["counterexample"]["certificate"]["min_eig"].as_f64().unwrap();
    assert!((cert + 0.1).abs() < 1e-10);

    let out = run(&["refute", "--rule", r#"{"kind":"contiguous_partition","params":{"k":3}}"#, "--c", "-1/2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["refute", "--rule", r#"{"kind":"overlapping_chain"}"#, "--c", "-2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn witness_matrices_round_trip() {
    let (code, v) = run_json(&["witness", "br", "--r", "1", "--z", "0.5"]);
    assert_eq!(code, 0);
    let min_eig = v["psd"]["min_eig"].as_f64().unwrap();
    assert!(min_eig.abs() < 1e-12);
    let w: Witness = serde_json::from_value(v["witness"].clone()).unwrap();
    let plane = Domain::new(psd_blocks::function::DomainKind::Disc, f64::INFINITY).unwrap();
    let direct = witness_br(1.0, psd_blocks::matrix::C64::new(0.5, 0.0), &plane).unwrap();
    assert_eq!(w, direct);
    assert_eq!(serde_json::to_value(&w.matrix).unwrap(), v["witness"]["matrix"]);

    let (_, v) = run_json(&["witness", "allones", "--x", "1", "--n", "4"]);
    let m: HermitianMatrix = serde_json::from_value(v["witness"]["matrix"].clone()).unwrap();
    assert_eq!(m, HermitianMatrix::ones(4));

    let (code, v) = run_json(&["witness", "albert", "--matrix", r#"{"n":2,"entries":[[0.5,0.25],[0.25,0.5]]}"#, "--domain", r#"{"kind":"open_pos","rho":1}"#]);
    assert_eq!(code, 0);
    assert_eq!(v["witness"]["matrix"]["n"], 3);
    assert_eq!(v["psd"]["is_psd"], true);
}

#[test]
fn witness_parameter_errors_exit_2() {
    assert_eq!(run(&["witness", "br", "--r", "0.5", "--z", "0.9"]).status.code(), Some(2));
    assert_eq!(run(&["witness", "aw", "--w", "0"]).status.code(), Some(2));
    assert_eq!(run(&["witness", "allones", "--x", "1"]).status.code(), Some(2));
    assert_eq!(run(&["witness", "nonsense"]).status.code(), Some(2));
}

#[test]
fn out_file_receives_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("classify.json");
    let out = run(&["classify", "--rule", r#"{"kind":"empty"}"#, "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("R1-Empty"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["table_row"], "1");
}

#[test]
fn rule_and_domain_files_are_read() {
    let dir = tempfile::tempdir().unwrap();
    let rule = dir.path().join("rule.json");
    let domain = dir.path().join("domain.json");
    std::fs::write(&rule, r#"{"kind":"proper_subpartition","params":{"k":2}}"#).unwrap();
    std::fs::write(&domain, r#"{"kind":"half_open_nonneg","rho":"inf"}"#).unwrap();
    let f = dir.path().join("f.json");
    std::fs::write(&f, scalar("0.5")).unwrap();
    let out = run(&["verify", "--rule", rule.to_str().unwrap(), "--f", f.to_str().unwrap(), "--domain", domain.to_str().unwrap(), "--samples", "40"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn suite_exit_codes() {
    let out = run(&["suite", "--max-n", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 13);

    let (code, v) = run_json(&["suite", "--tol", "0"]);
    assert_eq!(code, 1);
    assert_eq!(v["passed"], false);
    let failed: Vec<u64> = v["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["id"].as_u64().unwrap())
        .collect();
    assert!(failed.contains(&2), "{failed:?}");
}

#[test]
fn default_suite_passes() {
    let out = run(&["suite"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
