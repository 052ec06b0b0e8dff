use std::process::{Command, Output};

fn besq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besq")).args(args).env_remove("BESQ_DIGITS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data lines of a CSV document: no comments, no header.
fn rows(o: &Output) -> Vec<String> {
    stdout(o).lines().filter(|l| !l.starts_with('#')).skip(1).map(str::to_string).collect()
}

fn last_field(row: &str) -> f64 {
    row.rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn single_point_prints_one_row() {
    let o = besq(&["laplace", "--nu", "1", "--p", "1", "--y", "1", "--lambda", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# schema_version: 1\n# manifest: {"));
    let r = rows(&o);
    assert_eq!(r.len(), 1);
    assert!((last_field(&r[0]) - 0.921283984302986).abs() < 1e-14);
}

#[test]
fn grid_of_100_prints_100_rows() {
    let o = besq(&["laplace", "--nu", "1", "--p", "1", "--y", "1", "--grid", "log:1e-2:1e2:100"]);
    assert!(o.status.success());
    let r = rows(&o);
    assert_eq!(r.len(), 100);
    let v: Vec<f64> = r.iter().map(|l| last_field(l)).collect();
    assert!(v.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn regime_violation_exits_2() {
    let o = besq(&["laplace", "--nu", "-0.5", "--p", "-0.5", "--x", "0.5", "--y", "1", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("p >= 0"));
}

#[test]
fn delta_and_nu_must_agree() {
    let ok = besq(&["laplace", "--delta", "4", "--p", "1", "--y", "1", "--lambda", "2"]);
    assert_eq!(rows(&ok), rows(&besq(&["laplace", "--nu", "1", "--p", "1", "--y", "1", "--lambda", "2"])));
    let bad = besq(&["laplace", "--delta", "4", "--nu", "2", "--p", "1", "--y", "1", "--lambda", "2"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(besq(&["laplace", "--bogus"]).status.code(), Some(2));
}

#[test]
fn put_at_unit_strike_is_zero() {
    let o = besq(&["price", "--nu", "1", "--p", "1", "--y", "1", "--option", "put", "--strike", "1"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["manifest"]["command"], "price");
    assert_eq!(doc["data"][0]["price"], 0.0);
}

#[test]
fn digital_with_large_threshold_approaches_the_transform() {
    let o = besq(&["price", "--nu", "1", "--p", "1", "--y", "1", "--strike", "1e6"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let price = doc["data"][0]["price"].as_f64().unwrap();
    assert!((price - 0.921283984302986).abs() < 1e-12);
}

#[test]
fn mc_check_requires_a_seed() {
    let o = besq(&["price", "--nu", "1", "--p", "1", "--y", "1", "--strike", "0.1", "--mc-check"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn mc_check_adds_estimate_and_error() {
    let args = ["price", "--nu", "1", "--p", "1", "--y", "1", "--strike", "0.1", "--mc-check", "--seed", "7", "--paths", "4000"];
    let o = besq(&args);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let d = &doc["data"][0];
    assert!(d["mc_std_error"].as_f64().unwrap() > 0.0);
    assert!(d["mc_z_score"].as_f64().unwrap().abs() < 4.0);
    assert_eq!(doc["manifest"]["seed"], 7);
    let again: serde_json::Value = serde_json::from_slice(&besq(&args).stdout).unwrap();
    assert_eq!(again["data"], doc["data"]);
}

#[test]
fn clean_validation_exits_0() {
    let o = besq(&["validate"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(rows(&o).iter().all(|r| r.ends_with(",true")));
}

#[test]
fn perturbed_bessel_fails_the_half_order_check() {
    let o = besq(&["validate", "--perturb-bessel", "1e-6"]);
    assert_eq!(o.status.code(), Some(3));
    let r = rows(&o);
    assert!(r.iter().any(|l| l.starts_with("half-order oracle,") && l.ends_with(",false")));
}

#[test]
fn working_digits_come_from_the_environment() {
    let args = ["laplace", "--nu", "1", "--p", "1", "--y", "1", "--kind", "cdf", "--t", "0.1"];
    let o = Command::new(env!("CARGO_BIN_EXE_besq")).args(args).env("BESQ_DIGITS", "10").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_besq")).args(args).env("BESQ_DIGITS", "20").output().unwrap();
    assert!(o.status.success());
}

#[test]
fn smallball_emits_rate_series() {
    let o = besq(&["experiment", "smallball", "--nu", "1", "--p", "1", "--y", "1"]);
    assert!(o.status.success());
    let r = rows(&o);
    assert_eq!(r.iter().filter(|l| l.starts_with("lt-rate,")).count(), 7);
    assert!(r.iter().any(|l| l.starts_with("tauberian,")));
}

#[test]
fn lil_is_seeded_and_reproducible() {
    assert_eq!(besq(&["experiment", "lil", "--nu", "1", "--p", "1", "--y", "100", "--paths", "8"]).status.code(), Some(2));
    let args = ["experiment", "lil", "--nu", "1", "--p", "1", "--y", "100", "--paths", "8", "--seed", "3", "--grid", "20,50,100"];
    let a = besq(&args);
    assert!(a.status.success());
    assert_eq!(rows(&a).len(), 24);
    assert_eq!(rows(&a), rows(&besq(&args)));
}

#[test]
fn bias_study_emits_the_step_ladder() {
    let o = besq(&["experiment", "bias-study", "--nu", "1", "--p", "1", "--y", "1", "--paths", "2000", "--seed", "1", "--step", "2e-2,1e-2"]);
    assert!(o.status.success());
    assert_eq!(rows(&o).len(), 2);
}

#[test]
fn out_flag_writes_the_file_and_keeps_stdout_empty() {
    let path = std::env::temp_dir().join(format!("besq-cli-test-{}.json", std::process::id()));
    let o = besq(&["validate", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["summary"]["pass"], true);
    assert_eq!(doc["data"].as_array().unwrap().len(), 6);
}
