use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn gclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gclab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn schema_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

/// Runs `command` with `--format json`, validates against the repo schema and returns the document.
fn json_checked(command: &str, args: &[&str]) -> (i32, Value) {
    let mut all = vec![command];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--format", "json"]);
    let o = gclab(&all);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{command}: {e}\n{}", stderr(&o)));
    let schema_text = std::fs::read_to_string(schema_dir().join(format!("{command}.schema.json"))).unwrap();
    let schema: Value = serde_json::from_str(&schema_text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{command}: {errors:?}");
    (code(&o), doc)
}

#[test]
fn flat_vector_is_nongeneric() {
    let o = gclab(&["check-vector", "--catalog", "minkowski4", "--point", "0,0,0,0", "--vector", "1,0,0,0", "--r", "2"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("m = [0, 0, 0]"), "{out}");
    assert!(out.contains("2-nongeneric: yes"), "{out}");
    let (c, doc) = json_checked("check-vector", &["--catalog", "minkowski4", "--point", "0,0,0,0", "--vector", "1,0,0,0", "--r", "2"]);
    assert_eq!(c, 0);
    assert_eq!(doc["magnitudes"], serde_json::json!([0.0, 0.0, 0.0]));
    assert_eq!(doc["r_nongeneric"], Value::Bool(true));
}

#[test]
fn ppwave_directions() {
    let (_, v) = json_checked("check-vector", &["--catalog", "ppwave", "--vector", "0,1,0,0", "--r", "3"]);
    assert_eq!(v["r_nongeneric"], Value::Bool(true));
    assert_eq!(v["causal_character"], "null");
    let (_, u) = json_checked("check-vector", &["--catalog", "ppwave", "--vector", "1,0,0,0", "--r", "1"]);
    assert_eq!(u["generic"], Value::Bool(true));
}

#[test]
fn malformed_vector_names_the_flag() {
    let o = gclab(&["check-vector", "--catalog", "minkowski4", "--vector", "1,a,0,0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--vector"));
    let o = gclab(&["check-vector", "--catalog", "minkowski4", "--vector", "1,0,0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--vector"));
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(code(&gclab(&["check-vector", "--catalog", "nosuch", "--vector", "1,0"])), 2);
    assert_eq!(code(&gclab(&["check-vector", "--vector", "1,0"])), 2);
    assert_eq!(code(&gclab(&["census", "--catalog", "minkowski4", "--tol", "0"])), 2);
    assert_eq!(code(&gclab(&["scan-geodesic", "--catalog", "minkowski4", "--step", "-1"])), 2);
    assert_eq!(code(&gclab(&["check-vector", "--catalog", "minkowski4", "--vector", "1,0,0,0", "--format", "csv"])), 2);
    let o = gclab(&["check-vector", "--catalog", "schwarzschild", "--point", "0,1,1,0", "--vector", "1,0,0,0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("outside"));
    assert_eq!(code(&gclab(&["bogus"])), 2);
}

#[test]
fn chart_file_errors_carry_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.chart");
    std::fs::write(&path, "dimension 2\ncoordinates t x\ng[0][0] = -1 +\n").unwrap();
    let o = gclab(&["check-vector", "--chart", path.to_str().unwrap(), "--vector", "1,0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.chart: 3:"), "{}", stderr(&o));
}

#[test]
fn flat_scan_has_no_generic_point() {
    let o = gclab(&["scan-geodesic", "--catalog", "minkowski4", "--vector", "1,0.3,0,0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("generic point found: no; 1 plateau, 0 isolated dips; plateau over full window"));
}

#[test]
fn perturbed_scan_finds_generic_points() {
    let (c, doc) = json_checked("scan-geodesic", &["--perturb", "0.05:3:7", "--seed", "3"]);
    assert_eq!(c, 0);
    assert!(doc["summary"].as_str().unwrap().starts_with("generic point found: yes; 0 plateaus"));
    assert_eq!(doc["seed"], 3);
}

#[test]
fn region_exit_truncates_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let chart = dir.path().join("half.chart");
    std::fs::write(&chart, "dimension 2\ncoordinates t x\ng[0][0] = -1\ng[1][1] = 1\nregion x < 0.5\n").unwrap();
    let trace = dir.path().join("trace.csv");
    let o = gclab(&[
        "scan-geodesic", "--chart", chart.to_str().unwrap(), "--point", "0,0", "--vector", "1,1",
        "--t-span", "0,2", "--step", "0.1", "--trace", trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("trace truncated"));
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("t,x0,x1,xdot0,xdot1,genericity_magnitude,causal_character"));
    assert!(csv.lines().count() < 8);
}

#[test]
fn scan_without_vector_reports_generated_seed() {
    let o = gclab(&["scan-geodesic", "--catalog", "minkowski3", "--step", "0.5"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("seed: "));
}

#[test]
fn verify_examples() {
    let o = gclab(&["verify", "--n", "4", "--r", "3", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("codims: (18, 10)"));
    assert!(out.contains("threshold: 3"));
    assert!(out.contains("8 < 18 PASS, 8 < 10 PASS"));

    let (c, doc) = json_checked("verify", &["--n", "3", "--r", "6", "--seed", "1"]);
    assert_eq!(c, 0);
    assert_eq!(doc["dim_check"]["codim_non_null"], 18);
    assert_eq!(doc["dim_check"]["codim_null"], 7);

    let (c, doc) = json_checked("verify", &["--n", "4", "--r", "2", "--seed", "1"]);
    assert_eq!(c, 1);
    assert_eq!(doc["dim_check"]["pass_null"], Value::Bool(false));
    assert_eq!(doc["surjectivity"]["ok"], Value::Bool(true));
}

#[test]
fn fiber_subcommands() {
    let (c, doc) = json_checked("verify-surjectivity", &["--n", "4", "--r", "2", "--seed", "5"]);
    assert_eq!(c, 0);
    assert_eq!(doc["rank"], 20);
    let (c, doc) = json_checked("verify-codim", &["--n", "5", "--r", "2", "--seed", "5", "--trials", "4"]);
    assert_eq!(c, 0);
    assert_eq!(doc["reports"].as_array().unwrap().len(), 8);
}

#[test]
fn census_examples() {
    let (_, flat) = json_checked("census", &["--catalog", "minkowski4", "--n-samples", "50", "--r", "1", "--seed", "7"]);
    assert_eq!(flat["generic_fraction"], 0.0);

    let (_, pert) = json_checked("census", &["--perturb", "0.05:3:7", "--n-samples", "200", "--r", "1", "--seed", "7"]);
    assert_eq!(pert["r_nongeneric_count"], 0);

    let o = gclab(&["census", "--catalog", "desitter4", "--r", "1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("seed: "));
    let ds: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(ds["r_nongeneric"]["null"], ds["counts"]["null"]);
    assert_eq!(ds["generic"]["timelike"], ds["counts"]["timelike"]);
}

#[test]
fn census_is_reproducible_and_dumps_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("census.json");
    let dump = dir.path().join("samples.csv");
    let args = ["census", "--perturb", "0.05:3:7", "--n-samples", "20", "--seed", "11", "--format", "json"];
    let first = gclab(&args);
    let mut with_files = args.to_vec();
    with_files.extend_from_slice(&["--output", out.to_str().unwrap(), "--dump-samples", dump.to_str().unwrap()]);
    let second = gclab(&with_files);
    assert_eq!(code(&second), 0);
    assert!(second.stdout.is_empty());
    assert_eq!(first.stdout, std::fs::read(&out).unwrap());
    assert_eq!(std::fs::read_to_string(&dump).unwrap().lines().count(), 61);
}

#[test]
fn census_box_override() {
    let (_, doc) = json_checked("census", &["--catalog", "minkowski3", "--n-samples", "3", "--seed", "1", "--box=-0.5:0.5"]);
    assert_eq!(doc["sample_box"], serde_json::json!([[-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5]]));
    assert_eq!(code(&gclab(&["census", "--catalog", "minkowski3", "--seed", "1", "--box", "0:1,0:1"])), 2);
}

#[test]
fn catalog_and_threshold() {
    let (_, cat) = json_checked("catalog", &[]);
    assert!(cat["charts"].as_array().unwrap().len() >= 6);
    let o = gclab(&["catalog", "--show", "ppwave"]);
    assert!(stdout(&o).contains("coordinates u v x y"));

    let (c, t) = json_checked("threshold", &[]);
    assert_eq!(c, 0);
    let thresholds: Vec<u64> = t["rows"].as_array().unwrap().iter().map(|r| r["threshold"].as_u64().unwrap()).collect();
    assert_eq!(&thresholds[..4], &[6, 3, 2, 2]);
    let csv = stdout(&gclab(&["threshold", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 7);
}
