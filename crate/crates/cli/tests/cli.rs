use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn spec(name: &str) -> String {
    format!("{}/specs/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

fn finsler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler")).args(args).output().expect("run finsler")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let o = finsler(args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn conformal_berwald_moor_is_berwald_not_riemannian() {
    let v = json(&["classify", &spec("conformal_berwald_moor"), "--json"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["summary"]["berwald"], true);
    assert_eq!(v["summary"]["landsberg"], true);
    assert_eq!(v["summary"]["riemannian"], false);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    assert_eq!(points[0]["mode"], "exact");
    assert_eq!(points[0]["berwald"]["spray"][0], "1/2*y1^2");
    assert_eq!(points[1]["fell_back"], true);
}

#[test]
fn quadratic_metric_is_riemannian() {
    let v = json(&["classify", &spec("warped_quadratic"), "--json"]);
    assert_eq!(v["summary"]["riemannian"], true);
    assert_eq!(v["summary"]["berwald"], true);
}

#[test]
fn rotating_b_is_not_berwald_and_has_a_witness() {
    let v = json(&["classify", &spec("rotating_decomp"), "--json", "--dump-witness"]);
    assert_eq!(v["summary"]["berwald"], false);
    let w = &v["points"][0]["berwald"]["witness"];
    assert!(w["indices"].is_array());
    assert!(w["residual"].is_string());

    let d = json(&["verify-decomp", &spec("rotating_decomp"), "--json"]);
    assert_eq!(d["points"][0]["p1_berwald"], false);
    assert_eq!(d["points"][0]["p2_parallel"], false);
    assert_eq!(d["points"][0]["nabla_b"][0][1], "1");
}

#[test]
fn flat_decomposable_is_berwald_and_parallel() {
    let d = json(&["verify-decomp", &spec("flat_decomp"), "--json"]);
    for p in d["points"].as_array().unwrap() {
        assert_eq!(p["p1_berwald"], true);
        assert_eq!(p["p2_parallel"], true);
        assert_eq!(p["b_vanishes"], true);
    }
}

#[test]
fn point_flag_overrides_spec_points() {
    let v = json(&["classify", &spec("berwald_moor"), "--json", "--point", "1/3,2,-5"]);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 1);
    assert_eq!(points[0]["point"][0], "1/3");
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec!["classify", "conformal_berwald_moor", "--json"],
        vec!["classify", "rotating_decomp"],
        vec!["verify-decomp", "flat_decomp", "--json"],
        vec!["spray", "warped_quadratic"],
    ] {
        let path = spec(args[1]);
        let mut full = args.clone();
        full[1] = &path;
        let a = finsler(&full);
        let b = finsler(&full);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn spray_prints_canonical_coefficients() {
    let o = finsler(&["spray", &spec("warped_quadratic"), "--point", "1,0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("G^1 = -1/2*y2^2"), "{text}");
    assert!(text.contains("G^2 = 1/2*y1*y2"), "{text}");
    assert!(text.contains("N^1_2 = -y2"), "{text}");
}

#[test]
fn parse_errors_report_line_and_column() {
    let path = temp_file(
        "bad_expr.toml",
        "kind = \"mth-root\"\ndimension = 2\ndegree = 3\n[[coefficient]]\nindex = [1,1,2]\nexpr = \"x1 + * 2\"\n",
    );
    let o = finsler(&["classify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 6, column 14"), "{}", stderr(&o));
}

#[test]
fn degenerate_hessian_exits_with_two() {
    let path = temp_file("cube.toml", "kind = \"mth-root\"\ndimension = 2\ndegree = 3\n[[coefficient]]\nindex = [1,1,1]\nexpr = \"1\"\n");
    let o = finsler(&["classify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("degenerate"));
}

#[test]
fn non_unit_b_is_rejected_unless_normalized() {
    let path = temp_file(
        "long_b.toml",
        "kind = \"decomposable\"\ndimension = 2\nb = [\"2\", \"0\"]\n[[gamma]]\nindex = [1,1]\nexpr = \"1\"\n\
         [[gamma]]\nindex = [2,2]\nexpr = \"1\"\n",
    );
    let o = finsler(&["verify-decomp", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unit norm"));
    let o = finsler(&["verify-decomp", path.to_str().unwrap(), "--normalize-b"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn geodesic_writes_a_table_and_compares() {
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("traj.csv");
    let v = json(&[
        "geodesic",
        &spec("flat_decomp"),
        "--x0",
        "0,0,0",
        "--y0",
        "1,1/2,0",
        "--dt",
        "0.01",
        "--steps",
        "50",
        "--compare-riemannian",
        "--out",
        out.to_str().unwrap(),
        "--json",
    ]);
    assert!(v["f_drift"].as_f64().unwrap() < 1e-9);
    assert!(v["riemannian_deviation"].as_f64().unwrap() < 1e-9);
    let table = std::fs::read_to_string(&out).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,x2,x3,y1,y2,y3,F");
    assert_eq!(lines.count(), 51);
}

#[test]
fn compare_riemannian_needs_parallel_b() {
    let o = finsler(&[
        "geodesic",
        &spec("rotating_decomp"),
        "--x0",
        "0,0,0",
        "--y0",
        "1,0,0",
        "--compare-riemannian",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
