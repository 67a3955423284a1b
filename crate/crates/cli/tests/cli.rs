use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn model(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn run(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctrlgauge"))
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

fn rows(v: &Value) -> Vec<Vec<f64>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
        .collect()
}

fn assert_close(got: &[Vec<f64>], want: &[Vec<f64>], tol: f64) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        for (a, b) in g.iter().zip(w) {
            assert!((a - b).abs() <= tol * b.abs().max(1.0), "{got:?} vs {want:?}");
        }
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn normalize_dc_rated_matches_published_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["normalize", "--model", model("dc_motor.json").to_str().unwrap(), "--mode", "rated"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("6.667"), "{text}");
    assert!(text.contains("-15.71"), "{text}");
    let m = json(&dir.path().join("dc-motor.rated.json"));
    assert_close(
        &rows(&m["A"]),
        &[vec![0.0, 6.6667, 0.0], vec![0.0, 0.0, 0.15], vec![0.6953, -15.71, 2.66]],
        5e-4,
    );
    assert_close(&rows(&m["B"]), &[vec![0.0], vec![0.0], vec![6.992]], 5e-4);
}

#[test]
fn normalize_ac_target_input_gain() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["normalize", "--model", model("ac_motor.json").to_str().unwrap(), "--mode", "target"], dir.path());
    assert_eq!(code(&out), 0);
    let m = json(&dir.path().join("ac-motor.target.json"));
    assert!((rows(&m["B"])[2][0] - 7.668).abs() < 1e-3);
    assert_close(
        &rows(&m["A"]),
        &[vec![0.0, 6.0, 0.0], vec![0.0, 0.0, 0.1667], vec![0.6571, -13.6146, 2.61]],
        5e-4,
    );
}

#[test]
fn normalizing_a_normalized_model_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("once.json");
    let out = run(
        &["normalize", "--model", model("dc_motor.json").to_str().unwrap(), "--mode", "rated", "--out", first.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let second = dir.path().join("twice.json");
    let out = run(
        &["normalize", "--model", first.to_str().unwrap(), "--mode", "rated", "--out", second.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let (a, b) = (json(&first), json(&second));
    assert_close(&rows(&b["A"]), &rows(&a["A"]), 1e-12);
    assert_close(&rows(&b["B"]), &rows(&a["B"]), 1e-12);
}

#[test]
fn target_mode_without_target_bounds_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("no_target.json");
    std::fs::write(
        &path,
        r#"{"name":"m","A":[[1.0]],"B":[[1.0]],"rated":{"u":[2.0],"x":[3.0]}}"#,
    )
    .unwrap();
    let out = run(&["normalize", "--model", path.to_str().unwrap(), "--mode", "target"], dir.path());
    assert_eq!(code(&out), 3);
}

#[test]
fn malformed_model_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"name":"m","A":[[1.0, 0.0]],"B":[[1.0]]}"#).unwrap();
    let out = run(&["region", "--model", path.to_str().unwrap(), "--steps", "2"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn compare_with_mismatched_dimensions_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "compare",
            "--model",
            model("scalar_chain.json").to_str().unwrap(),
            "--model-b",
            model("planar_pair.json").to_str().unwrap(),
            "--steps",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn region_csv_and_svg_projections() {
    let dir = tempfile::tempdir().unwrap();
    let pp = model("planar_pair.json");
    let out = run(
        &["region", "--model", pp.to_str().unwrap(), "--steps", "2,6", "--format", "csv", "--project", "1,2"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("projection_1_2_N6.csv")).unwrap();
    assert!(csv.starts_with("x,y\n"));
    // one input over six steps gives twelve vertices
    assert_eq!(csv.lines().count(), 1 + 12);

    let out = run(&["region", "--model", pp.to_str().unwrap(), "--steps", "2,6", "--format", "svg"], dir.path());
    assert_eq!(code(&out), 0);
    let svg = std::fs::read_to_string(dir.path().join("projection_1_2.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<path").count(), 2, "{svg}");
}

#[test]
fn one_step_region_is_a_flagged_segment() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["region", "--model", model("planar_pair.json").to_str().unwrap(), "--steps", "1", "--format", "csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("degenerate"));
    let summary = json(&dir.path().join("region.json"));
    assert_eq!(summary["projections"][0]["degenerate"][0], Value::Bool(true));
    let csv = std::fs::read_to_string(dir.path().join("projection_1_2_N1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn uncontrollable_region_has_zero_volume() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["region", "--model", model("uncontrollable.json").to_str().unwrap(), "--steps", "4"], dir.path());
    assert_eq!(code(&out), 0);
    let summary = json(&dir.path().join("region.json"));
    assert_eq!(summary["region"]["shapeFactors"]["volume"].as_f64(), Some(0.0));
    assert_eq!(summary["region"]["rank"].as_u64(), Some(1));
    assert_eq!(summary["controllable"], Value::Bool(false));
}

#[test]
fn compare_equal_and_strictly_stronger() {
    let dir = tempfile::tempdir().unwrap();
    let chain = model("scalar_chain.json");
    let double = model("scalar_double.json");
    let out = run(
        &["compare", "--model", chain.to_str().unwrap(), "--model-b", chain.to_str().unwrap(), "--steps", "4"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert_eq!(json(&dir.path().join("compare.json"))["verdict"]["relation"], "Equal");

    let out = run(
        &["compare", "--model", double.to_str().unwrap(), "--model-b", chain.to_str().unwrap(), "--steps", "4"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let v = json(&dir.path().join("compare.json"));
    assert_eq!(v["verdict"]["relation"], "StrictlyStronger");
    assert_eq!(v["verdict"]["stronger"], "A");
}

#[test]
fn mintime_scalar_chain() {
    let dir = tempfile::tempdir().unwrap();
    let chain = model("scalar_chain.json");
    let out = run(&["mintime", "--model", chain.to_str().unwrap(), "--x0", "0"], dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(json(&dir.path().join("mintime.json"))["minSteps"].as_u64(), Some(0));

    let out = run(&["mintime", "--model", chain.to_str().unwrap(), "--x0", "2.5"], dir.path());
    assert_eq!(code(&out), 0);
    let sol = json(&dir.path().join("mintime.json"));
    assert_eq!(sol["minSteps"].as_u64(), Some(3));
    assert!(sol["terminalError"].as_f64().unwrap() <= 1e-6);

    let out = run(&["mintime", "--model", chain.to_str().unwrap(), "--x0", "-2.5", "--kind", "recover"], dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(json(&dir.path().join("mintime.json"))["minSteps"].as_u64(), Some(3));
}

#[test]
fn mintime_unreachable_prints_certificate_and_exits_6() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["mintime", "--model", model("scalar_chain.json").to_str().unwrap(), "--x0", "7.5", "--max-steps", "5"],
        dir.path(),
    );
    assert_eq!(code(&out), 6);
    assert!(stdout(&out).contains("separating direction"), "{}", stdout(&out));
}

#[test]
fn verify_passes_and_detects_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--seed", "7"], dir.path());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(json(&dir.path().join("verify.json"))["passed"].as_bool().unwrap());

    let out = run(&["verify", "--seed", "7", "--inject-fault", "volume"], dir.path());
    assert_eq!(code(&out), 7);
    assert!(stdout(&out).contains("FAIL planar-volume"));
}

#[test]
fn manifest_lists_existing_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["region", "--model", model("dc_motor.json").to_str().unwrap(), "--mode", "rated", "--steps", "10", "--format", "svg"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "region");
    assert_eq!(m["parameters"]["mode"], "rated");
    assert!(m["toolVersion"].is_string());
    assert!(m["timestamp"].as_str().unwrap().ends_with('Z'));
    let outputs = m["outputs"].as_array().unwrap();
    // three coordinate planes plus the summary
    assert_eq!(outputs.len(), 4);
    for o in outputs {
        assert!(Path::new(o.as_str().unwrap()).exists(), "{o}");
    }
}
