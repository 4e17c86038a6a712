use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn pofx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pofx"))
        .args(args)
        .env_remove("EXPAND_COSTS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn sidecar(dir: &Path, stem: &str, shape: &[usize], values: &[f32]) -> PathBuf {
    let meta = serde_json::json!({
        "name": stem,
        "shape": shape,
        "dtype": "f32",
        "byte_order": "little",
    });
    let json = dir.join(format!("{stem}.json"));
    std::fs::write(&json, meta.to_string()).unwrap();
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(dir.join(format!("{stem}.bin")), bytes).unwrap();
    json
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn table_sizes_and_guard() {
    let o = pofx(&["table", "--n", "4", "--es", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 17);
    let o = pofx(&["table", "--n", "2", "--es", "0"]);
    let values: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(5).unwrap().to_string())
        .collect();
    assert_eq!(values, ["0", "1", "NaR", "-1"]);
    assert_eq!(code(&pofx(&["table", "--n", "20"])), 2);
}

fn field(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}\t")))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
        .to_string()
}

#[test]
fn convert_examples() {
    let o = pofx(&["convert", "--posit-bits", "010", "--n", "4", "--es", "0", "--m", "8", "--variant", "normalized"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(field(&out, "magnitude"), "1000000");
    assert_eq!(field(&out, "fxp_value"), "0.5");
    assert_eq!(field(&out, "overflow"), "false");

    let o = pofx(&["convert", "--value", "0", "--n", "8", "--es", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&stdout(&o), "twos"), "00000000");

    let o = pofx(&["convert", "--posit-bits", "1000", "--n", "4", "--es", "0", "--variant", "general"]);
    assert_eq!(code(&o), 3);

    let o = pofx(&["convert", "--posit-bits", "01x", "--n", "4"]);
    assert_eq!(code(&o), 2);
    let o = pofx(&["convert", "--n", "4"]);
    assert_eq!(code(&o), 2);
    let o = pofx(&["convert", "--value", "0.5", "--posit-bits", "010", "--n", "4"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn convert_trace_and_overflow() {
    let o = pofx(&["convert", "--value", "-0.25", "--n", "6", "--es", "1", "--trace"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(field(&out, "fxp_value"), "-0.25");
    assert_eq!(field(&out, "twos"), "11100000");
    for stage in ["A ", "B1 ", "B2 ", "C ", "D ", "E "] {
        assert!(out.lines().any(|l| l.starts_with(stage)), "{stage}");
    }
    // 2^-10 is below FxP(8,7) resolution
    let o = pofx(&["convert", "--posit-bits", "00000000001", "--n", "12", "--es", "0"]);
    assert_eq!(code(&o), 3);
    assert_eq!(field(&stdout(&o), "overflow"), "true");
    // general variant, too large for FxP(8,4)
    let o = pofx(&["convert", "--value", "16", "--n", "8", "--es", "1", "--f", "4", "--variant", "general"]);
    assert_eq!(code(&o), 3);
    let o = pofx(&["convert", "--value", "3.25", "--n", "8", "--es", "1", "--f", "4", "--variant", "general"]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&stdout(&o), "fxp_value"), "3.25");
}

#[test]
fn analyze_examples() {
    let dir = tempfile::tempdir().unwrap();
    let zeros = sidecar(dir.path(), "zeros", &[4, 2], &[0.0; 8]);
    let out = dir.path().join("r.json");
    let o = pofx(&["analyze", "--weights", s(&zeros), "--schemes", "fxp:8:7,posit:6:1,pofx:6:1:8,fpf:8:6:1", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    assert_eq!(r["results"].as_array().unwrap().len(), 4);
    for res in r["results"].as_array().unwrap() {
        assert_eq!(res["weights"]["avg_abs"].as_f64(), Some(0.0));
        assert_eq!(res["weights"]["max_abs"].as_f64(), Some(0.0));
        assert_eq!(res["weights"]["excluded_zeros"].as_u64(), Some(8));
    }

    let csv = dir.path().join("one.csv");
    std::fs::write(&csv, "0.3\n").unwrap();
    let o = pofx(&["analyze", "--weights", s(&csv), "--schemes", "posit:4:0"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let avg = r["results"][0]["weights"]["avg_abs"].as_f64().unwrap();
    // the f32 nearest to 0.3, minus 0.25
    assert_eq!(avg, 0.3f32 as f64 - 0.25);
    assert!((avg - 0.05).abs() < 1e-7);

    assert_eq!(code(&pofx(&["analyze", "--weights", s(&csv), "--schemes", "fxp:8"])), 2);
    assert_eq!(code(&pofx(&["analyze", "--weights", "/nonexistent.csv", "--schemes", "fxp:8:7"])), 4);
    let nan = dir.path().join("nan.csv");
    std::fs::write(&nan, "0.1\nNaN\n").unwrap();
    assert_eq!(code(&pofx(&["analyze", "--weights", s(&nan), "--schemes", "fxp:8:7"])), 4);
    let short = sidecar(dir.path(), "short", &[3], &[0.1, 0.2]);
    assert_eq!(code(&pofx(&["analyze", "--weights", s(&short), "--schemes", "fxp:8:7"])), 4);
}

#[test]
fn analyze_with_activations() {
    let dir = tempfile::tempdir().unwrap();
    let w: Vec<f32> = (0..12).map(|i| (i as f32 - 6.0) / 10.0).collect();
    let w = sidecar(dir.path(), "w", &[4, 3], &w);
    let a = sidecar(dir.path(), "a", &[2, 4], &[0.5, 0.25, 0.0, 1.0, 0.1, 0.2, 0.3, 0.4]);
    let o = pofx(&["analyze", "--weights", s(&w), "--activations", s(&a), "--schemes", "posit:6:0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["results"][0]["activations"]["pre"]["count"].as_u64(), Some(6));
    let bad = sidecar(dir.path(), "bad", &[2, 5], &[0.0; 10]);
    assert_eq!(code(&pofx(&["analyze", "--weights", s(&w), "--activations", s(&bad), "--schemes", "posit:6:0"])), 3);
}

fn pareto_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let reports = dir.join("reports");
    std::fs::create_dir(&reports).unwrap();
    let w = sidecar(dir, "w", &[3], &[0.1, -0.2, 0.3]);
    let o = pofx(&[
        "analyze",
        "--weights",
        s(&w),
        "--schemes",
        "fxp:8:7,posit:8:0,pofx:7:1:8",
        "--out",
        s(&reports.join("layer1.json")),
    ]);
    assert_eq!(code(&o), 0);
    let costs = dir.join("costs.csv");
    std::fs::write(
        &costs,
        "kind,n,es,m,pdp,luts,cpd,power\nfxp,,,8,1,3,1,1\nposit,8,0,,2,1,1,1\npofx,7,1,8,3,3,1,1\n",
    )
    .unwrap();
    (reports, costs)
}

#[test]
fn pareto_examples() {
    let dir = tempfile::tempdir().unwrap();
    let (reports, costs) = pareto_fixture(dir.path());
    let o = pofx(&["pareto", "--reports", s(&reports), "--costs", s(&costs), "--objectives", "pdp,luts", "--reference", "4,4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["front"], serde_json::json!(["fxp:8:7", "posit:8:0"]));
    assert_eq!(r["hypervolume"]["full"].as_f64(), Some(7.0));
    // the only converter scheme is dominated
    assert_eq!(r["hypervolume"]["improvement_percent"].as_f64(), Some(0.0));

    // default cost path from the environment
    let o = Command::new(env!("CARGO_BIN_EXE_pofx"))
        .args(["pareto", "--reports", s(&reports), "--objectives", "pdp,luts,avg_abs"])
        .env("EXPAND_COSTS", &costs)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(code(&pofx(&["pareto", "--reports", s(&reports), "--objectives", "pdp"])), 2);
    assert_eq!(code(&pofx(&["pareto", "--reports", s(&reports), "--objectives", "speed"])), 2);
    let partial = dir.path().join("partial.csv");
    std::fs::write(&partial, "kind,n,es,m,pdp,luts,cpd,power\nfxp,,,8,1,3,1,1\n").unwrap();
    assert_eq!(code(&pofx(&["pareto", "--reports", s(&reports), "--costs", s(&partial), "--objectives", "pdp"])), 3);
}

#[test]
fn pareto_single_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let reports = dir.path().join("reports");
    std::fs::create_dir(&reports).unwrap();
    let w = sidecar(dir.path(), "w", &[2], &[0.1, -0.2]);
    let o = pofx(&["analyze", "--weights", s(&w), "--schemes", "fxp:8:7", "--out", s(&reports.join("a.json"))]);
    assert_eq!(code(&o), 0);
    let o = pofx(&["pareto", "--reports", s(&reports), "--objectives", "avg_abs,param_bits"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["points"][0]["on_front"], Value::Bool(true));
    assert_eq!(r["hypervolume"]["improvement_percent"].as_f64(), Some(0.0));
}

#[test]
fn simulate_examples() {
    let dir = tempfile::tempdir().unwrap();
    let w: Vec<f32> = (0..640).map(|i| ((i * 37 % 101) as f32 - 50.0) / 60.0).collect();
    let a: Vec<f32> = (0..64 * 5).map(|i| (i * 13 % 64) as f32 / 64.0).collect();
    let w = sidecar(dir.path(), "w", &[64, 10], &w);
    let a = sidecar(dir.path(), "a", &[5, 64], &a);
    let run = |designs: &str| {
        let o = pofx(&["simulate", "--weights", s(&w), "--activations", s(&a), "--designs", designs]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_str::<Value>(&stdout(&o)).unwrap()
    };
    let r = run("fxp:8,fxp:8");
    for d in r["designs"].as_array().unwrap() {
        assert_eq!(d["stored_ratio"].as_f64(), Some(1.0));
        assert_eq!(d["moved_ratio"].as_f64(), Some(1.0));
    }
    assert_eq!(r["designs"][0]["account"]["weight_bits_stored"].as_u64(), Some(5120));
    let r = run("fxp:8,pofx-store:8:1:8,pofx-store:6:0:8,pofx-move:6:0:8");
    assert_eq!(r["designs"][1]["stored_ratio"].as_f64(), Some(0.875));
    assert_eq!(r["designs"][2]["moved_ratio"].as_f64(), Some(0.625));
    assert_eq!(r["designs"][2]["account"]["weight_bits_stored"].as_u64(), Some(3200));
    assert_eq!(r["designs"][2]["outputs_hash"], r["designs"][3]["outputs_hash"]);

    let bad = sidecar(dir.path(), "bad", &[5, 63], &[0.0; 315]);
    let o = pofx(&["simulate", "--weights", s(&w), "--activations", s(&bad), "--designs", "fxp:8"]);
    assert_eq!(code(&o), 3);
    let o = pofx(&["simulate", "--weights", s(&w), "--activations", s(&a), "--designs", "tpu:8"]);
    assert_eq!(code(&o), 2);
}
