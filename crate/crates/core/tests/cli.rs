use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use modelproj::experiments::{BenchmarkReport, DEFAULT_CONFIG};

const BIN: &str = env!("CARGO_BIN_EXE_modelproj");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn default_config_file(dir: &Path) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, DEFAULT_CONFIG).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn project_recovers_fixture_geometry() {
    let expected = json(&fixture("exact_expected.json"));
    let m_star = floats(&expected["m_star"]);
    let h2 = expected["h2"].as_f64().unwrap();
    let sgg = expected["sgg"].as_f64().unwrap().to_string();
    let out = ok(&[
        "project",
        "--embedding",
        s(&fixture("exact_embedding.json")),
        "--fits",
        s(&fixture("exact_fits.json")),
        "--sgg",
        &sgg,
    ]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let m = floats(&report["m"]);
    for (a, b) in m.iter().zip(&m_star) {
        assert!((a - b).abs() < 1e-6, "m {m:?} vs {m_star:?}");
    }
    assert!((report["h2"].as_f64().unwrap() - h2).abs() < 1e-8);
    assert_eq!(report["clamped"], Value::Bool(false));
    // the fixture's m* lies outside the hull, the average cannot
    let avg = floats(&report["average"]["location"]);
    assert!(avg[0] <= 1.25);
    let names: Vec<&String> = report["kl_to_g"].as_object().unwrap().keys().collect();
    assert_eq!(names, ["f1", "f2", "f3", "f4", "f5", "f6"]);
}

#[test]
fn average_reports_named_weights() {
    let out = ok(&["average", "--embedding", s(&fixture("exact_embedding.json")), "--fits", s(&fixture("exact_fits.json"))]);
    let avg: Value = serde_json::from_slice(&out.stdout).unwrap();
    let w: f64 = avg["weights"].as_object().unwrap().values().map(|v| v.as_f64().unwrap()).sum();
    assert!((w - 1.0).abs() < 1e-12);
    assert_eq!(floats(&avg["location"]).len(), 2);
}

#[test]
fn stepwise_commands_compose_to_pipeline() {
    let tmp = TempDir::new().unwrap();
    let cfg = default_config_file(tmp.path());
    let full = tmp.path().join("full");
    ok(&["--config", s(&cfg), "--out", s(&full), "--no-timestamp", "pipeline"]);
    for f in ["sample.csv", "fits.json", "divergence.csv", "embedding.json", "entropy.json", "projection.json", "report.json", "model_space.svg"] {
        assert!(full.join(f).exists(), "{f} missing");
    }

    let step = |name: &str| tmp.path().join(name);
    ok(&["--config", s(&cfg), "--out", s(&step("fits.json")), "fit", "--sample", s(&full.join("sample.csv"))]);
    ok(&["--out", s(&step("divergence.csv")), "divergence", "--fits", s(&step("fits.json"))]);
    ok(&["--config", s(&cfg), "--out", s(&step("embedding.json")), "embed", "--matrix", s(&step("divergence.csv"))]);
    ok(&["--config", s(&cfg), "--out", s(&step("entropy.json")), "entropy", "--sample", s(&full.join("sample.csv"))]);
    ok(&[
        "--config",
        s(&cfg),
        "--out",
        s(&step("projection.json")),
        "project",
        "--embedding",
        s(&step("embedding.json")),
        "--fits",
        s(&step("fits.json")),
        "--entropy",
        s(&step("entropy.json")),
    ]);
    for f in ["fits.json", "divergence.csv", "embedding.json", "entropy.json", "projection.json"] {
        assert_eq!(fs::read(step(f)).unwrap(), fs::read(full.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn json_outputs_are_byte_stable_without_timestamp() {
    let tmp = TempDir::new().unwrap();
    let cfg = default_config_file(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["--config", s(&cfg), "--out", s(&a), "--no-timestamp", "pipeline"]);
    ok(&["--config", s(&cfg), "--out", s(&b), "--no-timestamp", "--threads", "1", "pipeline"]);
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
    let svg = fs::read_to_string(a.join("model_space.svg")).unwrap();
    assert!(!svg.contains("generated"));

    let c = tmp.path().join("c");
    ok(&["--config", s(&cfg), "--out", s(&c), "pipeline"]);
    let stamped = fs::read_to_string(c.join("model_space.svg")).unwrap();
    assert!(stamped.contains("<!-- generated unix time"));
    let strip = |t: &str| t.lines().filter(|l| !l.contains("<!-- generated")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&stamped), strip(&svg));
    assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(c.join("report.json")).unwrap());
}

#[test]
fn seed_override_changes_the_data() {
    let tmp = TempDir::new().unwrap();
    let cfg = default_config_file(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["--config", s(&cfg), "--out", s(&a), "--no-timestamp", "--seed-override", "5", "pipeline"]);
    ok(&["--config", s(&cfg), "--out", s(&b), "--no-timestamp", "--seed-override", "6", "pipeline"]);
    assert_ne!(fs::read(a.join("sample.csv")).unwrap(), fs::read(b.join("sample.csv")).unwrap());
}

#[test]
fn bench_sgg_defaults_cover_the_full_design() {
    let tmp = TempDir::new().unwrap();
    ok(&["--out", s(tmp.path()), "bench-sgg"]);
    let report: Value = json(&tmp.path().join("bench_sgg.json"));
    let cells = report["cells"].as_array().unwrap();
    let ns: Vec<u64> = cells.iter().map(|c| c["n"].as_u64().unwrap()).collect();
    assert_eq!(ns, [10, 25, 50, 75, 150]);
    assert_eq!(report["config"]["replicates"].as_u64(), Some(2000));
    let csv = fs::read_to_string(tmp.path().join("bench_sgg_replicates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 * 2000);
    // cell summaries recompute from the archive
    let recomputed = BenchmarkReport::summaries_from_csv(csv.as_bytes()).unwrap();
    assert_eq!(recomputed.len(), 5);
    for ((n, summary), cell) in recomputed.iter().zip(cells) {
        assert_eq!(*n as u64, cell["n"].as_u64().unwrap());
        assert_eq!(serde_json::to_value(summary).unwrap(), cell["ratio"]);
    }
}

#[test]
fn deletion_writes_one_record_per_step() {
    let tmp = TempDir::new().unwrap();
    let cfg = default_config_file(tmp.path());
    let out = tmp.path().join("del");
    ok(&["--config", s(&cfg), "--out", s(&out), "deletion", "--direction", "right", "--steps", "5"]);
    let lines = fs::read_to_string(out.join("deletion_steps.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 6);
    for line in lines.lines() {
        let _: Value = serde_json::from_str(line).unwrap();
    }
    let report = json(&out.join("deletion_report.json"));
    assert_eq!(report["direction"], "right");
    assert_eq!(report["rows"].as_array().unwrap().len(), 6);
    let csv = fs::read_to_string(out.join("deletion_trajectory.csv")).unwrap();
    assert!(csv.starts_with("step,removed,remaining,m_hat_1,m_hat_2,average_1,average_2,"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["pipeline"]).status.code(), Some(1), "missing --config");
    assert_eq!(run(&["--config", "/nonexistent/run.toml", "pipeline"]).status.code(), Some(1));

    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, DEFAULT_CONFIG.replacen("n = 450", "n = 450\nsamples = 3", 1)).unwrap();
    let out = run(&["--config", s(&bad), "pipeline"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("samples"));

    let cfg = default_config_file(tmp.path());
    assert_eq!(run(&["--config", s(&cfg), "--threads", "0", "pipeline"]).status.code(), Some(1));

    // repeated rows make nearest-neighbour distances vanish: a numerical failure
    let dup = tmp.path().join("dup.csv");
    fs::write(&dup, "x1,x2\n0.5,1\n0.5,1\n2,3\n-1,0.25\n").unwrap();
    let out = run(&["entropy", "--sample", s(&dup)]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(run(&["entropy", "--sample", s(&dup), "--k", "9"]).status.code(), Some(1));

    // a constant column makes every regression design singular
    let flat = tmp.path().join("flat.csv");
    let mut text = String::from("x1,x2,x3,x4,x5,x6\n");
    for i in 0..30 {
        let v = i as f64;
        text.push_str(&format!("{v},1,{},{},{},{}\n", (v * 0.7).sin(), (v * 1.3).cos(), v * v * 0.01, (v * 0.2).sin()));
    }
    fs::write(&flat, text).unwrap();
    assert_eq!(run(&["--config", s(&cfg), "fit", "--sample", s(&flat)]).status.code(), Some(2));
}
