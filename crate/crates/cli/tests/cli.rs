use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dynprice"));
    c.env_remove("DYNPRICE_OUT_DIR");
    c
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../examples/configs").join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    bin().arg("--out-dir").arg(out).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn small_run(out: &Path) {
    let cfg = example("replication.json");
    let o = run(out, &["run", cfg.to_str().unwrap(), "--set", "horizon=200"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn run_writes_trace_with_one_row_per_round() {
    let dir = tempfile::tempdir().unwrap();
    small_run(dir.path());
    let text = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(text.lines().count(), 201);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("ogd_static.json");
    let o = bin()
        .env("DYNPRICE_OUT_DIR", dir.path())
        .args(["run", cfg.to_str().unwrap(), "--set", "horizon=20"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("trace.csv").exists());
}

#[test]
fn malformed_json_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"horizon\": 10,\n  oops\n}").unwrap();
    let o = run(dir.path(), &["run", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn degenerate_discount_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("drift.json");
    let o = run(dir.path(), &["run", cfg.to_str().unwrap(), "--set", "smoothing.epsilon=1.5"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon * R"));
}

#[test]
fn missing_config_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["run", "/nonexistent/config.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn overrides_reach_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("ogd_static.json");
    let o = run(
        dir.path(),
        &["run", cfg.to_str().unwrap(), "--set", "horizon=30", "--set", "seed=77"],
    );
    assert_eq!(code(&o), 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["horizon"], 30);
    assert_eq!(manifest["seed"], 77);
    let bad = run(dir.path(), &["run", cfg.to_str().unwrap(), "--set", "sellers.9.learner=omd"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn sweep_exponent_needs_enough_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("ogd_static.json");
    let cfg = cfg.to_str().unwrap();
    let o = run(dir.path(), &["sweep", cfg, "--horizons", "100"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 4);
    assert!(row[3].is_empty());

    let o = run(dir.path(), &["sweep", cfg, "--horizons", "10,100,1000"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert!(last[3].parse::<f64>().unwrap().is_finite());

    let o = run(dir.path(), &["sweep", cfg, "--horizons", "100,100"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn check_passes_then_fails_after_tampering() {
    let dir = tempfile::tempdir().unwrap();
    small_run(dir.path());
    let manifest = dir.path().join("manifest.json");
    let m = manifest.to_str().unwrap();
    let o = run(dir.path(), &["check", m]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));

    let trace = dir.path().join("trace.csv");
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let header: Vec<&str> = lines[0].split(',').collect();
    let col = header.iter().position(|h| *h == "revenue_0").unwrap();
    let mut cells: Vec<String> = lines[10].split(',').map(String::from).collect();
    cells[col] = "123.0".into();
    lines[10] = cells.join(",");
    std::fs::write(&trace, lines.join("\n") + "\n").unwrap();

    let o = run(dir.path(), &["check", m, "consistency"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));

    let o = run(dir.path(), &["check", m, "no-such-check"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    small_run(dir.path());
    let m = dir.path().join("manifest.json");
    let o = run(dir.path(), &["report", m.to_str().unwrap(), "--grid", "2000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 2);
    for i in 0..2 {
        let csv = std::fs::read_to_string(dir.path().join(format!("report_seller{i}.csv"))).unwrap();
        assert!(csv.starts_with("t,price,demand,revenue,gradient,benchmark,regret"));
        assert_eq!(csv.lines().count(), 201);
    }
}

#[test]
fn equilibrium_of_symmetric_market() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("ogd_static.json");
    let o = run(dir.path(), &["equilibrium", cfg.to_str().unwrap(), "--supply", "2,2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for line in text.lines().skip(1) {
        let p: f64 = line.split('\t').nth(1).unwrap().parse().unwrap();
        assert!((p - 0.5).abs() < 1e-6, "{line}");
    }
}

#[test]
fn runs_are_byte_for_byte_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small_run(a.path());
    small_run(b.path());
    for f in ["trace.csv", "manifest.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn trace_and_manifest_in_separate_directories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("ogd_static.json");
    let o = run(
        dir.path(),
        &[
            "run",
            cfg.to_str().unwrap(),
            "--set",
            "horizon=25",
            "--set",
            "output.trace=traces/t.csv",
            "--set",
            "output.manifest=meta/m.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = dir.path().join("meta/m.json");
    let o = run(dir.path(), &["check", m.to_str().unwrap(), "consistency"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn example_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../examples/configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = std::fs::read_to_string(&path).unwrap();
            pricing_core::sim::ScenarioConfig::from_json(&text)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 3);
}
