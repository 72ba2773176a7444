//! End-to-end checks of the `spikemesh` binary: exit codes, file outputs,
//! and the text surfaces (capacity JSON, routing-table dump).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spikemesh"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spikemesh-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn config_path(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn write_small_inputs(dir: &Path) -> (String, String) {
    let sys = dir.join("sys.json");
    std::fs::write(
        &sys,
        r#"{"mesh":{"width":2,"height":1},"cores_per_chip":2,
            "perf_levels":[{"mhz":100,"volts":0.5},{"mhz":200,"volts":0.6}],
            "max_neurons_per_core":16,"seed":7}"#,
    )
    .unwrap();
    let net = dir.join("net.json");
    std::fs::write(
        &net,
        r#"{"populations":[{"name":"a","size":16},{"name":"b","size":16}],
            "projections":[{"source":"a","target":"b",
                            "connectivity":{"p":0.5},"weight":0.3}],
            "stimuli":[{"target":"a","rate_hz":500.0}]}"#,
    )
    .unwrap();
    (
        sys.to_str().unwrap().to_string(),
        net.to_str().unwrap().to_string(),
    )
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn run_writes_reports_and_csvs() {
    let dir = workdir("run");
    let (sys, net) = write_small_inputs(&dir);
    let out = dir.join("report.json");
    let csv = dir.join("series.csv");
    let raster = dir.join("raster.csv");
    run_ok(bin().args([
        "run",
        "--system",
        &sys,
        "--network",
        &net,
        "--steps",
        "50",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--raster",
        raster.to_str().unwrap(),
    ]));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["timesteps"], 50);
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(csv_text.lines().count(), 51); // header + one row per step
    assert!(std::fs::read_to_string(&raster)
        .unwrap()
        .starts_with("t,key\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_required_flag_exits_one_with_usage() {
    let out = bin().args(["run", "--system", "x.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.to_lowercase().contains("usage"), "{stderr}");
}

#[test]
fn zero_steps_is_a_valid_boundary() {
    let dir = workdir("zero");
    let (sys, net) = write_small_inputs(&dir);
    let out = dir.join("report.json");
    run_ok(bin().args([
        "run",
        "--system",
        &sys,
        "--network",
        &net,
        "--steps",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["timesteps"], 0);
    assert_eq!(report["totals"]["total"]["pj"], "0");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn validation_failure_exits_one_and_writes_nothing() {
    let dir = workdir("badnet");
    let (sys, _) = write_small_inputs(&dir);
    let net = dir.join("bad.json");
    std::fs::write(
        &net,
        r#"{"populations":[{"name":"a","size":4}],
            "projections":[{"source":"a","target":"missing",
                            "connectivity":{"p":1.0},"weight":0.1}]}"#,
    )
    .unwrap();
    let out = dir.join("report.json");
    let result = bin()
        .args([
            "run",
            "--system",
            &sys,
            "--network",
            net.to_str().unwrap(),
            "--steps",
            "5",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("missing"));
    assert!(!out.exists(), "failed run must not leave partial output");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn capacity_reports_the_shipped_ratios() {
    let out = run_ok(bin().args([
        "capacity",
        &config_path("gen1.json"),
        &config_path("gen2.json"),
    ]));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["core_ratio"], 10.0);
    assert_eq!(report["per_core_throughput_ratio"], 5.0);
    assert_eq!(report["capacity_ratio"], 50.0);
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("x50"), "human summary missing: {summary}");
}

#[test]
fn capacity_of_identical_configs_is_unity() {
    let path = config_path("gen1.json");
    let out = run_ok(bin().args(["capacity", &path, &path]));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["core_ratio"], 1.0);
    assert_eq!(report["capacity_ratio"], 1.0);
}

#[test]
fn capacity_names_the_malformed_file() {
    let dir = workdir("badcap");
    let bad = dir.join("broken.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = bin()
        .args(["capacity", &config_path("gen1.json"), bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn validate_reports_ok_and_rejects_bad_geometry() {
    let dir = workdir("validate");
    let (sys, net) = write_small_inputs(&dir);
    run_ok(bin().args(["validate", "--system", &sys, "--network", &net]));
    let bad = dir.join("bad_sys.json");
    std::fs::write(
        &bad,
        r#"{"mesh":{"width":0,"height":1},"cores_per_chip":1,
            "perf_levels":[{"mhz":100,"volts":0.5}]}"#,
    )
    .unwrap();
    let out = bin()
        .args(["validate", "--system", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn dump_tables_emits_the_documented_line_format() {
    let dir = workdir("dump");
    let (sys, net) = write_small_inputs(&dir);
    let out = run_ok(bin().args(["dump-tables", "--system", &sys, "--network", &net]));
    let text = String::from_utf8_lossy(&out.stdout);
    let first = text.lines().next().unwrap();
    assert!(
        first.starts_with("chip=(") && first.contains(" key=0x") && first.contains(" route=["),
        "unexpected dump line: {first}"
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn seed_override_changes_the_digest() {
    let dir = workdir("seed");
    let (sys, net) = write_small_inputs(&dir);
    let digest_for = |seed: Option<&str>| {
        let out = dir.join("r.json");
        let mut args = vec![
            "run".to_string(),
            "--system".into(),
            sys.clone(),
            "--network".into(),
            net.clone(),
            "--steps".into(),
            "3".into(),
            "--out".into(),
            out.to_str().unwrap().to_string(),
        ];
        if let Some(s) = seed {
            args.push("--seed".into());
            args.push(s.into());
        }
        run_ok(bin().args(&args));
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        report["config_digest"].as_str().unwrap().to_string()
    };
    let base = digest_for(None);
    let same = digest_for(None);
    let reseeded = digest_for(Some("123"));
    assert_eq!(base, same);
    assert_ne!(base, reseeded);
    std::fs::remove_dir_all(&dir).unwrap();
}
