use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn disint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disint"))
        .args(args)
        .env_remove("DISINT_OUT_DIR")
        .output()
        .unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| {
        panic!(
            "stderr is not JSON: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const REGIME: &str = r#"
name = "small_regime"
seed = 3
horizon = 1000
replications = 4

[model]
kind = "regime_switching"
mu1 = 0.7
lambda1 = 0.3
q = [[0.9, 0.1], [0.2, 0.8]]

[observable]
kind = "indicator"
state = 1.0

[outputs]
paths = 2
"#;

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn list_models_names_every_model() {
    let out = disint(&["list-models"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in disintegration::ModelId::ALL {
        assert!(text.contains(id.as_str()), "{id} missing");
    }
}

#[test]
fn figure1_matches_golden_files() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("fig");
    let out = disint(&["run", "figure1", "--out-dir", dir.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        fs::read_to_string(dir.join("figure.csv")).unwrap(),
        include_str!("golden/figure1.csv")
    );
    assert_eq!(
        fs::read_to_string(dir.join("figure.svg")).unwrap(),
        include_str!("golden/figure1.svg")
    );
    let rows = include_str!("golden/figure1.csv").lines().count() - 1;
    assert_eq!(rows, 21);
}

#[test]
fn figure_command_renders_golden_svg() {
    let tmp = TempDir::new().unwrap();
    let csv = tmp.path().join("figure.csv");
    let svg = tmp.path().join("figure.svg");
    fs::write(&csv, include_str!("golden/figure1.csv")).unwrap();
    let out = disint(&["figure", csv.to_str().unwrap(), svg.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(
        fs::read_to_string(&svg).unwrap(),
        include_str!("golden/figure1.svg")
    );
}

#[test]
fn figure_command_rejects_bad_data() {
    let tmp = TempDir::new().unwrap();
    let csv = tmp.path().join("figure.csv");
    let svg = tmp.path().join("figure.svg");
    fs::write(&csv, "n,theta_n,coin_outcome,running_mean\n").unwrap();
    let out = disint(&["figure", csv.to_str().unwrap(), svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    fs::write(&csv, "n,theta_n\n0,0.5\n").unwrap();
    let out = disint(&["figure", csv.to_str().unwrap(), svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"]
        .as_str()
        .unwrap()
        .contains("coin_outcome"));
}

#[test]
fn runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), REGIME);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = disint(&["run", &config, "--out-dir", dir.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let fa = files(&a);
    assert_eq!(fa, files(&b));
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "effective_config.toml",
            "paths.csv",
            "summary.json",
            "traces.csv"
        ]
    );
    let paths = String::from_utf8(fa[1].1.clone()).unwrap();
    assert_eq!(paths.lines().count(), 1 + 2 * 1000);
}

#[test]
fn seed_flag_changes_the_run() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), REGIME);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    disint(&["run", &config, "--out-dir", a.to_str().unwrap()]);
    disint(&[
        "run",
        &config,
        "--seed",
        "0x99",
        "--reps",
        "2",
        "--out-dir",
        b.to_str().unwrap(),
    ]);
    assert_ne!(
        fs::read(a.join("traces.csv")).unwrap(),
        fs::read(b.join("traces.csv")).unwrap()
    );
    let echo = fs::read_to_string(b.join("effective_config.toml")).unwrap();
    assert!(echo.contains("seed = \"0x99\"") && echo.contains("replications = 2"));
}

#[test]
fn environment_sets_default_output_directory() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), REGIME);
    let target = tmp.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_disint"))
        .args(["run", &config])
        .env("DISINT_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(target.join("traces.csv").exists());
}

#[test]
fn effective_config_round_trips() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), REGIME);
    let first = disint(&["validate", &config]);
    assert!(first.status.success());
    let echoed = write_config(tmp.path(), std::str::from_utf8(&first.stdout).unwrap());
    let second = disint(&["validate", &echoed]);
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.contains("pi = [") && text.contains("checkpoints = [100, 1000]"));
}

#[test]
fn row_sum_violation_exits_with_invariant_code() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        &REGIME.replace("[0.9, 0.1], [0.2, 0.8]", "[0.8, 0.1], [0.2, 0.8]"),
    );
    let out = disint(&[
        "run",
        &config,
        "--out-dir",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "invariant");
    assert!(err["message"].as_str().unwrap().contains("row"), "{err}");
    assert!(
        !tmp.path().join("o").exists(),
        "nothing is written when validation fails"
    );
}

#[test]
fn parse_errors_exit_with_code_2() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "name = \"x\"\nseed = [\n");
    let out = disint(&["validate", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "parse");
    let config = write_config(
        tmp.path(),
        &REGIME.replace("kind = \"regime_switching\"", "kind = \"no_such_model\""),
    );
    assert_eq!(disint(&["validate", &config]).status.code(), Some(2));
}

#[test]
fn missing_config_is_an_io_error() {
    let out = disint(&["run", "/definitely/not/here.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "io");
}

#[test]
fn strict_mode_turns_check_failures_into_exit_4() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
name = "never_met"
seed = 1
horizon = 100
replications = 2

[model]
kind = "exchangeable_bernoulli"

[model.prior]
kind = "point"
p = 0.9

[observable]
kind = "identity"

[concentration]
n = 20
t = 2.0
replications = 10000
"#;
    let config = write_config(tmp.path(), text);
    let dir = tmp.path().join("o");
    let relaxed = disint(&["run", &config, "--out-dir", dir.to_str().unwrap()]);
    assert!(relaxed.status.success());
    let report: Value =
        serde_json::from_slice(&fs::read(dir.join("concentration.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["status"]["reason"], "condition_never_met");
    let strict = disint(&[
        "run",
        &config,
        "--strict",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(strict.status.code(), Some(4));
    assert_eq!(stderr_json(&strict)["error"], "check_failed");
}

#[test]
fn bundled_regime_config_hits_the_ergodic_limit() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("regime");
    let out = disint(&[
        "run",
        "regime_default",
        "--strict",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: Value =
        serde_json::from_slice(&fs::read(dir.join("summary.json")).unwrap()).unwrap();
    let check = &summary["ergodic_limit"];
    assert!((check["target"].as_f64().unwrap() - 17.0 / 30.0).abs() < 1e-15);
    assert!(check["passed"].as_bool().unwrap());
    let last = fs::read_to_string(dir.join("traces.csv")).unwrap();
    let terminal: Vec<f64> = last
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("100000,"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(terminal.len(), 100);
}
