use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lanchester::RunSummary;

const BIN: &str = env!("CARGO_BIN_EXE_lanchester");

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("LANCHESTER_OUT")
        .env_remove("LANCHESTER_WORKERS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn summary(dir: &Path) -> RunSummary {
    RunSummary::read(&dir.join("summary.json")).unwrap()
}

fn small_network(dir: &Path) -> PathBuf {
    let path = dir.join("small.toml");
    fs::write(
        &path,
        "seed = 4\n[battle]\nkappa_red = 0.5\nt_max = 20.0\n[network]\nn = 6\nl_manoeuvre = 6\nl_engage = 3\n[optimizer]\nlambda = 0.5\niterations = 15\n",
    )
    .unwrap();
    path
}

#[test]
fn casestudy_flips_between_nearby_kill_rates() {
    let dir = tempfile::tempdir().unwrap();
    let red = dir.path().join("red");
    ok(&[
        "casestudy",
        "--case",
        "3",
        "--f-r",
        "0.8",
        "--kappa-r",
        "0.92",
        "--out",
        red.to_str().unwrap(),
    ]);
    let s = summary(&red);
    assert_eq!(s.results["winner"], "red");
    assert_eq!(s.results["termination"], "annihilation_blue");

    let (header, rows) = lanchester::formats::read_trajectory_csv(&red.join("trajectory.csv")).unwrap();
    assert_eq!(header, ["time", "B_1", "B_2", "R_1", "R_2", "R_3", "R_4"]);
    assert_eq!(rows[0], [0.0, 0.5, 0.5, 0.4, 0.4, 0.4, 0.4]);
    let last = rows.last().unwrap();
    assert!(last[1] + last[2] < 2e-3);
    assert!(last[3..].iter().sum::<f64>() > 0.1);

    let blue = dir.path().join("blue");
    ok(&[
        "casestudy",
        "--case",
        "3",
        "--f-r",
        "0.8",
        "--kappa-r",
        "0.91",
        "--out",
        blue.to_str().unwrap(),
    ]);
    assert_eq!(summary(&blue).results["winner"], "blue");
}

#[test]
fn meanfield_reports_the_victory_factor() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["meanfield", "--n", "50", "--out", dir.path().to_str().unwrap()]);
    let s = summary(dir.path());
    assert_eq!(s.results["victory_factor"], 13.005);
    assert_eq!(s.results["exhaustive_best"]["n1"], 25);
    assert!(s.results["invariant_max_drift"].as_f64().unwrap() < 1e-8);
    let victory = fs::read_to_string(dir.path().join("victory.csv")).unwrap();
    assert!(victory.lines().any(|l| l.starts_with("50,13.005,")), "{victory}");
    for name in &s.artifacts {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn invalid_configurations_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    fs::write(&empty, "").unwrap();
    let out = run(&[
        "simulate",
        "--config",
        empty.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error[config]"), "{}", stderr(&out));
    assert!(stderr(&out).contains("configuration is empty"));

    let desk = configs_dir().join("desk.toml");
    let out = run(&[
        "optimize",
        "--config",
        desk.to_str().unwrap(),
        "--lambda",
        "1.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lambda must lie in [0, 1]"), "{}", stderr(&out));

    assert_eq!(run(&["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["validate", empty.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn blow_ups_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("huge.toml");
    fs::write(
        &cfg,
        "[battle]\nkappa_red = 1e10\nkappa_blue = 1e10\n[topology]\nn_blue = 1\nn_red = 1\nengagement_edges = [[0, 0]]\n[initial]\nlevel = 1e300\n",
    )
    .unwrap();
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("error[numerical]"));
}

#[test]
fn unwritable_output_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    fs::write(&file, "x").unwrap();
    let out = run(&["meanfield", "--n", "4", "--out", file.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("error[io]"));

    let missing = dir.path().join("missing.toml");
    assert_eq!(
        run(&["simulate", "--config", missing.to_str().unwrap()]).status.code(),
        Some(4)
    );
}

#[test]
fn rerun_reproduces_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_network(dir.path());
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    ok(&[
        "optimize",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        first.to_str().unwrap(),
    ]);
    ok(&[
        "rerun",
        first.join("summary.json").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);

    let (a, b) = (summary(&first), summary(&second));
    assert_eq!(a.config, b.config);
    assert_eq!(a.results, b.results);
    assert_eq!(a.manifest.seed, 4);
    for name in &a.artifacts {
        let x = fs::read(first.join(name)).unwrap();
        let y = fs::read(second.join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
    let trace = fs::read_to_string(first.join("trace.csv")).unwrap();
    assert_eq!(
        trace.lines().next().unwrap(),
        "iteration,utility,blue_mean,red_mean,accepted,l_rb,move"
    );
    assert_eq!(trace.lines().count(), 16);
}

#[test]
fn seed_flag_changes_the_network() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_network(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]);
    ok(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(summary(&b).manifest.seed, 5);
    assert_ne!(
        fs::read(a.join("topology.json")).unwrap(),
        fs::read(b.join("topology.json")).unwrap()
    );
}

#[test]
fn environment_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_env");
    let out = Command::new(BIN)
        .args(["meanfield", "--n", "6", "--format", "json"])
        .env("LANCHESTER_OUT", &target)
        .env("LANCHESTER_WORKERS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let s = summary(&target);
    assert_eq!(s.manifest.workers, 2);
    let rows: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(target.join("victory.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0]["n"], 2);
}

#[test]
fn validate_prints_the_resolved_configuration() {
    let out = ok(&["validate", configs_dir().join("casestudy.toml").to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("eps_delta = 1.0"), "{text}");
    assert!(text.contains("red_wiring"), "{text}");
}
