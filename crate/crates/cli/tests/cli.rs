use std::path::Path;
use std::process::{Command, Output};

fn hapsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hapsim"))
        .args(args)
        .env_remove("HAPSIM_CONFIG")
        .env_remove("HAPSIM_SEED")
        .env_remove("HAPSIM_TRIALS")
        .env_remove("HAPSIM_THREADS")
        .output()
        .expect("spawn hapsim")
}

fn small_scenario(dir: &Path) -> String {
    let p = dir.join("scen.csv");
    let s = p.to_str().unwrap().to_string();
    let out = hapsim(&["scenario", "--out", &s, "--n-bases", "60", "--m-targets", "40"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    s
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn scenario_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    assert!(dir.path().join("scen.json").exists());
    let csv = std::fs::read_to_string(&s).unwrap();
    assert!(csv.starts_with("bs_id,hour,rate_mbps"));
    assert_eq!(csv.lines().count(), 1 + 40 * 168);
}

#[test]
fn scenario_rejects_zero_targets() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.csv");
    let out = hapsim(&["scenario", "--out", p.to_str().unwrap(), "--m-targets", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let out_dir = dir.path().join("out");
    let o = hapsim(&["run", "--scenario", &s, "--out", out_dir.to_str().unwrap(), "--trials", "4", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "figure2_sorted_savings.csv",
        "figure3_parametric.csv",
        "figure4_5_hourly.csv",
        "hourly_summary.csv",
        "trials.csv",
        "manifest.json",
    ] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let curves = std::fs::read_to_string(out_dir.join("figure2_sorted_savings.csv")).unwrap();
    assert_eq!(curves.lines().next().unwrap(), "rank,week,night,weekday,weekend");
    assert_eq!(curves.lines().count(), 5);
    let hourly = std::fs::read_to_string(out_dir.join("figure4_5_hourly.csv")).unwrap();
    assert_eq!(hourly.lines().count(), 1 + 4 * 168);

    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["master_seed"], 3);
    assert_eq!(m["n_trials"], 4);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["scenario_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["config"]["study"]["n_trials"], 4);
}

#[test]
fn run_is_seed_sensitive_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let trials = |seed: &str, name: &str| {
        let d = dir.path().join(name);
        let o = hapsim(&["run", "--scenario", &s, "--out", d.to_str().unwrap(), "--trials", "3", "--seed", seed]);
        assert!(o.status.success());
        std::fs::read(d.join("trials.csv")).unwrap()
    };
    let a = trials("5", "a");
    assert_eq!(a, trials("5", "b"));
    assert_ne!(a, trials("6", "c"));
}

#[test]
fn run_without_scenario_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = hapsim(&["run", "--scenario", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupt_scenario_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    std::fs::write(&s, "bs_id,hour,rate_mbps\n0,0,-1\n").unwrap();
    let o = hapsim(&["run", "--scenario", &s, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_config_file_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[study]\nno_such_key = 1\n").unwrap();
    let o = hapsim(&["--config", cfg.to_str().unwrap(), "scenario", "--out", dir.path().join("s.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[study]\nn_trials = 2\nmaster_seed = 9\nelevation_set = [90.0]\n").unwrap();
    let out_dir = dir.path().join("out");
    let o = hapsim(&["--config", cfg.to_str().unwrap(), "run", "--scenario", &s, "--out", out_dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trials = std::fs::read_to_string(out_dir.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 3);
    assert!(trials.lines().skip(1).all(|l| l.split(',').nth(1) == Some("90")));
}

#[test]
fn capacity_override_forces_zero_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[study]\ncapacity_override_mbps = 0.0\n").unwrap();
    let o = hapsim(&[
        "--config", cfg.to_str().unwrap(), "trial", "--scenario", &s, "--elevation", "90", "--indoor", "0.7",
        "--traditional", "0.5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("c_haps_mbps 0\n"));
    assert!(text.contains("saving_week 0\n"));
}

#[test]
fn trial_prints_metrics_and_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let sched = dir.path().join("sched.csv");
    let o = hapsim(&[
        "trial", "--scenario", &s, "--elevation", "80", "--indoor", "0.6", "--traditional", "0.7", "--seed", "4",
        "--schedule-out", sched.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for key in ["c_haps_mbps", "saving_week", "saving_night", "saving_weekday", "saving_weekend"] {
        assert!(text.contains(key), "missing {key}");
    }
    let rows = std::fs::read_to_string(&sched).unwrap();
    assert_eq!(rows.lines().next().unwrap(), "hour,bs_id,active,energy");
    assert_eq!(rows.lines().count(), 1 + 168 * 40);

    let j = hapsim(&[
        "trial", "--scenario", &s, "--elevation", "80", "--indoor", "0.6", "--traditional", "0.7", "--seed", "4",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(v["elevation_deg"], 80.0);
    assert_eq!(v["energy_per_hour"].as_array().unwrap().len(), 168);
}

#[test]
fn trial_validates_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let run = |e: &str, i: &str, t: &str| {
        hapsim(&["trial", "--scenario", &s, "--elevation", e, "--indoor", i, "--traditional", t]).status.code()
    };
    assert_eq!(run("75", "0.7", "0.5"), Some(2));
    assert_eq!(run("70", "0.95", "0.5"), Some(2));
    assert_eq!(run("70", "0.7", "0.2"), Some(2));
    // range ends are inclusive
    assert_eq!(run("60", "0.6", "0.7"), Some(0));
}

#[test]
fn loss_switches_raise_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let cap = |extra: &[&str]| {
        let mut args = extra.to_vec();
        args.extend(["trial", "--scenario", &s, "--elevation", "70", "--indoor", "0.8", "--traditional", "0.5", "--json"]);
        let v: serde_json::Value = serde_json::from_slice(&hapsim(&args).stdout).unwrap();
        v["c_haps"].as_f64().unwrap()
    };
    assert!(cap(&["--no-bel"]) > cap(&[]));
}

#[test]
fn unreadable_channel_tables_fail() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let o = hapsim(&[
        "--channel-tables", dir.path().join("missing.json").to_str().unwrap(), "trial", "--scenario", &s,
        "--elevation", "70", "--indoor", "0.7", "--traditional", "0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
