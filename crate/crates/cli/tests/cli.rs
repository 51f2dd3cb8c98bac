use std::path::Path;
use std::process::{Command, Output};

use predwave::cartography::read_sweep_csv;
use predwave::io::{from_csv, RunManifest};
use predwave::ode::SteadyState;
use predwave::pde::{OutcomeReport, Regime};
use predwave::waves::ThresholdSet;

fn predwave(dir: &Path, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_predwave"));
    cmd.current_dir(dir).args(args);
    for (k, _) in std::env::vars() {
        if k.starts_with("PREDWAVE_") {
            cmd.env_remove(k);
        }
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn thresholds_json_and_csv_agree() {
    let dir = tempfile::tempdir().unwrap();
    let json = predwave(dir.path(), &["thresholds", "--E", "2", "--alpha", "2"]);
    assert_eq!(json.status.code(), Some(0));
    let from_json: ThresholdSet = serde_json::from_str(&stdout(&json)).unwrap();
    assert!((from_json.h_star - 4.3866).abs() < 1e-3);
    assert!(dir.path().join("predwave-out/thresholds.json").exists());
    assert!(dir.path().join("predwave-out/thresholds.manifest.json").exists());

    let csv = predwave(dir.path(), &["thresholds", "--E", "2", "--alpha", "2", "--format", "csv"]);
    let from_csv: Vec<ThresholdSet> = from_csv(&stdout(&csv)).unwrap();
    assert_eq!(from_csv, vec![from_json]);
}

#[test]
fn unstable_control_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = predwave(dir.path(), &["thresholds", "--E", "0.5", "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("E = 0.5 <= 1"), "{err}");
}

#[test]
fn invalid_and_missing_parameters_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = predwave(dir.path(), &["steady", "--E", "2", "--h", "-1", "--alpha", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`h`"));
    let o = predwave(dir.path(), &["steady", "--E", "2", "--alpha", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing required parameter `h`"));
    let o = predwave(dir.path(), &["simulate", "--E", "2", "--h", "5", "--alpha", "2", "--x0", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = predwave(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn steady_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = predwave(dir.path(), &["steady", "--E", "2", "--h", "5", "--alpha", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let states: Vec<SteadyState> = from_csv(&stdout(&o)).unwrap();
    assert_eq!(states.len(), 5);
    let json = predwave(dir.path(), &["steady", "--E", "2", "--h", "5", "--alpha", "2"]);
    let from_json: Vec<SteadyState> = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(states, from_json);
}

#[test]
fn flags_beat_environment_beat_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "E = 3.0\nalpha = 1.0\nformat = \"json\"\n").unwrap();
    let h_star = |o: &Output| serde_json::from_str::<ThresholdSet>(&stdout(o)).unwrap();

    let file_only = predwave(dir.path(), &["thresholds", "--config", "run.toml"]);
    assert_eq!((h_star(&file_only).e, h_star(&file_only).alpha), (3.0, 1.0));

    let mut cmd = Command::new(env!("CARGO_BIN_EXE_predwave"));
    let env_wins = cmd
        .current_dir(dir.path())
        .env("PREDWAVE_E", "4")
        .args(["thresholds", "--config", "run.toml"])
        .output()
        .unwrap();
    assert_eq!(h_star(&env_wins).e, 4.0);

    let mut cmd = Command::new(env!("CARGO_BIN_EXE_predwave"));
    let flag_wins = cmd
        .current_dir(dir.path())
        .env("PREDWAVE_E", "4")
        .args(["thresholds", "--config", "run.toml", "--E", "5"])
        .output()
        .unwrap();
    assert_eq!(h_star(&flag_wins).e, 5.0);
    assert_eq!(h_star(&flag_wins).alpha, 1.0);
}

#[test]
fn ode_reports_the_attractor() {
    let dir = tempfile::tempdir().unwrap();
    let o = predwave(dir.path(), &["ode", "--E", "2", "--h", "5", "--alpha", "2", "--u0", "0.9"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["u_final"].as_f64().unwrap() - 0.6328).abs() < 1e-3);
    assert_eq!(v["settled"], true);
    assert!(dir.path().join("predwave-out/trajectory.csv").exists());
}

#[test]
fn short_simulation_is_undetermined_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--E", "2", "--h", "5.6", "--alpha", "4", "--L", "100", "--nx", "256", "--t-end", "20",
        "--snapshots", "0,10", "--out", "run",
    ];
    let o = predwave(dir.path(), &args);
    let report: OutcomeReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.regime, Regime::Undetermined);
    assert_eq!(o.status.code(), Some(3));
    for f in ["final.csv", "front.csv", "snapshot_t0.csv", "snapshot_t10.csv", "report.json"] {
        assert!(dir.path().join("run").join(f).exists(), "{f}");
    }
    let manifest =
        RunManifest::from_json(&std::fs::read_to_string(dir.path().join("run/simulate.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest.determinism_hash.as_ref().unwrap().len(), 64);

    let replay = predwave(dir.path(), &["replay", "run/simulate.manifest.json", "--out", "again"]);
    assert_eq!(replay.status.code(), Some(3), "{}", String::from_utf8_lossy(&replay.stderr));
    assert!(String::from_utf8_lossy(&replay.stderr).contains("reproduced exactly"));
    let again =
        RunManifest::from_json(&std::fs::read_to_string(dir.path().join("again/simulate.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(again.determinism_hash, manifest.determinism_hash);
    assert_eq!(again.output_hashes, manifest.output_hashes);
}

#[test]
fn pulse_cell_is_reported_as_pulse() {
    let dir = tempfile::tempdir().unwrap();
    let o = predwave(
        dir.path(),
        &["simulate", "--E", "2", "--h", "5.35", "--alpha", "4", "--r", "0.01", "--d", "1", "--format", "csv"],
    );
    assert_eq!(o.status.code(), Some(0));
    let reports: Vec<OutcomeReport> = from_csv(&stdout(&o)).unwrap();
    assert_eq!(reports[0].regime, Regime::Pulse);
}

#[test]
fn classify_and_sweep_write_the_fixed_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = predwave(
        dir.path(),
        &["classify", "--E", "2", "--h", "2.5", "--alpha", "4", "--L", "100", "--nx", "256", "--format", "csv"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_sweep_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(rows[0].zone.as_str(), "uniform_extinction");
    assert_eq!(rows[0].regime, Some(Regime::UniformDecay));

    let o = predwave(
        dir.path(),
        &[
            "sweep", "--alpha", "4", "--E-min", "0.5", "--E-max", "3", "--E-steps", "3", "--h-min", "1", "--h-max",
            "2", "--h-steps", "2", "--format", "csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("E,h,alpha,r,d,zone,outcome,regime,front_speed,h1,h_star,h_minus,h_plus\n"));
    assert_eq!(read_sweep_csv(text.as_bytes()).unwrap().len(), 6);
}
