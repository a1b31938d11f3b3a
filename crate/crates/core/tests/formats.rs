mod common;

use std::path::Path;

use num_complex::Complex64;

use nls_threshold::diagnostics::{classify, Thresholds};
use nls_threshold::evolver::{evolve, EvolverConfig, TerminationRecord};
use nls_threshold::experiments::ScenarioConfig;
use nls_threshold::series::{default_window, export_bundle, import_bundle, pz_coefficients, residual_rate, NearSolution};
use nls_threshold::spectrum::{build_blocks, eigen_residual, export_eigenpair, ground_mode, import_eigenpair, EigenOptions};
use nls_threshold::{Error, RadialField, RadialGrid, RadialProblem};

fn first_lines(path: &Path, n: usize) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().take(n).map(String::from).collect()
}

#[test]
fn field_csv_round_trip_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let grid = RadialGrid::new(7, 12.5, 40).unwrap();
    let u = RadialField::from_fn(&grid, |r| Complex64::new(r.cos(), (0.3 * r).sin() / 3.0));
    let path = dir.path().join("u.csv");
    u.write_csv(&path).unwrap();
    let head = first_lines(&path, 2);
    assert!(head[0].contains("d=7") && head[0].contains("r_max=12.5") && head[0].contains("n=40"), "{}", head[0]);
    assert_eq!(head[1], "r,re,im");
    let back = RadialField::read_csv(&path).unwrap();
    assert_eq!(back, u);
}

#[test]
fn field_csv_rejects_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let grid = RadialGrid::new(6, 10.0, 16).unwrap();
    let path = dir.path().join("u.csv");
    RadialField::zeros(&grid).write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let truncated: String = text.lines().take(10).collect::<Vec<_>>().join("\n");
    std::fs::write(&path, truncated).unwrap();
    assert!(matches!(RadialField::read_csv(&path), Err(Error::Format { .. })));
}

#[test]
fn eigen_sidecar_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = RadialProblem::discrete(6, 30.0, 600).unwrap();
    let b = build_blocks(&p);
    let pair = ground_mode(&p, &b, &EigenOptions::default()).unwrap();
    let res = eigen_residual(&b, &pair).unwrap();
    let (csv, json) = (dir.path().join("y.csv"), dir.path().join("y.json"));
    export_eigenpair(&pair, res, &p.grid, &csv, &json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    for key in ["d", "r_max", "n", "e0", "residual", "normalization"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let (back, side) = import_eigenpair(&csv, &json).unwrap();
    assert_eq!(back, pair);
    assert_eq!(side.e0, pair.e0);
}

#[test]
fn bundle_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = RadialProblem::discrete(6, 30.0, 600).unwrap();
    let b = build_blocks(&p);
    let pair = ground_mode(&p, &b, &EigenOptions::default()).unwrap();
    let table = pz_coefficients(2.0, 6).unwrap();
    let near = NearSolution::build(&b, &pair, &p.grid, &table, 3, -1.0).unwrap();
    let t_k = near.validity_time(0.5).unwrap();
    let win = default_window(&near, &p.laplacian, &p.grid, t_k).unwrap();
    let rep = residual_rate(&near, &p.laplacian, &p.grid, win, 11, 2).unwrap();
    let manifest = export_bundle(&near, &rep, t_k, dir.path()).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    for key in ["d", "k", "a", "e0", "t_k", "residual_report"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let (back, profiles) = import_bundle(dir.path()).unwrap();
    assert_eq!(back, manifest);
    assert_eq!(profiles.len(), 3);
    for (j, f) in profiles.iter().enumerate() {
        assert_eq!(f, near.profile(j + 1).unwrap());
    }
}

#[test]
fn trace_and_report_formats() {
    let dir = tempfile::tempdir().unwrap();
    let p = RadialProblem::discrete(6, 20.0, 400).unwrap();
    let u0 = p.ground.field(&p.grid).scale(0.8.into());
    let tr = evolve(&p, &u0, [0.0, 2.0], &EvolverConfig::default()).unwrap();
    let (csv, json) = (dir.path().join("t.csv"), dir.path().join("t.json"));
    tr.export(&csv, &json).unwrap();
    assert_eq!(first_lines(&csv, 1)[0], "t,E,kinetic,max_amp,h1_dist_to_modW,theta_fit,mu_fit");
    let rows = std::fs::read_to_string(&csv).unwrap().lines().count() - 1;
    assert_eq!(rows, tr.samples.len());
    let rec: TerminationRecord = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(rec.termination, tr.termination);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(v["termination"]["status"], "completed");

    let report = classify(&tr, &Thresholds::default()).unwrap();
    let v = serde_json::to_value(&report).unwrap();
    for key in ["regime", "kinetic_side", "rate", "theta", "mu", "windows", "thresholds"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn config_errors_name_the_field() {
    let bad = r#"{"schema": "nls-threshold/scenario-v1", "scenario": "spectrum", "grid": {"n": "many"}}"#;
    match ScenarioConfig::from_json(bad) {
        Err(Error::Config { path, .. }) => assert_eq!(path, "grid.n"),
        other => panic!("expected config error, got {other:?}"),
    }
    let unknown = r#"{"schema": "nls-threshold/scenario-v1", "scenario": "spectrum", "grid": {"dd": 6}}"#;
    assert!(matches!(ScenarioConfig::from_json(unknown), Err(Error::Config { .. })));
    let wrong_schema = r#"{"schema": "other/v9", "scenario": "spectrum"}"#;
    assert!(ScenarioConfig::from_json(wrong_schema).and_then(|c| c.validate()).is_err());
}

#[test]
fn minimal_config_fills_defaults() {
    let text = r#"{
      "schema": "nls-threshold/scenario-v1",
      "scenario": "evolve-near-solution",
      "grid": { "d": 6, "r_max": 60.0, "n": 6000 },
      "wpm": { "sign": 1 }
    }"#;
    let c = ScenarioConfig::from_json(text).unwrap();
    assert_eq!(c.wpm.sign, 1);
    assert_eq!(c.series, ScenarioConfig::new(c.scenario).series);
}
