use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn filament(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_filament"))
        .args(args)
        .arg("--output")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn omega2_table_row_at_one() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("o2");
    let o = filament(&["omega2", "--omega", "1"], &dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rows = csv::Reader::from_path(dir.join("omega2.csv")).unwrap();
    let row: Vec<f64> = rows.records().next().unwrap().unwrap().iter().map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 1.0);
    assert!((row[1] - 0.962250).abs() < 1e-6);
    assert!((row[1] - row[2]).abs() <= 1e-10);
}

#[test]
fn manifest_lists_every_artifact_with_the_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("config");
    let o = filament(&["spectrum", "--omega", "1.4142135623730951", "--radius", "16"], &dir);
    assert!(o.status.success());
    let m = manifest(&dir);
    let hash = m["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    let artifacts = m["artifacts"].as_array().unwrap();
    let names: Vec<&str> = artifacts.iter().map(|a| a["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["spectrum.csv", "kernel.json"]);
    for a in artifacts {
        assert_eq!(a["config_hash"], hash);
        assert!(dir.join(a["path"].as_str().unwrap()).exists());
    }
    assert_eq!(m["modules"].as_array().unwrap().len(), 7);
    let kernel: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("kernel.json")).unwrap()).unwrap();
    assert_eq!(kernel["kernel"], serde_json::json!([{ "j": 1, "k": 1, "l": -1 }]));
}

#[test]
fn identical_configs_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        let o = filament(&["classify", "--omega", "1.618", "--radius", "64", "--d0", "0.1"], &dir);
        assert!(o.status.success());
        dir
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["classification.json", "singular.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_and_flags_combine() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{"omega_table": [0.5, 1.0, 2.0]}"#).unwrap();
    let dir = tmp.path().join("table");
    let o = Command::new(env!("CARGO_BIN_EXE_filament"))
        .args(["omega2", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    let rows = csv::Reader::from_path(dir.join("omega2.csv")).unwrap().into_records().count();
    assert_eq!(rows, 3);
}

#[test]
fn output_root_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_filament"))
        .args(["omega2", "--omega", "2"])
        .env("FILAMENT_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let runs: Vec<_> = fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(runs.len(), 1);
    assert!(runs[0].to_string_lossy().starts_with("omega2-"));
}

#[test]
fn exit_codes_distinguish_outcomes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = filament(&["spectrum", "--omega", "-1"], &tmp.path().join("bad"));
    assert_eq!(bad.status.code(), Some(4));
    let missing = filament(&["omega2", "--config", "/nonexistent.json"], &tmp.path().join("missing"));
    assert_eq!(missing.status.code(), Some(4));
    let unknown = filament(&["omega2", "--no-such-flag"], &tmp.path().join("unknown"));
    assert_eq!(unknown.status.code(), Some(4));
    // the (15,5) resonance sits on the ω = 1 branch near r = 0.01
    let dir = tmp.path().join("excised");
    let excised = filament(&["branch", "--omega", "1", "--rmin", "0.01", "--rmax", "0.01", "--points", "1"], &dir);
    assert_eq!(excised.status.code(), Some(2));
    assert_eq!(manifest(&dir)["status"], "excised");
    // an amplitude this large leaves the convergent regime of the nonlinearity
    let dir = tmp.path().join("window");
    let far = filament(&["branch", "--omega", "1.4142135623730951", "--rmin", "0.3", "--rmax", "0.3", "--points", "1"], &dir);
    assert_eq!(far.status.code(), Some(3), "{}", String::from_utf8_lossy(&far.stderr));
}

#[test]
fn standing_wave_simulation_returns() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sim");
    let o = filament(&["simulate", "--scenario", "two-filament-standing", "--r", "0.02"], &dir);
    assert!(o.status.success());
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("simulate.json")).unwrap()).unwrap();
    assert!(s["periodicity_defect"].as_f64().unwrap() <= 1e-4);
    assert!(s["energy_drift"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn branch_orbits_and_traveling_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("branch");
    let o = filament(&["branch", "--omega", "1.4142135", "--rmax", "0.05"], &dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rows = csv::Reader::from_path(dir.join("branch.csv")).unwrap();
    let first = rows.records().next().unwrap().unwrap();
    let w0 = (1.0 + 2.0 * 1.4142135f64).sqrt();
    assert_eq!(first[0].parse::<f64>().unwrap(), 0.0);
    assert!((first[1].parse::<f64>().unwrap() - w0).abs() < 1e-15);
    let b: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("branch.json")).unwrap()).unwrap();
    let fitted = b["fitted_curvature"].as_f64().unwrap();
    let exact = b["closed_form_curvature"].as_f64().unwrap();
    assert!(((fitted - exact) / exact).abs() < 0.01, "{fitted} vs {exact}");

    let dir = tmp.path().join("orbits");
    assert!(filament(&["orbits"], &dir).status.success());
    let o: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("orbits.json")).unwrap()).unwrap();
    assert!(o["energy_drift"].as_f64().unwrap() <= 1e-10);
    assert!(o["helices"][0]["potential_derivative"].as_f64().unwrap().abs() <= 1e-12);

    let dir = tmp.path().join("traveling");
    assert!(filament(&["traveling", "--omega", "1.4142135623730951"], &dir).status.success());
    let rows = csv::Reader::from_path(dir.join("traveling.csv")).unwrap().into_records().count();
    assert_eq!(rows, 11);
}
