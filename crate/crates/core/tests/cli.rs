use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_nmisc");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("NMISC_CONFIG")
        .current_dir(dir)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_at_zero_bias() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["solve", "--vgate", "0"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&dir.path().join("out/solve_summary.json"));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["converged"], true);
    assert_eq!(v["electron_count"].as_f64().unwrap(), 0.0);
    assert_eq!(v["electron_sheet_density_max_cm2"].as_f64().unwrap(), 0.0);
    let csv_name = v["band_profile_csv"].as_str().unwrap();
    let text = std::fs::read_to_string(dir.path().join("out").join(csv_name)).unwrap();
    assert!(text.starts_with("r_nm,z_nm,V_volts,Ec_eV,Ev_eV,n_e_cm2,p_cm2\n"));
}

#[test]
fn missing_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["solve", "nope.toml", "--vgate", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toml"));
    let env = Command::new(BIN)
        .args(["zeeman", "--no-dot"])
        .env("NMISC_CONFIG", "also-missing.toml")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(2));
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "output_dir = \"results\"\n[zeeman]\ng_electron = -2.0\n",
    )
    .unwrap();
    let out = Command::new(BIN)
        .args(["zeeman", "--field-t", "5", "--no-dot"])
        .env("NMISC_CONFIG", "run.toml")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("results/zeeman.json"));
    let s = v["electron_splitting_meV"].as_f64().unwrap();
    assert!((s - 2.0 * 0.057883818060 * 5.0).abs() < 1e-9);
}

#[test]
fn sweep_validation_and_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let bad = run(
        dir.path(),
        &["sweep", "--from", "3.0", "--to", "2.0", "--steps", "5"],
    );
    assert_eq!(bad.status.code(), Some(2));

    let one = run(
        dir.path(),
        &["sweep", "--from", "2.5", "--to", "2.5", "--steps", "1"],
    );
    assert_eq!(one.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "vgate_V",
            "min_Ec_meV",
            "hbar_omega0_meV",
            "ground_state_meV",
            "n_electrons_estimate",
            "status"
        ]
    );
    let row = rdr.records().next().unwrap().unwrap();
    let min_ec: f64 = row[1].parse().unwrap();
    assert_eq!(&row[5], "ok");

    let solve = run(dir.path(), &["solve", "--vgate", "2.5"]);
    assert_eq!(solve.status.code(), Some(0));
    let v = json(&dir.path().join("out/solve_summary.json"));
    assert!((v["min_Ec_meV"].as_f64().unwrap() - min_ec).abs() < 1e-9);
}

#[test]
fn default_sweep_has_one_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["sweep", "--from-v", "2.0", "--to-v", "3.2", "--steps", "13"],
    );
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("out/sweep.csv")).unwrap();
    let ec: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    assert_eq!(ec.len(), 13);
    assert!(ec.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(
        ec.windows(2).filter(|w| w[0] > 0.0 && w[1] <= 0.0).count(),
        1
    );
}

#[test]
fn characterize_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["characterize"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("out/dot_report.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let align = v["v_align_V"].as_f64().unwrap();
    assert!(v["v_onset_V"].as_f64().unwrap() > align);
    assert!(v["hbar_omega0_meV"].as_f64().unwrap() > 0.0);
    let lever = v["lever_arm"].as_f64().unwrap();
    assert!((3.5..=7.0).contains(&lever));
    assert!(v["errors"].as_object().unwrap().is_empty());
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(again, v);

    let solve = run(dir.path(), &["solve", "--vgate", &format!("{align}")]);
    assert_eq!(solve.status.code(), Some(0));
    let s = json(&dir.path().join("out/solve_summary.json"));
    assert!(s["min_Ec_meV"].as_f64().unwrap().abs() < 0.05);
}

#[test]
fn bracket_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "[search]\nbracket_v = [0.0, 1.0]\n",
    )
    .unwrap();
    let out = run(dir.path(), &["characterize", "run.toml"]);
    assert_eq!(out.status.code(), Some(4));
    let v = json(&dir.path().join("out/dot_report.json"));
    assert!(v["v_align_V"].is_null());
    assert!(v["errors"]["v_align"].is_string());
}

#[test]
fn cycle_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(
        dir.path(),
        &["cycle", "--pulses", "20000", "--seed", "9", "--events"],
    );
    assert_eq!(a.status.code(), Some(0));
    let first = std::fs::read(dir.path().join("out/cycle_stats.json")).unwrap();
    let events = std::fs::read_to_string(dir.path().join("out/cycle_events.csv")).unwrap();
    assert_eq!(events.lines().count(), 20_001);
    let b = run(dir.path(), &["cycle", "--pulses", "20000", "--seed", "9"]);
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(
        first,
        std::fs::read(dir.path().join("out/cycle_stats.json")).unwrap()
    );
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert!((v["repetition_rate_MHz"].as_f64().unwrap() - 49.75).abs() < 5e-3);
    assert_eq!(v["p_multi"].as_f64().unwrap(), 0.0);
    assert!(v["analytic_efficiency"].is_number());

    let one = run(dir.path(), &["cycle", "--pulses", "1", "--seed", "3"]);
    let x = std::fs::read(dir.path().join("out/cycle_stats.json")).unwrap();
    run(dir.path(), &["cycle", "--pulses", "1", "--seed", "3"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(
        x,
        std::fs::read(dir.path().join("out/cycle_stats.json")).unwrap()
    );
    assert_eq!(
        run(dir.path(), &["cycle", "--pulses", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn zeeman_table() {
    let dir = tempfile::tempdir().unwrap();
    for (field, expected) in [("5", 0.868), ("0", 0.0)] {
        let out = run(dir.path(), &["zeeman", "--field", field, "--no-dot"]);
        assert_eq!(out.status.code(), Some(0));
        let v = json(&dir.path().join("out/zeeman.json"));
        assert!((v["electron_splitting_meV"].as_f64().unwrap() - expected).abs() < 0.005);
        let t = v["transitions"].as_array().unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(
            t.iter()
                .filter(|r| r["polarization"] == "forbidden")
                .count(),
            2
        );
        assert!(v["g_hole_note"].is_string());
    }
    let with_dot = run(dir.path(), &["zeeman"]);
    assert_eq!(with_dot.status.code(), Some(0));
    let v = json(&dir.path().join("out/zeeman.json"));
    assert!(v["photon_energy_estimate_meV"].as_f64().unwrap() > 750.0);
}
