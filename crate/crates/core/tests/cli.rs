use fattail::sim::tasks::{CoeffsConfig, EvolveModeConfig, RatesConfig};
use fattail::sim::{SimConfig, VerifyConfig};
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fattail"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fattail-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn shipped_configs_parse() {
    let read = |n: &str| std::fs::read_to_string(configs().join(n)).unwrap();
    serde_json::from_str::<CoeffsConfig>(&read("coeffs.json")).unwrap();
    serde_json::from_str::<EvolveModeConfig>(&read("evolve_mode.json")).unwrap();
    serde_json::from_str::<RatesConfig>(&read("rates.json")).unwrap();
    VerifyConfig::from_json(&read("verify.json")).unwrap();
    VerifyConfig::from_json(&read("verify_perturbed.json")).unwrap();
    for n in ["simulate_bgk_gamma1.json", "simulate_bgk_gamma4.json", "simulate_critical.json", "simulate_moment_limited.json"] {
        SimConfig::load(configs().join(n)).unwrap();
    }
}

#[test]
fn coeffs_writes_table() {
    let cfg = scratch("coeffs.json");
    std::fs::write(
        &cfg,
        r#"{"params":{"d":1,"gamma":1.0,"operator":{"kind":"Scattering","kernel":"Separable","beta":0.0}},
            "n_velocity":120,"xi_min":0.01,"xi_max":10,"count":4}"#,
    )
    .unwrap();
    let out = bin().arg("coeffs").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("xi,lambda0"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn evolve_mode_writes_entropy_columns() {
    let cfg = scratch("mode.json");
    std::fs::write(
        &cfg,
        r#"{"params":{"d":1,"gamma":1.0,"operator":{"kind":"FokkerPlanck"}},"n_velocity":80,"xi":0.1,
            "velocity":{"kind":"equilibrium"},"time":{"t_min":0.1,"t_max":100,"count":7}}"#,
    )
    .unwrap();
    let csv = scratch("mode.csv");
    let st = bin().arg("evolve-mode").arg(&cfg).arg("-o").arg(&csv).status().unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,norm2,h,r,r_flow,i1"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn rates_lists_predictions() {
    let cfg = scratch("rates.json");
    std::fs::write(
        &cfg,
        r#"{"models":[{"d":1,"gamma":4.0,"operator":{"kind":"Scattering","kernel":"Separable","beta":0.0}}]}"#,
    )
    .unwrap();
    let out = bin().arg("rates").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[4].parse::<f64>().unwrap(), 2.0);
    assert_eq!(row[5].parse::<f64>().unwrap(), 0.5);
}

#[test]
fn verify_exit_codes() {
    let ok = bin().arg("verify").status().unwrap();
    assert_eq!(ok.code(), Some(0));
    let bad = bin().arg("verify").arg(configs().join("verify_perturbed.json")).status().unwrap();
    assert_eq!(bad.code(), Some(1));
    let cfg = scratch("delta.json");
    std::fs::write(&cfg, r#"{"delta":2.5}"#).unwrap();
    assert_eq!(bin().arg("verify").arg(&cfg).status().unwrap().code(), Some(2));
}

#[test]
fn unknown_fields_are_rejected() {
    let cfg = scratch("typo.json");
    std::fs::write(&cfg, r#"{"samples":3,"sampels":4}"#).unwrap();
    assert_eq!(bin().arg("verify").arg(&cfg).status().unwrap().code(), Some(2));
}
