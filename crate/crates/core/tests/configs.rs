use std::path::PathBuf;

use ncqed::scenario::config::Dynamics;
use ncqed::scenario::{resolve, ScenarioConfig};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn figure_configs_load_and_pass_validity() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.starts_with("fig") && name.ends_with(".toml") {
            let cfg = ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(cfg.evolution.dynamics, Dynamics::Lindblad);
            let mut untuned = cfg.clone();
            untuned.resonance.tune = false;
            let r = resolve(&untuned, false).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(r.validity.passed());
            seen += 1;
        }
    }
    assert_eq!(seen, 6);
}

#[test]
fn json_and_toml_describe_the_same_scenario() {
    let cfg = ScenarioConfig::load(&configs().join("fig2_ajc_k2.toml")).unwrap();
    let json = serde_json::to_string(&cfg).unwrap();
    assert_eq!(ScenarioConfig::from_json_str(&json).unwrap(), cfg);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.json");
    std::fs::write(&path, &json).unwrap();
    assert_eq!(ScenarioConfig::load(&path).unwrap(), cfg);
}

#[test]
fn figure_shift_moves_the_resolved_frequency() {
    let cfg = ScenarioConfig::load(&configs().join("fig3_dce_k2.toml")).unwrap();
    let r = resolve(&cfg, false).unwrap();
    let dp = r.resonance.delta_plus;
    let expected = (r.resonance.bare_gap - 1.93 * dp) / 2.0;
    assert!(
        (r.resonance.eta - expected).abs() < 1e-12,
        "{} vs {expected}",
        r.resonance.eta
    );
}

#[test]
fn collective_config_loads() {
    let cfg = ScenarioConfig::load(&configs().join("collective_dce.toml")).unwrap();
    assert_eq!(cfg.system.n_qubits, 100);
    assert!(cfg.collective.is_some());
}
