use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[system]
Omega0 = 1.0
g0 = 0.05

[modulation]
depth_ratio = 0.05

[resonance]
regime = "resonant"

[evolution]
dynamics = "unitary"
horizon = 400.0
samples = 21
n_max = 4

[output]
prefix = "small"
"#;

fn ncqed(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("scenario.toml");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_ncqed"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

/// Counter-rotating admixture keeps |g,0⟩ within 4(g0/Δ₊)² of itself without modulation.
const BLOCH_SIEGERT_BOUND: f64 = 5.0 * 0.025 * 0.025;

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn evolve_writes_timeseries_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = ncqed(dir.path(), SMALL, &["evolve"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("out/small_timeseries.csv"));
    assert!(rows.len() > 10);
    assert_eq!(rows[0][3], 1.0);
    assert!((rows.last().unwrap()[0] - 400.0).abs() < 10.0);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/small.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "evolve");
}

#[test]
fn identical_configs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(ncqed(d.path(), SMALL, &["evolve"]).status.success());
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("out/small_timeseries.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SMALL.replace("g0 = 0.05", "g0 = 0.05\ncoupling = 0.05");
    let out = ncqed(dir.path(), &cfg, &["evolve"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("coupling"));
}

#[test]
fn bad_order_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = ncqed(dir.path(), SMALL, &["rates", "--order", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = SMALL.replace("regime = \"resonant\"", "regime = \"resonant\"\norder = 3");
    assert_eq!(ncqed(dir.path(), &cfg, &["rates"]).status.code(), Some(2));
}

#[test]
fn validity_violation_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    // g0√2 = 0.42 ω0 at the target rung
    let cfg = SMALL.replace("g0 = 0.05", "g0 = 0.3");
    let out = ncqed(dir.path(), &cfg, &["rates"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let out = ncqed(dir.path(), &cfg, &["rates", "--force"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unmodulated_evolution_stays_near_the_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SMALL.replace("depth_ratio = 0.05", "depth_ratio = 0.0\neta = 2.0");
    let out = ncqed(dir.path(), &cfg, &["evolve", "--lindblad"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for row in read_csv(&dir.path().join("out/small_timeseries.csv")) {
        assert!(row[1] < BLOCH_SIEGERT_BOUND && row[2] < BLOCH_SIEGERT_BOUND);
        assert!(1.0 - row[3] < BLOCH_SIEGERT_BOUND);
    }
}

#[test]
fn sweep_over_zero_depth_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SMALL}\n[sweep]\naxis = \"depth_ratio\"\nvalues = [0.0, 0.05]\n");
    let out = ncqed(dir.path(), &cfg, &["sweep"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("out/small_sweep.csv")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "max_excitation").unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    let flat: f64 = rows[0][col].parse().unwrap();
    let driven: f64 = rows[1][col].parse().unwrap();
    assert!(flat < BLOCH_SIEGERT_BOUND, "{flat}");
    assert!(driven > 4.0 * BLOCH_SIEGERT_BOUND, "{driven}");
}

#[test]
fn spectrum_and_tune_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = ncqed(dir.path(), SMALL, &["spectrum"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/small_spectrum.csv").exists());
    let out = ncqed(dir.path(), SMALL, &["tune"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("eta* = 2.07"), "{stdout}");
}
