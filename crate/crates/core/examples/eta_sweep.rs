//! Unitary η sweep across the second-order DCE resonance, compared with the tuner's optimum.

use ncqed::scenario::config::{SweepAxis, SweepRange, SweepSection};
use ncqed::scenario::{execute_sweep, run_tune, ScenarioConfig};

const CONFIG: &str = r#"
[system]
Omega0 = 0.6
g0 = 0.05

[modulation]
depth_ratio = 0.1

[resonance]
regime = "dce"
order = 2
shift = -1.93

[evolution]
dynamics = "unitary"
horizon_transfers = 0.65
samples = 400
n_max = 6
"#;

fn main() -> ncqed::Result<()> {
    let mut cfg = ScenarioConfig::from_toml_str(CONFIG)?;
    let dir = std::env::temp_dir().join("ncqed_eta_sweep");
    cfg.output.dir = dir.display().to_string();

    let (tune, _) = run_tune(&cfg, false)?;
    let eta_star = tune.result.eta_star;
    // the second-order line is only a few θ2 wide
    let half = 6.0 * tune.resonance.rate.unwrap_or(0.0) / 2.0;
    cfg.sweep = Some(SweepSection {
        axis: SweepAxis::Eta,
        values: None,
        range: Some(SweepRange {
            start: eta_star - half,
            stop: eta_star + half,
            count: 17,
        }),
    });
    let sweep = execute_sweep(&cfg, false)?;
    println!(
        "tuned η* = {eta_star:.10} (shift {:+.3} δ+)",
        tune.result.bare_shift_delta_plus
    );
    for row in &sweep.rows {
        let bar = "#".repeat((row.max_excitation.unwrap_or(0.0) * 40.0) as usize);
        println!(
            "  η = {:.8}  max(1 − P_g0) = {:.4}  {bar}",
            row.value,
            row.max_excitation.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
