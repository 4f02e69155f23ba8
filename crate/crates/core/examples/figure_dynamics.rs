//! Dissipative photon generation from |g,0⟩ under first- and second-order resonances,
//! driven by the figure configurations in `configs/`.
//!
//! Run from the repository root: `cargo run --release --example figure_dynamics [config...]`.

use std::path::PathBuf;

use ncqed::scenario::{execute_evolve, ScenarioConfig};

fn main() -> ncqed::Result<()> {
    let mut paths: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if paths.is_empty() {
        paths = ["fig1_resonant_k2", "fig2_ajc_k2", "fig3_dce_k2"]
            .iter()
            .map(|n| PathBuf::from(format!("configs/{n}.toml")))
            .collect();
    }
    for path in paths {
        let cfg = ScenarioConfig::load(&path)?;
        let run = execute_evolve(&cfg, false)?;
        let r = &run.report;
        let us = cfg.microseconds_per_unit().unwrap_or(f64::NAN);
        println!(
            "{}: K = {}, η = {:.10}, n_max = {}",
            path.display(),
            r.resonance.order,
            r.resonance.eta,
            r.n_max
        );
        let s = &run.series;
        let stride = (s.len() / 10).max(1);
        for k in (0..s.len()).step_by(stride) {
            println!(
                "  t = {:6.3} µs  ⟨n⟩ = {:.4}  P_e = {:.4}  P_g0 = {:.4}",
                s.t[k] * us,
                s.mean_n[k],
                s.p_e[k],
                s.p_g0[k]
            );
        }
        println!("  max_t [1 − P_g0] = {:.4}\n", r.max_excitation);
    }
    Ok(())
}
