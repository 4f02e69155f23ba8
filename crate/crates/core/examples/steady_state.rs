//! Long-time photon number and populations under dissipation, numerical against the
//! rate-equation closed forms, for several γ/θ.

use ncqed::effective::LevelKey;
use ncqed::hilbert::Basis;
use ncqed::scenario::ResonanceSpec;
use ncqed::steady::{asymptotic_closed_form, numerical_steady_state, AsymptoticRegime, SteadyOptions};
use ncqed::{Branch, ModulationTarget, SystemParams};

fn main() -> ncqed::Result<()> {
    let g0 = 0.05;
    let cases = [
        ("resonant", 1.0, Branch::Plus, AsymptoticRegime::ResonantEqualRates),
        ("ajc", 1.0 - 8.0 * g0, Branch::Minus, AsymptoticRegime::AjcEqualRates),
    ];
    for (name, qubit, target, regime) in cases {
        let p = SystemParams::new(1.0, qubit, g0).with_modulation(ModulationTarget::Omega, 0.05 * qubit, 0.0);
        let spec = ResonanceSpec::new(LevelKey::ground(), LevelKey::new(2, target), 1)?;
        let eta = spec.predicted_eta(&p)?;
        let theta = spec.rate(&p, eta)?;
        println!("{name}: θ1 = {theta:.3e}");
        for ratio in [0.01, 0.1, 0.5] {
            let rate = ratio * theta;
            let p = p.clone().with_eta(eta).with_dissipation(rate, rate, rate);
            let s = numerical_steady_state(&p, Basis::new(6)?, &SteadyOptions::default())?;
            let cf = asymptotic_closed_form(regime, rate, theta, Some(g0 / p.delta_minus()))?;
            let o = s.observables;
            println!(
                "  γ/θ = {ratio:<4}  ⟨n⟩ {:.4} ({:.4})  P_e {:.4} ({:.4})  P_g0 {:.4} ({:.4})",
                o.mean_n, cf.mean_n_inf, o.p_e, cf.p_e_inf, o.p_g0, cf.p_g0_inf
            );
        }
    }
    println!("closed forms in parentheses");
    Ok(())
}
