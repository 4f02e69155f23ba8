//! Effective amplitude equations against the full Schrödinger evolution over one transfer
//! period at the first-order resonance |g,0⟩ → φ(2,+).

use ncqed::dynamics::{evolve_schrodinger, observables, DynamicsOptions, TimeGrid};
use ncqed::effective::{evolve_effective, reconstruct_state, AmplitudeVector, EffectiveOptions, Ladder, LevelKey};
use ncqed::hilbert::{Basis, QuantumState, Qubit};
use ncqed::rates::RateTable;
use ncqed::scenario::{tune_resonance, ResonanceSpec, TuneOptions};
use ncqed::spectrum::SpectrumTable;
use ncqed::{Branch, ModulationTarget, SystemParams};

fn main() -> ncqed::Result<()> {
    let p = SystemParams::new(1.0, 1.0, 0.05).with_modulation(ModulationTarget::Omega, 0.05, 0.0);
    let basis = Basis::new(8)?;
    let spec = ResonanceSpec::new(LevelKey::ground(), LevelKey::new(2, Branch::Plus), 1)?;
    let tuned = tune_resonance(&p, basis, &spec, &TuneOptions::default())?;
    let p = p.with_eta(tuned.eta_star);
    let period = std::f64::consts::PI / tuned.rate;
    println!("η* = {:.10}, transfer period π/θ1 = {period:.1}", tuned.eta_star);

    let grid = TimeGrid::new(0.0, period, 41)?;
    let psi0 = QuantumState::basis_state(basis, Qubit::G, 0)?;
    let exact = evolve_schrodinger(&p, basis, &psi0, &grid, &DynamicsOptions::default())?;

    let m_max = 6;
    let b0 = AmplitudeVector::basis(Ladder::parity_chain(0, m_max), LevelKey::ground())?;
    let traj = evolve_effective(
        &RateTable::build(&p, m_max)?,
        &SpectrumTable::build(&p, m_max)?,
        &b0,
        &exact.t,
        &EffectiveOptions::default(),
    )?;

    println!("     t       ⟨n⟩ exact  ⟨n⟩ eff   P_g0 exact  P_g0 eff");
    let mut worst = 0.0f64;
    for (k, &t) in exact.t.iter().enumerate() {
        let o = observables(&reconstruct_state(&traj.at(k), &p, t, basis, &[])?);
        worst = worst
            .max((o.p_g0 - exact.p_g0[k]).abs())
            .max((o.p_e - exact.p_e[k]).abs());
        if k % 5 == 0 {
            println!(
                "  {t:8.1}  {:9.5}  {:9.5}  {:9.5}  {:9.5}",
                exact.mean_n[k], o.mean_n, exact.p_g0[k], o.p_g0
            );
        }
    }
    println!("largest population deviation: {worst:.3e}");
    Ok(())
}
