//! Collective model of N qubits in one cavity: two bosonic normal modes after the
//! Holstein-Primakoff step, squeezed by the effective DCE generator.

use ncqed::collective::{
    collective_resonance_eta, effective_hamiltonian, evolve_gaussian, fock_occupations, CollectiveParams,
    CollectiveRegime, GaussianOptions, GaussianState, Monomial,
};
use ncqed::ode::OdeOptions;
use ncqed::{ModulationTarget, SystemParams};

fn main() -> ncqed::Result<()> {
    let n = 100;
    let g0 = 5e-4;
    let g_tilde = (n as f64).sqrt() * g0;
    let qubit = 1.0 - 8.0 * g_tilde;
    let mut base = SystemParams::new(1.0, qubit, g0).with_modulation(ModulationTarget::Omega, 0.05 * qubit, 0.0);
    base.n_qubits = n;
    println!("N = {n}, g̃0 = {g_tilde}, Δ₋ = {:.3}", base.delta_minus());

    for order in [1u8, 2] {
        let eta = collective_resonance_eta(&CollectiveParams::new(base.clone())?, CollectiveRegime::Dce, order)?;
        let cp = CollectiveParams::new(base.clone().with_eta(eta))?;
        let gen = effective_hamiltonian(&cp, CollectiveRegime::Dce, order, ModulationTarget::Omega)?;
        let c = gen.coefficient(Monomial::AA);
        let r = 2.0 * c.norm();
        println!("order {order}: η = {eta:.8}, A² coefficient {c:.3e}, squeezing rate r = {r:.3e}");
        let times: Vec<f64> = (0..=6).map(|k| k as f64 * 0.25 / r).collect();
        let traj = evolve_gaussian(&gen, &GaussianState::vacuum(), &times, &GaussianOptions::default())?;
        let fock = fock_occupations(&gen, 20, &times, &OdeOptions::default())?;
        for (k, &t) in times.iter().enumerate() {
            println!(
                "  r·t = {:4.2}  ⟨A†A⟩ = {:.5}  Fock {:.5}  sinh²(rt) = {:.5}  ⟨B†B⟩ = {:.2e}",
                r * t,
                traj.occupation_a[k],
                fock[k].0,
                (r * t).sinh().powi(2),
                traj.occupation_b[k]
            );
        }
        println!("  symplectic defect {:.1e}", traj.symplectic_defect);
    }
    Ok(())
}
