//! Analytic dressed spectrum against dense diagonalization of the Jaynes-Cummings
//! Hamiltonian, on and off resonance.

use ncqed::hilbert::{jc_hamiltonian, Basis};
use ncqed::spectrum::SpectrumTable;
use ncqed::SystemParams;

fn main() -> ncqed::Result<()> {
    let g0 = 0.05;
    for (label, qubit) in [("resonant", 1.0), ("dispersive", 1.0 - 8.0 * g0)] {
        let p = SystemParams::new(1.0, qubit, g0);
        let table = SpectrumTable::build(&p, 10)?;
        // one spare rung so the m = 10 doublet is exact in the truncated space
        let exact = jc_hamiltonian(&p, Basis::new(11)?).eigenvalues()?;
        let mut worst = 0.0f64;
        println!("{label}: Δ₋ = {:+.3}", p.delta_minus());
        println!("   m  S        λ          λ̄ (Bloch-Siegert)");
        for level in &table.levels {
            let nearest = exact
                .iter()
                .map(|e| (e - level.lambda).abs())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
            if level.m <= 3 {
                println!(
                    "  {:2}  {}  {:12.8}  {:12.8}",
                    level.m,
                    level.branch.symbol(),
                    level.lambda,
                    level.lambda_bar
                );
            }
        }
        println!("  largest |λ − eigenvalue| over m ≤ 10: {worst:.2e}\n");
    }
    Ok(())
}
