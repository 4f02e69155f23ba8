//! First- and second-order transition rates from the general expressions and the
//! closed-form regime approximations, at the figure parameters.

use ncqed::rates::{rate_at_resonance, rates_dispersive_closed_form, rates_resonant_closed_form, Regime};
use ncqed::spectrum::corrected_eigenfrequency;
use ncqed::{Branch, ModulationTarget, SystemParams};

fn main() -> ncqed::Result<()> {
    let g0 = 0.05;
    let figure =
        |qubit: f64| SystemParams::new(1.0, qubit, g0).with_modulation(ModulationTarget::Omega, 0.05 * qubit, 0.0);

    let p = figure(1.0);
    let cf = rates_resonant_closed_form(&p, 2, Branch::Plus, Branch::Plus)?;
    println!("resonant |g,0⟩ → φ(2,+)");
    println!(
        "  θ1/g0 general {:.3e}  closed form {:.3e}",
        rate_at_resonance(&p, 2, Branch::Plus, Branch::Plus, 1)? / g0,
        cf.theta.norm() / g0
    );
    println!(
        "  θ2/g0 general {:.3e}  closed form {:.3e}",
        rate_at_resonance(&p, 2, Branch::Plus, Branch::Plus, 2)? / g0,
        cf.phi.norm() / g0
    );

    let p = figure(1.0 - 8.0 * g0);
    for (regime, target) in [(Regime::Ajc, Branch::Minus), (Regime::Dce, Branch::Plus)] {
        let cf = rates_dispersive_closed_form(&p, regime, 2, Branch::Plus, target)?;
        println!("{regime:?} |g,0⟩ → φ(2,{})", target.symbol());
        for order in [1u8, 2] {
            let general = rate_at_resonance(&p, 2, Branch::Plus, target, order)?;
            let closed = if order == 1 { cf.theta.norm() } else { cf.phi.norm() };
            println!(
                "  θ{order}/g0 general {:.3e}  closed form {:.3e}",
                general / g0,
                closed / g0
            );
        }
    }

    // Anti-DCE: φ(m+2,+) → φ(m,−), the rate grows with the ladder index
    println!("anti-DCE φ(m+2,+) → φ(m,−)");
    for m in 1..=6u32 {
        let gap = corrected_eigenfrequency(&p, m + 2, Branch::Plus)? - corrected_eigenfrequency(&p, m, Branch::Minus)?;
        // the closed form needs g0√m ≪ |Δ₋|/2 and is refused beyond that
        let closed = rates_dispersive_closed_form(&p, Regime::AntiDce, m + 2, Branch::Minus, Branch::Plus)
            .map(|e| format!("{:.3e}", e.theta.norm() / g0))
            .unwrap_or_else(|_| "n/a".into());
        println!(
            "  m = {m}: η ≈ {:.5}  θ1/g0 {:.3e} (closed form {closed})  θ2/g0 {:.3e}",
            gap.abs(),
            rate_at_resonance(&p, m + 2, Branch::Minus, Branch::Plus, 1)? / g0,
            rate_at_resonance(&p, m + 2, Branch::Minus, Branch::Plus, 2)? / g0,
        );
    }
    Ok(())
}
