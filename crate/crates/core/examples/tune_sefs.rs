use std::time::Instant;

use ncqed::effective::LevelKey;
use ncqed::hilbert::Basis;
use ncqed::scenario::{tune_resonance, ResonanceSpec, TuneOptions};
use ncqed::{Branch, ModulationTarget, SystemParams};

fn main() -> ncqed::Result<()> {
    let g0 = 0.05;
    let cases = [
        ("resonant", 1.0, 0.05, Branch::Plus, 6),
        ("ajc", 0.6, 0.05, Branch::Minus, 6),
        ("dce", 0.6, 0.1, Branch::Plus, 8),
    ];
    for (name, qubit, ratio, target, n_max) in cases {
        let p = SystemParams::new(1.0, qubit, g0).with_modulation(ModulationTarget::Omega, ratio * qubit, 0.0);
        let basis = Basis::new(n_max)?;
        for order in [1u8, 2] {
            let spec = ResonanceSpec::new(LevelKey::ground(), LevelKey::new(2, target), order)?;
            let t = Instant::now();
            let r = tune_resonance(&p, basis, &spec, &TuneOptions::default())?;
            println!(
                "{name:9} K={order}  eta*={:.10}  bare shift {:+.4} δ+  corrected shift {:+.4} δ+  peak {:.4}  ({} evals, {:.1?})",
                r.eta_star,
                r.bare_shift_in_delta_plus(),
                r.sefs_shift_in_delta_plus(),
                r.objective_star,
                r.evaluations,
                t.elapsed()
            );
        }
    }
    Ok(())
}
