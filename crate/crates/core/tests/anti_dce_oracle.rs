//! Anti-DCE transfer φ(7,+) → φ(5,−) against a brute-force Floquet oracle.
//!
//! The oracle scanned η for maximal population transfer at ε/Ω0 = 0.05, Δ₋ = 8g0,
//! n_max = 11 and converted the time of best transfer into a rate π/(2t):
//! K = 1 gives 1.655e-3 g0 (transfer 0.9886), K = 2 gives 4.647e-5 g0 (transfer 0.9887).

use ncqed::dynamics::FloquetUnitary;
use ncqed::effective::LevelKey;
use ncqed::hilbert::Basis;
use ncqed::ode::OdeOptions;
use ncqed::rates::rate_at_resonance;
use ncqed::scenario::{tune_resonance, ResonanceSpec, TuneOptions};
use ncqed::spectrum::dressed_state;
use ncqed::{Branch, ModulationTarget, SystemParams};

const G0: f64 = 0.05;
const ORACLE_THETA1: f64 = 1.655e-3;
const ORACLE_THETA2: f64 = 4.647e-5;

fn params() -> SystemParams {
    let q = 1.0 - 8.0 * G0;
    SystemParams::new(1.0, q, G0).with_modulation(ModulationTarget::Omega, 0.05 * q, 0.0)
}

#[test]
fn formula_rates_are_within_ten_percent_of_the_oracle() {
    let p = params();
    let t1 = rate_at_resonance(&p, 7, Branch::Minus, Branch::Plus, 1).unwrap() / G0;
    let t2 = rate_at_resonance(&p, 7, Branch::Minus, Branch::Plus, 2).unwrap() / G0;
    assert!((t1 / ORACLE_THETA1 - 1.0).abs() < 0.1, "θ1/g0 = {t1:e}");
    assert!((t2 / ORACLE_THETA2 - 1.0).abs() < 0.1, "θ2/g0 = {t2:e}");
}

#[test]
fn first_order_oracle_is_reproduced_by_exact_dynamics() {
    let p = params();
    let basis = Basis::new(11).unwrap();
    let source = LevelKey::new(7, Branch::Plus);
    let target = LevelKey::new(5, Branch::Minus);
    let spec = ResonanceSpec::new(source, target, 1).unwrap();
    let opts = TuneOptions {
        half_window: 16.0,
        ..TuneOptions::default()
    };
    let tuned = tune_resonance(&p, basis, &spec, &opts).unwrap();

    let driven = p.clone().with_eta(tuned.eta_star);
    let u = FloquetUnitary::compute(&driven, basis, &OdeOptions::default().with_tol(1e-12, 1e-14)).unwrap();
    let psi0 = dressed_state(&p, basis, source.m, source.branch).unwrap();
    let phi = dressed_state(&p, basis, target.m, target.branch).unwrap();
    let periods = (std::f64::consts::PI / tuned.rate / u.period).ceil() as usize;
    let (mut best, mut at) = (0.0f64, 0usize);
    u.orbit(&psi0, periods, |k, psi| {
        let pop = phi.amplitudes.dotc(psi).norm_sqr();
        if pop > best {
            (best, at) = (pop, k);
        }
    })
    .unwrap();
    let rate = std::f64::consts::PI / (2.0 * at as f64 * u.period) / G0;
    assert!(best > 0.95, "peak transfer {best}");
    assert!(
        (rate / ORACLE_THETA1 - 1.0).abs() < 0.03,
        "rate/g0 = {rate:e}, peak {best}"
    );
}
