//! Asymptotic observables: the closed-form RWA expressions and a numerical solver to test them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    channel_over, density_from_vec, evolve_lindblad, liouvillian, observables, DynamicsOptions, FloquetChannel,
    Observables, Propagation, Snapshots, TimeGrid,
};
use crate::error::{Error, Result};
use crate::hilbert::{Basis, DensityMatrix};
use crate::linalg::{cmatmul, ONE, ZERO};
use crate::ode::OdeOptions;
use crate::params::SystemParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymptoticRegime {
    /// Δ₋ = 0 with κ = γ = γ_φ.
    ResonantEqualRates,
    /// Δ₋ = 0 with κ = 0, γ = γ_φ.
    ResonantKappaZero,
    /// Dispersive AJC transition with κ = γ = γ_φ.
    AjcEqualRates,
    /// Dispersive AJC transition with κ = 0, γ = γ_φ; needs g0/Δ₋.
    AjcKappaZero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticResult {
    pub mean_n_inf: f64,
    pub p_e_inf: f64,
    pub p_g0_inf: f64,
    pub regime: AsymptoticRegime,
    /// θ1 or θ2, whichever drives the transition.
    pub theta_used: f64,
}

/// Long-time ⟨n̂⟩, P_e, P_{g,0} from the dressed-basis RWA rate equations.
pub fn asymptotic_closed_form(
    regime: AsymptoticRegime,
    gamma: f64,
    theta: f64,
    g0_over_delta: Option<f64>,
) -> Result<AsymptoticResult> {
    let theta = theta.abs();
    if theta == 0.0 || !theta.is_finite() {
        return Err(Error::invalid("the closed forms need a nonzero transition rate θ"));
    }
    if !(gamma >= 0.0) {
        return Err(Error::invalid("γ must be non-negative"));
    }
    let r = gamma / theta;
    let (n, pe, pg) = match regime {
        AsymptoticRegime::ResonantEqualRates => {
            let x = 9.0 * r * r;
            let n = 15.0 / (23.0 + x);
            (n, 0.6 * n, (5.0 + x) / (23.0 + x))
        }
        AsymptoticRegime::ResonantKappaZero => {
            let x = (0.75 * r).powi(2);
            let n = 6.0 / (8.0 + x);
            (n, 0.5 * n, (2.0 + x) / (8.0 + x))
        }
        AsymptoticRegime::AjcEqualRates => {
            let x = r * r;
            let n = 1.0 / (2.0 + x);
            (n, n, 0.5 * (1.0 + 2.0 * x) / (2.0 + x))
        }
        AsymptoticRegime::AjcKappaZero => {
            let q = g0_over_delta.ok_or_else(|| Error::invalid("the κ = 0 AJC form needs g0/Δ₋"))?;
            let q2 = q * q;
            let x = (1.5 * r).powi(2);
            let n = 1.0 / (1.0 + q2 * x);
            (n, 6.0 * q2 * n, q2 * (3.0 + x) / (1.0 + q2 * x))
        }
    };
    Ok(AsymptoticResult {
        mean_n_inf: n,
        p_e_inf: pe,
        p_g0_inf: pg,
        regime,
        theta_used: theta,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethod {
    /// Null vector of the time-independent Liouvillian.
    LiouvillianNullSpace,
    /// Fixed point of the one-period map, averaged over one modulation period.
    FloquetFixedPoint,
    /// Limit of repeated squaring of the one-interval map applied to |g,0⟩⟨g,0|.
    LongTimeLimit,
}

#[derive(Clone, Debug)]
pub struct SteadyOptions {
    pub ode: OdeOptions,
    /// Samples per modulation period used for the time average.
    pub averaging_samples: usize,
    /// Most map squarings attempted by the long-time fallback (2^k intervals).
    pub max_squarings: u32,
    pub allow_truncation: bool,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            ode: OdeOptions::default(),
            averaging_samples: 64,
            max_squarings: 60,
            allow_truncation: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SteadyState {
    #[serde(skip)]
    pub rho: DensityMatrix,
    pub observables: Observables,
    pub method: SteadyMethod,
    /// ‖(M − 1)x‖∞ for the linear solves, ‖M² − M‖∞ for the long-time limit.
    pub residual: f64,
    pub averaging_window: Option<f64>,
}

/// Replaces the first row of `m` by the trace functional and solves m x = e₀.
fn solve_with_trace(mut m: DMatrix<C64>, d: usize) -> Option<(Vec<C64>, f64)> {
    let n = m.nrows();
    let orig = m.clone();
    for c in 0..n {
        m[(0, c)] = if c % (d + 1) == 0 { ONE } else { ZERO };
    }
    let mut b = DVector::zeros(n);
    b[0] = ONE;
    let x = m.lu().solve(&b)?;
    let residual = (&orig * &x).iter().map(|z| z.norm()).fold(0.0, f64::max);
    x.iter()
        .all(|z| z.is_finite())
        .then(|| (x.iter().copied().collect(), residual))
}

/// Squares `map` until it stops changing, then applies it to |g,0⟩⟨g,0|.
fn long_time_limit(mut map: DMatrix<C64>, max_squarings: u32) -> Result<(Vec<C64>, f64)> {
    let mut change = f64::INFINITY;
    for _ in 0..max_squarings {
        let next = cmatmul(&map, &map);
        change = (&next - &map).iter().map(|z| z.norm()).fold(0.0, f64::max);
        map = next;
        if change < 1e-10 {
            let x = map.column(0).iter().copied().collect();
            return Ok((x, change));
        }
    }
    Err(Error::Convergence(format!(
        "map powers still change by {change:.3e} after 2^{max_squarings} intervals"
    )))
}

fn hermitized(basis: Basis, x: &[C64]) -> DensityMatrix {
    let mut rho = density_from_vec(basis, x);
    rho.hermitize();
    let tr = rho.trace();
    rho.matrix /= C64::new(tr, 0.0);
    rho
}

fn check_top(rho: &DensityMatrix, opts: &SteadyOptions) -> Result<()> {
    let top = rho.top_population();
    let n_max = rho.basis.n_max();
    if top > 1e-6 && !opts.allow_truncation {
        return Err(Error::Truncation {
            population: top,
            n_max,
            suggested: n_max + (n_max / 2).max(2),
        });
    }
    Ok(())
}

/// Asymptotic state of the dissipative dynamics.
///
/// Time-independent models use the Liouvillian null space. Driven models use the fixed point
/// of the one-period map and report its average over one modulation period. When the linear
/// system is singular (several steady states) the long-time limit from |g,0⟩ is taken instead.
pub fn numerical_steady_state(params: &SystemParams, basis: Basis, opts: &SteadyOptions) -> Result<SteadyState> {
    params.validate()?;
    if !params.is_dissipative() {
        return Err(Error::invalid("a steady state needs at least one dissipation rate > 0"));
    }
    let d = basis.dim();
    let d2 = d * d;
    let identity = DMatrix::<C64>::identity(d2, d2);
    match params.period() {
        None => {
            let l = liouvillian(params, basis)?;
            let (x, residual, method) = match solve_with_trace(l, d) {
                Some((x, res)) if res < 1e-8 => (x, res, SteadyMethod::LiouvillianNullSpace),
                _ => {
                    let tau = 2.0 * std::f64::consts::PI / params.omega0;
                    let (p, _) = channel_over(params, basis, 0.0, tau, &opts.ode)?;
                    let (x, res) = long_time_limit(p, opts.max_squarings)?;
                    (x, res, SteadyMethod::LongTimeLimit)
                }
            };
            let rho = hermitized(basis, &x);
            check_top(&rho, opts)?;
            Ok(SteadyState {
                observables: observables(&rho),
                rho,
                method,
                residual,
                averaging_window: None,
            })
        }
        Some(period) => {
            let channel = FloquetChannel::compute(params, basis, &opts.ode)?;
            let (x, residual, method) = match solve_with_trace(&channel.matrix - &identity, d) {
                Some((x, res)) if res < 1e-8 => (x, res, SteadyMethod::FloquetFixedPoint),
                _ => {
                    let (x, res) = long_time_limit(channel.matrix, opts.max_squarings)?;
                    (x, res, SteadyMethod::LongTimeLimit)
                }
            };
            let start = hermitized(basis, &x);
            let samples = opts.averaging_samples.max(2);
            let grid = TimeGrid::new(0.0, period, samples + 1)?;
            let mut dyn_opts = DynamicsOptions::default()
                .with_ode(opts.ode.clone())
                .with_propagation(Propagation::Direct)
                .with_snapshots();
            dyn_opts.allow_truncation = opts.allow_truncation;
            dyn_opts.norm_tolerance = 1e-6;
            dyn_opts.positivity_tolerance = 1e-6;
            let ts = evolve_lindblad(params, basis, &start, &grid, &dyn_opts)?;
            let Snapshots::Mixed(states) = ts.snapshots else {
                return Err(Error::Solver("missing density snapshots".into()));
            };
            let mut avg = DMatrix::<C64>::zeros(d, d);
            for s in &states[..samples] {
                avg += &s.matrix;
            }
            avg /= C64::new(samples as f64, 0.0);
            let rho = DensityMatrix { basis, matrix: avg };
            check_top(&rho, opts)?;
            Ok(SteadyState {
                observables: observables(&rho),
                rho,
                method,
                residual,
                averaging_window: Some(period),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{QuantumState, Qubit};
    use crate::params::ModulationTarget;

    #[test]
    fn closed_form_limits() {
        let r = asymptotic_closed_form(AsymptoticRegime::ResonantEqualRates, 0.0, 1.0, None).unwrap();
        assert!((r.mean_n_inf - 15.0 / 23.0).abs() < 1e-15);
        assert!((r.p_e_inf - 0.6 * 15.0 / 23.0).abs() < 1e-15);
        let r = asymptotic_closed_form(AsymptoticRegime::ResonantEqualRates, 1e6, 1.0, None).unwrap();
        assert!(r.mean_n_inf < 1e-10 && (r.p_g0_inf - 1.0).abs() < 1e-10);
        let r = asymptotic_closed_form(AsymptoticRegime::AjcEqualRates, 0.0, 2.0, None).unwrap();
        assert_eq!((r.mean_n_inf, r.p_e_inf, r.p_g0_inf), (0.5, 0.5, 0.25));
        let r = asymptotic_closed_form(AsymptoticRegime::ResonantKappaZero, 0.0, 1.0, None).unwrap();
        assert_eq!((r.mean_n_inf, r.p_e_inf, r.p_g0_inf), (0.75, 0.375, 0.25));
        assert!(asymptotic_closed_form(AsymptoticRegime::AjcKappaZero, 0.1, 1.0, None).is_err());
        assert!(asymptotic_closed_form(AsymptoticRegime::AjcEqualRates, 0.1, 0.0, None).is_err());
    }

    #[test]
    fn closed_forms_decrease_with_damping() {
        for regime in [
            AsymptoticRegime::ResonantEqualRates,
            AsymptoticRegime::ResonantKappaZero,
            AsymptoticRegime::AjcEqualRates,
            AsymptoticRegime::AjcKappaZero,
        ] {
            let mut last = f64::INFINITY;
            for k in 0..40 {
                let r = asymptotic_closed_form(regime, 0.05 * k as f64, 1.0, Some(0.125)).unwrap();
                assert!(r.mean_n_inf < last);
                last = r.mean_n_inf;
            }
        }
    }

    #[test]
    fn undriven_steady_state_is_vacuum() {
        let p = SystemParams::new(1.0, 0.8, 0.0).with_dissipation(0.01, 0.02, 0.01);
        let b = Basis::new(3).unwrap();
        let s = numerical_steady_state(&p, b, &SteadyOptions::default()).unwrap();
        assert_eq!(s.method, SteadyMethod::LiouvillianNullSpace);
        let vac = QuantumState::basis_state(b, Qubit::G, 0).unwrap().to_density().matrix;
        assert!((&s.rho.matrix - vac).iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn pure_dephasing_falls_back_to_long_time_limit() {
        let p = SystemParams::new(1.0, 0.8, 0.0).with_dissipation(0.0, 0.0, 0.05);
        let b = Basis::new(2).unwrap();
        let s = numerical_steady_state(&p, b, &SteadyOptions::default()).unwrap();
        assert_eq!(s.method, SteadyMethod::LongTimeLimit);
        assert!((s.observables.p_g0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn driven_steady_state_is_a_valid_density_matrix() {
        let p = SystemParams::new(1.0, 1.0, 0.05)
            .with_modulation(ModulationTarget::Omega, 0.05, 2.0)
            .with_dissipation(2e-3, 2e-3, 2e-3);
        let b = Basis::new(3).unwrap();
        let opts = SteadyOptions {
            allow_truncation: true,
            ..Default::default()
        };
        let s = numerical_steady_state(&p, b, &opts).unwrap();
        assert_eq!(s.method, SteadyMethod::FloquetFixedPoint);
        assert!(s.rho.validate().is_ok());
        assert!(s.residual < 1e-8);
    }
}
