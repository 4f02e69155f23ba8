//! Numerical location of exact resonances (the systematic frequency shifts).
//!
//! The objective is the largest departure max_k [1 − |⟨ψ0|ψ(kT)⟩|²] from the source dressed
//! state under unitary stroboscopic evolution. Dissipation is left out on purpose: at the
//! second-order rates it would broaden the peak beyond use.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::FloquetUnitary;
use crate::effective::LevelKey;
use crate::error::{Error, Result};
use crate::hilbert::{Basis, QuantumState};
use crate::ode::OdeOptions;
use crate::params::SystemParams;
use crate::rates::{phi_general, theta_general};
use crate::spectrum::{corrected_eigenfrequency, dressed_state, eigenfrequency};

/// A K-photon transition between two dressed levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSpec {
    pub source: LevelKey,
    pub target: LevelKey,
    pub order: u8,
}

impl ResonanceSpec {
    pub fn new(source: LevelKey, target: LevelKey, order: u8) -> Result<ResonanceSpec> {
        if order != 1 && order != 2 {
            return Err(Error::invalid(format!("resonance order must be 1 or 2, got {order}")));
        }
        if source == target {
            return Err(Error::invalid("source and target levels coincide"));
        }
        Ok(ResonanceSpec {
            source: LevelKey::new(source.m, source.branch),
            target: LevelKey::new(target.m, target.branch),
            order,
        })
    }

    fn k(&self) -> f64 {
        self.order as f64
    }

    /// λ_target − λ_source from the uncorrected spectrum.
    pub fn bare_gap(&self, p: &SystemParams) -> f64 {
        eigenfrequency(p, self.target.m, self.target.branch) - eigenfrequency(p, self.source.m, self.source.branch)
    }

    /// λ̄_target − λ̄_source.
    pub fn corrected_gap(&self, p: &SystemParams) -> Result<f64> {
        Ok(corrected_eigenfrequency(p, self.target.m, self.target.branch)?
            - corrected_eigenfrequency(p, self.source.m, self.source.branch)?)
    }

    /// (λ̄_target − λ̄_source)/K.
    pub fn predicted_eta(&self, p: &SystemParams) -> Result<f64> {
        Ok(self.corrected_gap(p)?.abs() / self.k())
    }

    /// η for a shift given in units of δ₊ relative to the bare gap.
    pub fn eta_with_bare_shift(&self, p: &SystemParams, shift_delta_plus: f64) -> f64 {
        (self.bare_gap(p).abs() + shift_delta_plus * delta_plus_small(p)) / self.k()
    }

    /// |Θ| (K = 1) or |Φ| (K = 2) of the transition at modulation frequency η.
    pub fn rate(&self, p: &SystemParams, eta: f64) -> Result<f64> {
        let (lo, hi) = if self.source.m < self.target.m {
            (self.source, self.target)
        } else {
            (self.target, self.source)
        };
        if hi.m != lo.m + 2 {
            return Err(Error::Unsupported(format!(
                "rates are defined between levels m and m+2, not {lo} and {hi}"
            )));
        }
        let value = if self.order == 1 {
            theta_general(p, hi.m, lo.branch, hi.branch, eta)?
        } else {
            phi_general(p, hi.m, lo.branch, hi.branch, eta)?
        };
        Ok(value.norm())
    }
}

/// δ₊ = g0²/Δ₊, the unit of the frequency shifts.
pub fn delta_plus_small(p: &SystemParams) -> f64 {
    p.g0 * p.g0 / p.delta_plus()
}

#[derive(Clone, Debug)]
pub struct TuneOptions {
    /// Half-width of the scanned window in units of δ₊ (numerator units, before dividing by K).
    pub half_window: f64,
    /// Explicit η window, overriding `half_window`.
    pub window: Option<(f64, f64)>,
    /// Horizon in units of the quarter Rabi period π/(2θ).
    pub horizon_factor: f64,
    /// Coarse grid spacing in units of θ/K.
    pub grid_step: f64,
    pub max_grid_points: usize,
    /// Absolute η resolution of the refinement.
    pub resolution: f64,
    pub min_dynamic_range: f64,
    pub ode: OdeOptions,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            half_window: 5.0,
            window: None,
            horizon_factor: 1.3,
            grid_step: 1.0,
            max_grid_points: 4001,
            resolution: 1e-9,
            min_dynamic_range: 1e-4,
            ode: OdeOptions::default().with_tol(1e-12, 1e-14),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObjectiveSample {
    pub eta: f64,
    pub objective: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResonanceTuneResult {
    pub resonance: ResonanceSpec,
    pub eta_star: f64,
    pub objective_star: f64,
    /// (λ̄_target − λ̄_source)/K
    pub predicted_eta: f64,
    /// K·η* − (λ̄_target − λ̄_source)
    pub sefs_shift: f64,
    /// K·η* − (λ_target − λ_source), measured from the bare gap.
    pub bare_shift: f64,
    pub delta_plus: f64,
    pub window: (f64, f64),
    pub rate: f64,
    pub horizon: f64,
    pub evaluations: usize,
    pub curve: Vec<ObjectiveSample>,
}

impl ResonanceTuneResult {
    pub fn sefs_shift_in_delta_plus(&self) -> f64 {
        self.sefs_shift / self.delta_plus
    }

    pub fn bare_shift_in_delta_plus(&self) -> f64 {
        self.bare_shift / self.delta_plus
    }
}

/// max_k [1 − |⟨ψ0|ψ(kT)⟩|²] over the first ⌈horizon/T⌉ periods at modulation frequency η.
pub fn transfer_objective(
    params: &SystemParams,
    basis: Basis,
    psi0: &QuantumState,
    eta: f64,
    horizon: f64,
    ode: &OdeOptions,
) -> Result<f64> {
    let p = params.clone().with_eta(eta);
    let u = FloquetUnitary::compute(&p, basis, ode)?;
    let periods = (horizon / u.period).ceil().max(1.0) as usize;
    let mut best = 0.0f64;
    u.orbit(psi0, periods, |_, psi| {
        let overlap = psi0.amplitudes.dotc(psi).norm_sqr();
        best = best.max(1.0 - overlap);
    })?;
    Ok(best)
}

/// Grid scan followed by golden-section refinement of the transfer objective.
pub fn tune_resonance(
    params: &SystemParams,
    basis: Basis,
    spec: &ResonanceSpec,
    opts: &TuneOptions,
) -> Result<ResonanceTuneResult> {
    params.validate()?;
    if !(params.epsilon > 0.0) {
        return Err(Error::invalid("tuning needs a nonzero modulation depth"));
    }
    let k = spec.order as f64;
    let predicted = spec.predicted_eta(params)?;
    let dp = delta_plus_small(params);
    let (lo, hi) = match opts.window {
        Some((a, b)) => {
            if !(a < b) || predicted < a || predicted > b {
                return Err(Error::invalid(format!(
                    "window [{a}, {b}] must be increasing and contain the predicted η = {predicted}"
                )));
            }
            (a, b)
        }
        None => {
            let half = opts.half_window * dp / k;
            (predicted - half, predicted + half)
        }
    };
    let rate = spec.rate(params, predicted)?;
    if !(rate > 0.0) {
        return Err(Error::NoResonance(format!(
            "the {}-order rate between {} and {} vanishes",
            spec.order, spec.source, spec.target
        )));
    }
    let horizon = opts.horizon_factor * std::f64::consts::PI / (2.0 * rate);
    let psi0 = dressed_state(params, basis, spec.source.m, spec.source.branch)?;
    let objective = |eta: f64| transfer_objective(params, basis, &psi0, eta, horizon, &opts.ode);

    let step = opts.grid_step * rate / k;
    let n = (((hi - lo) / step).ceil() as usize + 1).clamp(5, opts.max_grid_points);
    let etas: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let values = etas.par_iter().map(|&e| objective(e)).collect::<Result<Vec<f64>>>()?;
    let (imax, &vmax) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    if vmax - vmin < opts.min_dynamic_range {
        return Err(Error::NoResonance(format!(
            "objective varies by only {:.2e} across [{lo}, {hi}]",
            vmax - vmin
        )));
    }
    let mut curve: Vec<ObjectiveSample> = etas
        .iter()
        .zip(&values)
        .map(|(&eta, &objective)| ObjectiveSample { eta, objective })
        .collect();

    let (mut a, mut b) = (etas[imax.saturating_sub(1)], etas[(imax + 1).min(n - 1)]);
    let (mut best_eta, mut best) = (etas[imax], vmax);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    let mut evaluations = n + 2;
    curve.push(ObjectiveSample { eta: x1, objective: f1 });
    curve.push(ObjectiveSample { eta: x2, objective: f2 });
    while b - a > opts.resolution {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1)?;
            curve.push(ObjectiveSample { eta: x1, objective: f1 });
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2)?;
            curve.push(ObjectiveSample { eta: x2, objective: f2 });
        }
        evaluations += 1;
    }
    for s in &curve[n..] {
        if s.objective > best {
            best = s.objective;
            best_eta = s.eta;
        }
    }
    curve.sort_by(|x, y| x.eta.total_cmp(&y.eta));

    Ok(ResonanceTuneResult {
        resonance: *spec,
        eta_star: best_eta,
        objective_star: best,
        predicted_eta: predicted,
        sefs_shift: k * best_eta - spec.corrected_gap(params)?.abs(),
        bare_shift: k * best_eta - spec.bare_gap(params).abs(),
        delta_plus: dp,
        window: (lo, hi),
        rate,
        horizon,
        evaluations,
        curve,
    })
}
