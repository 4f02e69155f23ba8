//! Pipelines behind the command-line subcommands.
//!
//! Each `run_*` resolves the configuration, checks the perturbative validity ratios, computes
//! and writes `{prefix}_<kind>.csv` plus a JSON sidecar. The `execute_*` variants compute
//! without touching the file system.

use std::path::PathBuf;

use serde::Serialize;

use crate::collective::{
    collective_resonance_eta, effective_hamiltonian, evolve_gaussian, fock_occupations, CollectiveParams,
    GaussianOptions, GaussianState, QuadraticTerm,
};
use crate::dynamics::{
    evolve_lindblad, evolve_schrodinger, observables, Diagnostics, DynamicsOptions, Observables, TimeSeries,
};
use crate::effective::{evolve_effective, reconstruct_state, AmplitudeVector, EffectiveOptions, Ladder, LevelKey};
use crate::error::{Error, Result};
use crate::hilbert::Basis;
use crate::params::{ModulationTarget, SystemParams};
use crate::rates::RateTable;
use crate::spectrum::{validity_check, SpectrumTable, ValidityReport};
use crate::steady::{
    asymptotic_closed_form, numerical_steady_state, AsymptoticRegime, AsymptoticResult, SteadyOptions, SteadyState,
};

use super::config::{CollectiveRegimeName, Dynamics, RegimePreset, ScenarioConfig};
use super::output::{fmt_num, ArtifactWriter, Manifest, TIMESERIES_HEADER};
use super::tune::{delta_plus_small, tune_resonance, ResonanceSpec, ResonanceTuneResult, TuneOptions};

/// Command-line overrides applied on top of a loaded configuration.
#[derive(Clone, Debug, Default)]
pub struct RunOverrides {
    pub out_dir: Option<PathBuf>,
    pub order: Option<u8>,
    pub dynamics: Option<Dynamics>,
    /// Proceed (with a warning) when the validity ratios exceed their threshold.
    pub force: bool,
}

impl ScenarioConfig {
    pub fn apply(&mut self, o: &RunOverrides) -> Result<()> {
        if let Some(dir) = &o.out_dir {
            self.output.dir = dir.display().to_string();
        }
        if let Some(k) = o.order {
            self.resonance.order = k;
            if let Some(c) = &mut self.collective {
                c.order = Some(k);
            }
        }
        if let Some(d) = o.dynamics {
            self.evolution.dynamics = d;
        }
        self.check()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaSource {
    Explicit,
    Formula,
    Tuned,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResonanceSummary {
    pub source: LevelKey,
    pub target: LevelKey,
    pub order: u8,
    pub eta: f64,
    pub eta_source: EtaSource,
    /// λ_target − λ_source
    pub bare_gap: f64,
    /// λ̄_target − λ̄_source
    pub corrected_gap: Option<f64>,
    pub delta_plus: f64,
    /// (K·η − |bare gap|)/δ₊
    pub bare_shift_delta_plus: f64,
    /// |Θ| or |Φ| at η, when the two levels are two rungs apart.
    pub rate: Option<f64>,
    /// π/rate
    pub transfer_time: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TuneSummary {
    pub eta_star: f64,
    pub objective_star: f64,
    pub predicted_eta: f64,
    pub sefs_shift_delta_plus: f64,
    pub bare_shift_delta_plus: f64,
    pub window: (f64, f64),
    pub horizon: f64,
    pub evaluations: usize,
}

impl From<&ResonanceTuneResult> for TuneSummary {
    fn from(r: &ResonanceTuneResult) -> TuneSummary {
        TuneSummary {
            eta_star: r.eta_star,
            objective_star: r.objective_star,
            predicted_eta: r.predicted_eta,
            sefs_shift_delta_plus: r.sefs_shift_in_delta_plus(),
            bare_shift_delta_plus: r.bare_shift_in_delta_plus(),
            window: r.window,
            horizon: r.horizon,
            evaluations: r.evaluations,
        }
    }
}

/// Configuration turned into concrete parameters, η and a validity verdict.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub params: SystemParams,
    pub spec: ResonanceSpec,
    pub resonance: ResonanceSummary,
    pub validity: ValidityReport,
    pub tune: Option<ResonanceTuneResult>,
    pub warnings: Vec<String>,
}

pub fn tune_options(cfg: &ScenarioConfig) -> TuneOptions {
    let t = &cfg.tune;
    TuneOptions {
        half_window: t.half_window,
        window: t.window.map(|[a, b]| (a, b)),
        horizon_factor: t.horizon_factor,
        grid_step: t.grid_step,
        resolution: t.resolution,
        ..TuneOptions::default()
    }
}

fn summary(p: &SystemParams, spec: &ResonanceSpec, eta: f64, eta_source: EtaSource) -> ResonanceSummary {
    let bare_gap = spec.bare_gap(p);
    let dp = delta_plus_small(p);
    let rate = spec.rate(p, eta).ok().filter(|r| r.is_finite());
    ResonanceSummary {
        source: spec.source,
        target: spec.target,
        order: spec.order,
        eta,
        eta_source,
        bare_gap,
        corrected_gap: spec.corrected_gap(p).ok(),
        delta_plus: dp,
        bare_shift_delta_plus: (spec.order as f64 * eta - bare_gap.abs()) / dp,
        rate,
        transfer_time: rate.filter(|&r| r > 0.0).map(|r| std::f64::consts::PI / r),
    }
}

/// Resolves η (explicit, formula or tuned) and enforces the validity threshold unless `force`.
pub fn resolve(cfg: &ScenarioConfig, force: bool) -> Result<Resolved> {
    let base = cfg.base_params()?;
    let spec = cfg.resonance_spec()?;
    let nominal = cfg.nominal_eta(&base)?;
    let mut params = base.with_eta(nominal);
    params.validate()?;
    let mut warnings = Vec::new();

    let validity = validity_check(&params, cfg.validity_m_max()?, cfg.validity.threshold);
    if !validity.passed() {
        let list: Vec<String> = validity
            .violations()
            .iter()
            .map(|e| format!("{} = {:.3e}", e.name, e.ratio))
            .collect();
        let msg = format!("ratios above {}: {}", validity.threshold, list.join(", "));
        if !force {
            return Err(Error::Validity(msg));
        }
        warnings.push(format!("validity check overridden: {msg}"));
    }

    let mut eta_source = if cfg.modulation.eta.is_some() {
        EtaSource::Explicit
    } else {
        EtaSource::Formula
    };
    let mut tune = None;
    if cfg.resonance.tune && cfg.modulation.eta.is_none() {
        let basis = Basis::new(cfg.tune.n_max.unwrap_or(cfg.evolution.n_max))?;
        let result = tune_resonance(&params, basis, &spec, &tune_options(cfg))?;
        params = params.with_eta(result.eta_star);
        eta_source = EtaSource::Tuned;
        tune = Some(result);
    }
    let resonance = summary(&params, &spec, params.eta, eta_source);
    Ok(Resolved {
        params,
        spec,
        resonance,
        validity,
        tune,
        warnings,
    })
}

/// Runs `f` on growing bases while the top Fock rung overflows, up to `max_n_max`.
pub(crate) fn with_truncation_retry<T>(
    n_max: usize,
    max_n_max: usize,
    warnings: &mut Vec<String>,
    mut f: impl FnMut(Basis) -> Result<T>,
) -> Result<(T, Basis)> {
    let mut n = n_max;
    loop {
        let basis = Basis::new(n)?;
        match f(basis) {
            Err(Error::Truncation {
                population, suggested, ..
            }) if suggested.min(max_n_max) > n => {
                let next = suggested.min(max_n_max);
                warnings.push(format!(
                    "top-rung population {population:.2e} at n_max = {n}; retrying with n_max = {next}"
                ));
                n = next;
            }
            other => return other.map(|v| (v, basis)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EffectiveComparison {
    pub ladder_m_max: u32,
    /// Largest |x_effective − x_exact| over the grid.
    pub max_dev_mean_n: f64,
    pub max_dev_p_e: f64,
    pub max_dev_p_g0: f64,
    pub max_norm_drift: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolveReport {
    pub resonance: ResonanceSummary,
    pub validity: ValidityReport,
    pub tune: Option<TuneSummary>,
    pub dynamics: Dynamics,
    pub n_max: usize,
    pub horizon: f64,
    pub samples: usize,
    pub max_excitation: f64,
    pub final_observables: Observables,
    pub diagnostics: Diagnostics,
    pub effective: Option<EffectiveComparison>,
    pub steady: Option<SteadyState>,
}

/// Outcome of [`execute_evolve`].
#[derive(Clone, Debug)]
pub struct EvolveRun {
    pub report: EvolveReport,
    pub series: TimeSeries,
    /// t, ⟨n̂⟩, P_e, P_{g,0} from the reconstructed effective state, when requested.
    pub effective_series: Option<Vec<[f64; 4]>>,
    pub warnings: Vec<String>,
}

fn dynamics_options(cfg: &ScenarioConfig) -> DynamicsOptions {
    let e = &cfg.evolution;
    let mut o = DynamicsOptions::default()
        .with_ode(e.ode())
        .with_propagation(e.propagation)
        .with_frame(e.frame);
    o.allow_truncation = e.allow_truncation;
    o
}

fn steady_options(cfg: &ScenarioConfig) -> SteadyOptions {
    SteadyOptions {
        ode: cfg.evolution.ode(),
        averaging_samples: cfg.steady.averaging_samples,
        allow_truncation: cfg.evolution.allow_truncation,
        ..SteadyOptions::default()
    }
}

fn effective_run(
    cfg: &ScenarioConfig,
    r: &Resolved,
    basis: Basis,
    series: &TimeSeries,
) -> Result<(EffectiveComparison, Vec<[f64; 4]>)> {
    let p = &r.params;
    let m_max = basis.n_max() as u32;
    let spectrum = SpectrumTable::build(p, m_max)?;
    let rates = RateTable::build(p, m_max)?;
    let src = r.spec.source;
    let ladder = Ladder::parity_chain(src.m % 2, m_max);
    let b0 = AmplitudeVector::basis(ladder, src)?;
    let opts = EffectiveOptions {
        ode: cfg.evolution.ode(),
        ..EffectiveOptions::default()
    };
    let traj = evolve_effective(&rates, &spectrum, &b0, &series.t, &opts)?;
    let mut rows = Vec::with_capacity(series.t.len());
    let (mut dn, mut de, mut dg) = (0.0f64, 0.0f64, 0.0f64);
    for (k, &t) in series.t.iter().enumerate() {
        let psi = reconstruct_state(&traj.at(k), p, t, basis, &[])?;
        let o = observables(&psi);
        dn = dn.max((o.mean_n - series.mean_n[k]).abs());
        de = de.max((o.p_e - series.p_e[k]).abs());
        dg = dg.max((o.p_g0 - series.p_g0[k]).abs());
        rows.push([t, o.mean_n, o.p_e, o.p_g0]);
    }
    let cmp = EffectiveComparison {
        ladder_m_max: m_max,
        max_dev_mean_n: dn,
        max_dev_p_e: de,
        max_dev_p_g0: dg,
        max_norm_drift: traj.max_norm_drift,
    };
    Ok((cmp, rows))
}

/// Full evolution of the configured scenario; nothing is written.
pub fn execute_evolve(cfg: &ScenarioConfig, force: bool) -> Result<EvolveRun> {
    let r = resolve(cfg, force)?;
    let mut warnings = r.warnings.clone();
    let p = &r.params;
    let horizon = cfg.horizon(r.resonance.rate.unwrap_or(0.0))?;
    let grid = cfg.grid(horizon)?;
    let opts = dynamics_options(cfg);
    let e = &cfg.evolution;
    if e.dynamics == Dynamics::Unitary && p.is_dissipative() {
        warnings.push("unitary run: dissipation rates are ignored".into());
    }
    let (series, basis) = with_truncation_retry(e.n_max, e.max_n_max.max(e.n_max), &mut warnings, |basis| {
        let psi0 = cfg.initial_state(basis, p)?;
        match e.dynamics {
            Dynamics::Unitary => evolve_schrodinger(p, basis, &psi0, &grid, &opts),
            Dynamics::Lindblad => evolve_lindblad(p, basis, &psi0.to_density(), &grid, &opts),
        }
    })?;
    warnings.extend(series.diagnostics.warnings.iter().cloned());

    let (effective, effective_series) = if e.effective {
        let (cmp, rows) = effective_run(cfg, &r, basis, &series)?;
        (Some(cmp), Some(rows))
    } else {
        (None, None)
    };

    let steady = if cfg.steady.enabled {
        let (s, _) = with_truncation_retry(basis.n_max(), e.max_n_max.max(e.n_max), &mut warnings, |b| {
            numerical_steady_state(p, b, &steady_options(cfg))
        })?;
        Some(s)
    } else {
        None
    };

    let last = series.len() - 1;
    let report = EvolveReport {
        resonance: r.resonance.clone(),
        validity: r.validity.clone(),
        tune: r.tune.as_ref().map(TuneSummary::from),
        dynamics: e.dynamics,
        n_max: basis.n_max(),
        horizon,
        samples: series.len(),
        max_excitation: series.max_excitation(),
        final_observables: series.observables_at(last),
        diagnostics: series.diagnostics.clone(),
        effective,
        steady,
    };
    Ok(EvolveRun {
        report,
        series,
        effective_series,
        warnings,
    })
}

fn time_rows(cfg: &ScenarioConfig, rows: impl Iterator<Item = [f64; 4]>) -> (Vec<&'static str>, Vec<Vec<f64>>) {
    let mut header = TIMESERIES_HEADER.to_vec();
    let us = cfg.microseconds_per_unit();
    if us.is_some() {
        header.push("t_us");
    }
    let rows = rows
        .map(|r| {
            let mut v = r.to_vec();
            if let Some(s) = us {
                v.push(r[0] * s);
            }
            v
        })
        .collect();
    (header, rows)
}

/// `evolve`: `{prefix}_timeseries.csv` (+ `_effective.csv`) and `{prefix}.json`.
pub fn run_evolve(cfg: &ScenarioConfig, force: bool) -> Result<EvolveRun> {
    let run = execute_evolve(cfg, force)?;
    let mut w = ArtifactWriter::for_config(cfg)?;
    let s = &run.series;
    let (header, rows) = time_rows(cfg, (0..s.len()).map(|k| [s.t[k], s.mean_n[k], s.p_e[k], s.p_g0[k]]));
    w.numeric_csv("_timeseries.csv", &header, &rows)?;
    if let Some(eff) = &run.effective_series {
        let (header, rows) = time_rows(cfg, eff.iter().copied());
        w.numeric_csv("_effective.csv", &header, &rows)?;
    }
    Manifest::new("evolve", cfg, &run.report, &run.warnings).write(&mut w, ".json")?;
    Ok(run)
}

#[derive(Clone, Debug, Serialize)]
pub struct TuneReport {
    pub resonance: ResonanceSummary,
    pub validity: ValidityReport,
    pub result: TuneSummary,
    pub curve_points: usize,
}

/// `tune`: `{prefix}_tune.csv` (objective curve) and `{prefix}_tune.json`.
pub fn run_tune(cfg: &ScenarioConfig, force: bool) -> Result<(TuneReport, ResonanceTuneResult)> {
    let mut c = cfg.clone();
    c.resonance.tune = false;
    let r = resolve(&c, force)?;
    let basis = Basis::new(cfg.tune.n_max.unwrap_or(cfg.evolution.n_max))?;
    let result = tune_resonance(&r.params, basis, &r.spec, &tune_options(cfg))?;
    let p = r.params.clone().with_eta(result.eta_star);
    let report = TuneReport {
        resonance: summary(&p, &r.spec, result.eta_star, EtaSource::Tuned),
        validity: r.validity,
        result: TuneSummary::from(&result),
        curve_points: result.curve.len(),
    };
    let mut w = ArtifactWriter::for_config(cfg)?;
    let rows: Vec<Vec<f64>> = result.curve.iter().map(|s| vec![s.eta, s.objective]).collect();
    w.numeric_csv("_tune.csv", &["eta", "objective"], &rows)?;
    Manifest::new("tune", cfg, &report, &r.warnings).write(&mut w, "_tune.json")?;
    Ok((report, result))
}

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub resonance: ResonanceSummary,
    pub validity: ValidityReport,
    pub m_max: u32,
    pub rows: usize,
}

/// `spectrum`: dressed levels up to `evolution.n_max` in `{prefix}_spectrum.csv`.
pub fn run_spectrum(cfg: &ScenarioConfig, force: bool) -> Result<(TableReport, SpectrumTable)> {
    let r = resolve(cfg, force)?;
    let m_max = cfg.evolution.n_max as u32;
    let table = SpectrumTable::build(&r.params, m_max)?;
    let header = ["m", "branch", "lambda", "nu", "lambda_bar", "beta_m", "theta_m"];
    let rows: Vec<Vec<String>> = table
        .levels
        .iter()
        .map(|l| {
            vec![
                l.m.to_string(),
                l.branch.symbol().to_string(),
                fmt_num(l.lambda),
                fmt_num(l.nu),
                fmt_num(l.lambda_bar),
                fmt_num(l.beta_m),
                fmt_num(l.theta_m),
            ]
        })
        .collect();
    let report = TableReport {
        resonance: r.resonance,
        validity: r.validity,
        m_max,
        rows: rows.len(),
    };
    let mut w = ArtifactWriter::for_config(cfg)?;
    w.csv("_spectrum.csv", &header, &rows)?;
    Manifest::new("spectrum", cfg, &report, &r.warnings).write(&mut w, "_spectrum.json")?;
    Ok((report, table))
}

/// `rates`: Θ and Φ for every transition up to `evolution.n_max` at the resolved η.
pub fn run_rates(cfg: &ScenarioConfig, force: bool) -> Result<(TableReport, RateTable)> {
    let r = resolve(cfg, force)?;
    let m_max = (cfg.evolution.n_max as u32).max(2);
    let table = RateTable::build(&r.params, m_max)?;
    let header = [
        "m",
        "t",
        "s",
        "theta_re",
        "theta_im",
        "theta_abs",
        "phi_re",
        "phi_im",
        "phi_abs",
        "theta_over_g0",
        "phi_over_g0",
    ];
    let g0 = r.params.g0;
    let rows: Vec<Vec<String>> = table
        .entries
        .iter()
        .map(|e| {
            let mut row = vec![e.m.to_string(), e.t.symbol().to_string(), e.s.symbol().to_string()];
            for x in [
                e.theta.re,
                e.theta.im,
                e.theta.norm(),
                e.phi.re,
                e.phi.im,
                e.phi.norm(),
                e.theta.norm() / g0,
                e.phi.norm() / g0,
            ] {
                row.push(fmt_num(x));
            }
            row
        })
        .collect();
    let report = TableReport {
        resonance: r.resonance,
        validity: r.validity,
        m_max,
        rows: rows.len(),
    };
    let mut w = ArtifactWriter::for_config(cfg)?;
    w.csv("_rates.csv", &header, &rows)?;
    Manifest::new("rates", cfg, &report, &r.warnings).write(&mut w, "_rates.json")?;
    Ok((report, table))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormComparison {
    pub closed_form: AsymptoticResult,
    /// |numerical − closed form| / |closed form|
    pub rel_err_mean_n: f64,
    pub rel_err_p_e: f64,
    pub rel_err_p_g0: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SteadyReport {
    pub resonance: ResonanceSummary,
    pub validity: ValidityReport,
    pub n_max: usize,
    pub steady: SteadyState,
    pub closed_form: Option<ClosedFormComparison>,
}

/// Closed-form family matching the configuration, if any.
pub fn asymptotic_regime(cfg: &ScenarioConfig, p: &SystemParams) -> Option<AsymptoticRegime> {
    let equal = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    let equal_rates = equal(p.kappa, p.gamma) && equal(p.gamma, p.gamma_phi) && p.gamma > 0.0;
    let kappa_zero = p.kappa == 0.0 && equal(p.gamma, p.gamma_phi) && p.gamma > 0.0;
    let resonant = p.delta_minus().abs() <= 1e-12 * p.omega0;
    match (cfg.resonance.regime, resonant) {
        (RegimePreset::Resonant, true) if equal_rates => Some(AsymptoticRegime::ResonantEqualRates),
        (RegimePreset::Resonant, true) if kappa_zero => Some(AsymptoticRegime::ResonantKappaZero),
        (RegimePreset::Ajc, false) if equal_rates => Some(AsymptoticRegime::AjcEqualRates),
        (RegimePreset::Ajc, false) if kappa_zero => Some(AsymptoticRegime::AjcKappaZero),
        _ => None,
    }
}

pub fn execute_steady(cfg: &ScenarioConfig, force: bool) -> Result<(SteadyReport, Vec<String>)> {
    let r = resolve(cfg, force)?;
    let mut warnings = r.warnings.clone();
    let p = &r.params;
    let e = &cfg.evolution;
    let (steady, basis) = with_truncation_retry(e.n_max, e.max_n_max.max(e.n_max), &mut warnings, |b| {
        numerical_steady_state(p, b, &steady_options(cfg))
    })?;
    let closed_form = match (asymptotic_regime(cfg, p), r.resonance.rate) {
        (Some(regime), Some(theta)) if theta > 0.0 => {
            let q = p.g0 / p.delta_minus();
            let cf = asymptotic_closed_form(regime, p.gamma, theta, Some(q))?;
            let rel = |num: f64, exact: f64| (num - exact).abs() / exact.abs();
            let o = steady.observables;
            Some(ClosedFormComparison {
                rel_err_mean_n: rel(o.mean_n, cf.mean_n_inf),
                rel_err_p_e: rel(o.p_e, cf.p_e_inf),
                rel_err_p_g0: rel(o.p_g0, cf.p_g0_inf),
                closed_form: cf,
            })
        }
        _ => None,
    };
    let report = SteadyReport {
        resonance: r.resonance,
        validity: r.validity,
        n_max: basis.n_max(),
        steady,
        closed_form,
    };
    Ok((report, warnings))
}

/// `steady`: `{prefix}_steady.json`.
pub fn run_steady(cfg: &ScenarioConfig, force: bool) -> Result<SteadyReport> {
    let (report, warnings) = execute_steady(cfg, force)?;
    let mut w = ArtifactWriter::for_config(cfg)?;
    Manifest::new("steady", cfg, &report, &warnings).write(&mut w, "_steady.json")?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct CollectiveReport {
    pub regime: CollectiveRegimeName,
    pub order: u8,
    pub target: ModulationTarget,
    pub n_qubits: u32,
    pub g_tilde: f64,
    /// Modulation frequency of the collective resonance.
    pub eta: f64,
    pub terms: Vec<QuadraticTerm>,
    /// Largest coefficient magnitude |c|; pure squeezing grows as sinh²(2|c|t).
    pub magnitude: f64,
    pub horizon: f64,
    pub final_occupation_a: f64,
    pub final_occupation_b: f64,
    pub symplectic_defect: f64,
    pub min_symplectic_eigenvalue: f64,
    /// Largest |Gaussian − Fock| occupation difference when the Fock check runs.
    pub fock_max_deviation: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct CollectiveRun {
    pub report: CollectiveReport,
    /// t, ⟨Â†Â⟩, ⟨B̂†B̂⟩ (+ Fock values).
    pub rows: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

pub fn execute_collective(cfg: &ScenarioConfig) -> Result<CollectiveRun> {
    let c = cfg
        .collective
        .as_ref()
        .ok_or_else(|| Error::config("the collective command needs a [collective] section"))?;
    let order = c.order.unwrap_or(cfg.resonance.order);
    let base = cfg.base_params()?;
    let target = base.target;
    let regime = c.regime.into();
    let eta = match cfg.modulation.eta {
        Some(eta) => eta,
        None => collective_resonance_eta(&CollectiveParams::new(base.clone())?, regime, order)?,
    };
    let cp = CollectiveParams::new(base.with_eta(eta))?;
    let gen = effective_hamiltonian(&cp, regime, order, target)?;
    let magnitude = gen.magnitude();
    let horizon = match c.horizon {
        Some(h) => h,
        None if magnitude > 0.0 => c.horizon_rate / (2.0 * magnitude),
        None => {
            return Err(Error::config(
                "the generator vanishes; give collective.horizon explicitly",
            ))
        }
    };
    let times: Vec<f64> = (0..c.samples)
        .map(|i| horizon * i as f64 / (c.samples - 1) as f64)
        .collect();
    let opts = GaussianOptions {
        n_qubits: Some(cp.n),
        ..GaussianOptions::default()
    };
    let traj = evolve_gaussian(&gen, &GaussianState::vacuum(), &times, &opts)?;
    let mut warnings = traj.warnings.clone();
    let fock = match c.fock_check {
        Some(n) => Some(fock_occupations(&gen, n, &times, &opts.ode)?),
        None => None,
    };
    let mut rows = Vec::with_capacity(times.len());
    let mut dev = 0.0f64;
    for (k, &t) in times.iter().enumerate() {
        let mut row = vec![t, traj.occupation_a[k], traj.occupation_b[k]];
        if let Some(f) = &fock {
            let (fa, fb) = f[k];
            dev = dev.max((fa - row[1]).abs()).max((fb - row[2]).abs());
            row.extend([fa, fb]);
        }
        rows.push(row);
    }
    if fock.is_some() && dev > 1e-3 {
        warnings.push(format!("Fock check deviates by {dev:.2e}; raise collective.fock_check"));
    }
    let last = times.len() - 1;
    let report = CollectiveReport {
        regime: c.regime,
        order,
        target,
        n_qubits: cp.n,
        g_tilde: cp.g_tilde,
        eta,
        terms: gen.terms.clone(),
        magnitude,
        horizon,
        final_occupation_a: traj.occupation_a[last],
        final_occupation_b: traj.occupation_b[last],
        symplectic_defect: traj.symplectic_defect,
        min_symplectic_eigenvalue: traj.min_symplectic_eigenvalue,
        fock_max_deviation: fock.map(|_| dev),
    };
    Ok(CollectiveRun { report, rows, warnings })
}

/// `collective`: `{prefix}_collective.csv` and `{prefix}_collective.json`.
pub fn run_collective(cfg: &ScenarioConfig) -> Result<CollectiveRun> {
    let run = execute_collective(cfg)?;
    let mut header = vec!["t", "n_a", "n_b"];
    if run.report.fock_max_deviation.is_some() {
        header.extend(["n_a_fock", "n_b_fock"]);
    }
    let mut w = ArtifactWriter::for_config(cfg)?;
    w.numeric_csv("_collective.csv", &header, &run.rows)?;
    Manifest::new("collective", cfg, &run.report, &run.warnings).write(&mut w, "_collective.json")?;
    Ok(run)
}
