//! One scenario run per grid value of a single scalar, rows evaluated in parallel.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

use super::config::{RateUnit, ScenarioConfig, SweepAxis};
use super::output::{fmt_num, ArtifactWriter, Manifest};
use super::run::{execute_evolve, resolve};

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub eta: Option<f64>,
    /// max_t [1 − P_{g,0}(t)]
    pub max_excitation: Option<f64>,
    /// Observables at the end of the horizon.
    pub mean_n: Option<f64>,
    pub p_e: Option<f64>,
    pub p_g0: Option<f64>,
    pub steady_mean_n: Option<f64>,
    pub steady_p_e: Option<f64>,
    pub steady_p_g0: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    /// θ_K at the unswept configuration, the unit of `dissipation_over_theta`.
    pub reference_rate: Option<f64>,
    pub rows: Vec<SweepRow>,
    pub failures: usize,
}

pub const SWEEP_HEADER: [&str; 10] = [
    "value",
    "eta",
    "max_excitation",
    "mean_n",
    "p_e",
    "p_g0",
    "steady_mean_n",
    "steady_p_e",
    "steady_p_g0",
    "error",
];

/// Configuration of one sweep point.
pub fn point_config(
    cfg: &ScenarioConfig,
    axis: SweepAxis,
    value: f64,
    reference_rate: Option<f64>,
) -> Result<ScenarioConfig> {
    let mut c = cfg.clone();
    c.sweep = None;
    match axis {
        SweepAxis::Eta => {
            c.modulation.eta = Some(value);
            c.resonance.tune = false;
        }
        SweepAxis::Epsilon => {
            c.modulation.depth = Some(value);
            c.modulation.depth_ratio = None;
        }
        SweepAxis::DepthRatio => {
            c.modulation.depth = None;
            c.modulation.depth_ratio = Some(value);
        }
        SweepAxis::Shift => {
            c.modulation.eta = None;
            c.resonance.tune = false;
            c.resonance.shift = value;
        }
        SweepAxis::Kappa => c.dissipation.kappa = value,
        SweepAxis::Gamma => c.dissipation.gamma = value,
        SweepAxis::GammaPhi => c.dissipation.gamma_phi = value,
        SweepAxis::DissipationOverTheta => {
            let theta = reference_rate
                .filter(|r| *r > 0.0)
                .ok_or_else(|| Error::config("dissipation_over_theta needs a nonzero transition rate"))?;
            c.dissipation.unit = RateUnit::Omega0;
            c.dissipation.kappa = value * theta;
            c.dissipation.gamma = value * theta;
            c.dissipation.gamma_phi = value * theta;
        }
        SweepAxis::Chi0 => c.system.chi0 = value,
        SweepAxis::G0 => c.system.g0 = value,
    }
    c.check()?;
    Ok(c)
}

fn row(cfg: &ScenarioConfig, axis: SweepAxis, value: f64, reference_rate: Option<f64>, force: bool) -> SweepRow {
    let mut row = SweepRow {
        value,
        eta: None,
        max_excitation: None,
        mean_n: None,
        p_e: None,
        p_g0: None,
        steady_mean_n: None,
        steady_p_e: None,
        steady_p_g0: None,
        error: None,
    };
    let run = point_config(cfg, axis, value, reference_rate).and_then(|c| execute_evolve(&c, force));
    match run {
        Ok(run) => {
            let r = &run.report;
            row.eta = Some(r.resonance.eta);
            row.max_excitation = Some(r.max_excitation);
            row.mean_n = Some(r.final_observables.mean_n);
            row.p_e = Some(r.final_observables.p_e);
            row.p_g0 = Some(r.final_observables.p_g0);
            if let Some(s) = &r.steady {
                row.steady_mean_n = Some(s.observables.mean_n);
                row.steady_p_e = Some(s.observables.p_e);
                row.steady_p_g0 = Some(s.observables.p_g0);
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Evaluates every grid point; failures are kept per row and do not stop the sweep.
pub fn execute_sweep(cfg: &ScenarioConfig, force: bool) -> Result<SweepReport> {
    let s = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("the sweep command needs a [sweep] section"))?;
    let values = s.grid()?;
    let reference_rate = if s.axis == SweepAxis::DissipationOverTheta {
        resolve(cfg, force)?.resonance.rate
    } else {
        None
    };
    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&v| row(cfg, s.axis, v, reference_rate, force))
        .collect();
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(SweepReport {
        axis: s.axis,
        reference_rate,
        rows,
        failures,
    })
}

/// `sweep`: `{prefix}_sweep.csv` and `{prefix}_sweep.json`.
pub fn run_sweep(cfg: &ScenarioConfig, force: bool) -> Result<SweepReport> {
    let report = execute_sweep(cfg, force)?;
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_num(r.value),
                opt(r.eta),
                opt(r.max_excitation),
                opt(r.mean_n),
                opt(r.p_e),
                opt(r.p_g0),
                opt(r.steady_mean_n),
                opt(r.steady_p_e),
                opt(r.steady_p_g0),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let mut w = ArtifactWriter::for_config(cfg)?;
    w.csv("_sweep.csv", &SWEEP_HEADER, &rows)?;
    let warnings: Vec<String> = report
        .rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("value {}: {e}", r.value)))
        .collect();
    Manifest::new("sweep", cfg, &report, &warnings).write(&mut w, "_sweep.json")?;
    Ok(report)
}
