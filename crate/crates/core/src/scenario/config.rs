//! Scenario configuration files.
//!
//! TOML by default, JSON when the file name ends in `.json`. Unknown keys are rejected at
//! every level and the physical parameters are validated on load. The schema is described
//! field by field in `configs/README.md`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::collective::CollectiveRegime;
use crate::dynamics::{Frame, Propagation, TimeGrid};
use crate::effective::LevelKey;
use crate::error::{Error, Result};
use crate::hilbert::{Basis, QuantumState, Qubit};
use crate::ode::{Method, OdeOptions};
use crate::params::{Branch, ModulationTarget, SystemParams};
use crate::spectrum::dressed_state;

use super::tune::{delta_plus_small, ResonanceSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemSection,
    #[serde(default)]
    pub modulation: ModulationSection,
    #[serde(default)]
    pub resonance: ResonanceSection,
    #[serde(default)]
    pub dissipation: DissipationSection,
    /// Defaults to the source level of the resonance.
    #[serde(default)]
    pub initial: Option<InitialState>,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub tune: TuneSection,
    #[serde(default)]
    pub steady: SteadySection,
    #[serde(default)]
    pub validity: ValiditySection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub collective: Option<CollectiveSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default = "one")]
    pub omega0: f64,
    #[serde(rename = "Omega0")]
    pub qubit_omega0: f64,
    pub g0: f64,
    #[serde(default)]
    pub chi0: f64,
    #[serde(default = "one_u32")]
    pub n_qubits: u32,
    /// ω0/2π in Hz; adds a microsecond column to time-series output.
    #[serde(default)]
    pub omega0_hz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSection {
    #[serde(default = "omega_target")]
    pub target: ModulationTarget,
    /// Absolute depth ε.
    #[serde(default)]
    pub depth: Option<f64>,
    /// ε/Ω0 for qubit-frequency modulation, ε/g0 for coupling modulation.
    #[serde(default)]
    pub depth_ratio: Option<f64>,
    /// Explicit η; otherwise it follows from `[resonance]`.
    #[serde(default)]
    pub eta: Option<f64>,
}

impl Default for ModulationSection {
    fn default() -> Self {
        ModulationSection {
            target: ModulationTarget::Omega,
            depth: None,
            depth_ratio: None,
            eta: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimePreset {
    /// |g,0⟩ → |φ_{2,+}⟩ at Δ₋ = 0.
    #[default]
    Resonant,
    /// |g,0⟩ → |φ_{2,−𝒟}⟩.
    Ajc,
    /// |g,0⟩ → |φ_{2,𝒟}⟩.
    Dce,
    /// |φ_{m+2,+}⟩ → |φ_{m,−}⟩ with m = `level`.
    AntiDce,
    /// Explicit `source` and `target`.
    Custom,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftReference {
    /// η = (λ_target − λ_source + shift·δ₊)/K
    #[default]
    Bare,
    /// η = (λ̄_target − λ̄_source + shift·δ₊)/K
    Corrected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub m: u32,
    #[serde(default)]
    pub branch: Option<Branch>,
}

impl LevelSpec {
    fn key(&self) -> Result<LevelKey> {
        match (self.m, self.branch) {
            (0, _) => Ok(LevelKey::ground()),
            (m, Some(b)) => Ok(LevelKey::new(m, b)),
            (m, None) => Err(Error::config(format!("level m = {m} needs a branch"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceSection {
    #[serde(default)]
    pub regime: RegimePreset,
    #[serde(default = "one_u8")]
    pub order: u8,
    #[serde(default)]
    pub source: Option<LevelSpec>,
    #[serde(default)]
    pub target: Option<LevelSpec>,
    /// Lower level m of the anti-DCE preset.
    #[serde(default)]
    pub level: Option<u32>,
    /// Frequency shift in units of δ₊ = g0²/Δ₊.
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub reference: ShiftReference,
    /// Locate η numerically before running.
    #[serde(default)]
    pub tune: bool,
}

impl Default for ResonanceSection {
    fn default() -> Self {
        ResonanceSection {
            regime: RegimePreset::Resonant,
            order: 1,
            source: None,
            target: None,
            level: None,
            shift: 0.0,
            reference: ShiftReference::Bare,
            tune: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateUnit {
    #[default]
    Omega0,
    G0,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationSection {
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub gamma_phi: f64,
    #[serde(default)]
    pub unit: RateUnit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialState {
    /// |g,0⟩
    Zes,
    Dressed {
        m: u32,
        branch: Branch,
    },
    Fock {
        qubit: Qubit,
        n: usize,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    #[default]
    Lindblad,
    Unitary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    #[serde(default)]
    pub dynamics: Dynamics,
    /// Horizon in units of 1/ω0.
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Horizon in microseconds (needs `system.omega0_hz`).
    #[serde(default)]
    pub horizon_us: Option<f64>,
    /// Horizon in units of the transfer period π/θ_K of the resonance.
    #[serde(default)]
    pub horizon_transfers: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Retry with a larger truncation on overflow, up to this n_max.
    #[serde(default = "default_max_n_max")]
    pub max_n_max: usize,
    #[serde(default)]
    pub allow_truncation: bool,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub propagation: Propagation,
    #[serde(default)]
    pub frame: Frame,
    /// Also integrate the effective amplitude equations on the same grid.
    #[serde(default)]
    pub effective: bool,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        EvolutionSection {
            dynamics: Dynamics::Lindblad,
            horizon: None,
            horizon_us: None,
            horizon_transfers: None,
            samples: default_samples(),
            n_max: default_n_max(),
            max_n_max: default_max_n_max(),
            allow_truncation: false,
            rtol: default_rtol(),
            atol: default_atol(),
            method: default_method(),
            propagation: Propagation::Auto,
            frame: Frame::Lab,
            effective: false,
        }
    }
}

impl EvolutionSection {
    pub fn ode(&self) -> OdeOptions {
        OdeOptions::default()
            .with_tol(self.rtol, self.atol)
            .with_method(self.method)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneSection {
    /// Half-width of the scanned window in units of δ₊.
    #[serde(default = "default_half_window")]
    pub half_window: f64,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_horizon_factor")]
    pub horizon_factor: f64,
    #[serde(default = "one")]
    pub grid_step: f64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    /// Truncation for the probe runs; defaults to `evolution.n_max`.
    #[serde(default)]
    pub n_max: Option<usize>,
}

impl Default for TuneSection {
    fn default() -> Self {
        TuneSection {
            half_window: default_half_window(),
            window: None,
            horizon_factor: default_horizon_factor(),
            grid_step: 1.0,
            resolution: default_resolution(),
            n_max: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySection {
    /// Compute the steady state as part of `evolve` runs and sweep rows.
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_averaging")]
    pub averaging_samples: usize,
}

impl Default for SteadySection {
    fn default() -> Self {
        SteadySection {
            enabled: false,
            averaging_samples: default_averaging(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValiditySection {
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Highest level checked; defaults to the upper level of the resonance.
    #[serde(default)]
    pub m_max: Option<u32>,
}

impl Default for ValiditySection {
    fn default() -> Self {
        ValiditySection {
            threshold: default_threshold(),
            m_max: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Eta,
    /// Absolute depth ε.
    Epsilon,
    DepthRatio,
    Shift,
    Kappa,
    Gamma,
    GammaPhi,
    /// κ = γ = γ_φ = value·θ_K.
    DissipationOverTheta,
    Chi0,
    G0,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub range: Option<SweepRange>,
}

impl SweepSection {
    pub fn grid(&self) -> Result<Vec<f64>> {
        match (&self.values, &self.range) {
            (Some(v), None) if !v.is_empty() => Ok(v.clone()),
            (None, Some(r)) => {
                if r.count == 0 {
                    return Err(Error::config("sweep.range.count must be positive"));
                }
                if r.count == 1 {
                    return Ok(vec![r.start]);
                }
                let step = (r.stop - r.start) / (r.count - 1) as f64;
                Ok((0..r.count).map(|i| r.start + step * i as f64).collect())
            }
            _ => Err(Error::config(
                "sweep needs exactly one of a non-empty `values` list or `range`",
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollectiveRegimeName {
    ResonantCenter,
    ResonantSplitPlus,
    ResonantSplitMinus,
    Ajc,
    Dce,
    InverseDce,
}

impl From<CollectiveRegimeName> for CollectiveRegime {
    fn from(r: CollectiveRegimeName) -> CollectiveRegime {
        match r {
            CollectiveRegimeName::ResonantCenter => CollectiveRegime::ResonantCenter,
            CollectiveRegimeName::ResonantSplitPlus => CollectiveRegime::ResonantSplit(Branch::Plus),
            CollectiveRegimeName::ResonantSplitMinus => CollectiveRegime::ResonantSplit(Branch::Minus),
            CollectiveRegimeName::Ajc => CollectiveRegime::Ajc,
            CollectiveRegimeName::Dce => CollectiveRegime::Dce,
            CollectiveRegimeName::InverseDce => CollectiveRegime::InverseDce,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectiveSection {
    pub regime: CollectiveRegimeName,
    /// Defaults to `resonance.order`.
    #[serde(default)]
    pub order: Option<u8>,
    /// Horizon in units of 1/(2|c|), c the largest generator coefficient.
    #[serde(default = "one")]
    pub horizon_rate: f64,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default = "default_collective_samples")]
    pub samples: usize,
    /// Also evolve on a two-mode Fock space with this many quanta per mode.
    #[serde(default)]
    pub fock_check: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_prefix")]
    pub prefix: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_dir(),
            prefix: default_prefix(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn one_u8() -> u8 {
    1
}
fn one_u32() -> u32 {
    1
}
fn omega_target() -> ModulationTarget {
    ModulationTarget::Omega
}
fn default_samples() -> usize {
    1001
}
fn default_n_max() -> usize {
    8
}
fn default_max_n_max() -> usize {
    24
}
fn default_rtol() -> f64 {
    1e-10
}
fn default_atol() -> f64 {
    1e-12
}
fn default_method() -> Method {
    Method::Dop853
}
fn default_half_window() -> f64 {
    5.0
}
fn default_horizon_factor() -> f64 {
    1.3
}
fn default_resolution() -> f64 {
    1e-9
}
fn default_averaging() -> usize {
    64
}
fn default_threshold() -> f64 {
    0.1
}
fn default_collective_samples() -> usize {
    201
}
fn default_dir() -> String {
    "out".into()
}
fn default_prefix() -> String {
    "scenario".into()
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<ScenarioConfig> {
        let cfg: ScenarioConfig = toml::from_str(s).map_err(|e| Error::config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<ScenarioConfig> {
        let cfg: ScenarioConfig = serde_json::from_str(s).map_err(|e| Error::config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ScenarioConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            ScenarioConfig::from_json_str(&text)
        } else {
            ScenarioConfig::from_toml_str(&text)
        };
        parsed.map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Structural checks plus validation of every physical parameter that does not need η.
    pub fn check(&self) -> Result<()> {
        let as_config = |e: Error| match e {
            Error::InvalidParams(m) => Error::Config(m),
            other => other,
        };
        self.base_params().map_err(as_config)?.validate().map_err(as_config)?;
        if !matches!(self.resonance.order, 1 | 2) {
            return Err(Error::config(format!(
                "resonance.order must be 1 or 2, got {}",
                self.resonance.order
            )));
        }
        let m = &self.modulation;
        if m.depth.is_some() && m.depth_ratio.is_some() {
            return Err(Error::config(
                "give either modulation.depth or modulation.depth_ratio, not both",
            ));
        }
        let e = &self.evolution;
        let horizons = [
            e.horizon.is_some(),
            e.horizon_us.is_some(),
            e.horizon_transfers.is_some(),
        ];
        if horizons.iter().filter(|&&h| h).count() > 1 {
            return Err(Error::config(
                "give at most one of horizon, horizon_us, horizon_transfers",
            ));
        }
        if e.horizon_us.is_some() && self.system.omega0_hz.is_none() {
            return Err(Error::config("evolution.horizon_us needs system.omega0_hz"));
        }
        for (name, v) in [
            ("horizon", e.horizon),
            ("horizon_us", e.horizon_us),
            ("horizon_transfers", e.horizon_transfers),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::config(format!("evolution.{name} must be positive")));
                }
            }
        }
        if e.samples < 2 {
            return Err(Error::config("evolution.samples must be at least 2"));
        }
        if e.n_max < 2 {
            return Err(Error::config("evolution.n_max must be at least 2"));
        }
        if !(e.rtol > 0.0 && e.atol > 0.0) {
            return Err(Error::config("solver tolerances must be positive"));
        }
        if let Some(hz) = self.system.omega0_hz {
            if !(hz > 0.0 && hz.is_finite()) {
                return Err(Error::config("system.omega0_hz must be positive"));
            }
        }
        if self.resonance.regime == RegimePreset::AntiDce && self.resonance.level.is_none() {
            return Err(Error::config("the anti-dce preset needs resonance.level"));
        }
        if let Some(s) = &self.sweep {
            s.grid()?;
        }
        if let Some(c) = &self.collective {
            if let Some(o) = c.order {
                if !matches!(o, 1 | 2) {
                    return Err(Error::config("collective.order must be 1 or 2"));
                }
            }
            if c.samples < 2 {
                return Err(Error::config("collective.samples must be at least 2"));
            }
        }
        self.resonance_spec()?;
        Ok(())
    }

    fn depth(&self) -> f64 {
        let m = &self.modulation;
        match (m.depth, m.depth_ratio) {
            (Some(d), _) => d,
            (None, Some(r)) => match m.target {
                ModulationTarget::Omega => r * self.system.qubit_omega0,
                ModulationTarget::Coupling => r * self.system.g0,
                ModulationTarget::None => 0.0,
            },
            (None, None) => 0.0,
        }
    }

    /// System parameters with η left at the explicit value (or zero).
    pub fn base_params(&self) -> Result<SystemParams> {
        let s = &self.system;
        let d = &self.dissipation;
        let unit = match d.unit {
            RateUnit::Omega0 => 1.0,
            RateUnit::G0 => s.g0,
        };
        let mut p = SystemParams::new(s.omega0, s.qubit_omega0, s.g0)
            .with_chi0(s.chi0)
            .with_modulation(self.modulation.target, self.depth(), self.modulation.eta.unwrap_or(0.0))
            .with_dissipation(d.kappa * unit, d.gamma * unit, d.gamma_phi * unit);
        p.n_qubits = s.n_qubits;
        Ok(p)
    }

    pub fn resonance_spec(&self) -> Result<ResonanceSpec> {
        let r = &self.resonance;
        let dm = self.system.omega0 - self.system.qubit_omega0;
        let sign = || {
            if dm == 0.0 {
                Err(Error::config(format!("the {:?} preset needs Δ₋ ≠ 0", r.regime)))
            } else {
                Ok(Branch::from_sign(dm))
            }
        };
        let (mut source, mut target) = match r.regime {
            RegimePreset::Resonant => (LevelKey::ground(), LevelKey::new(2, Branch::Plus)),
            RegimePreset::Ajc => (LevelKey::ground(), LevelKey::new(2, sign()?.flip())),
            RegimePreset::Dce => (LevelKey::ground(), LevelKey::new(2, sign()?)),
            RegimePreset::AntiDce => {
                let m = r.level.unwrap_or(0);
                if m == 0 {
                    return Err(Error::config("resonance.level must be at least 1 for anti-dce"));
                }
                (LevelKey::new(m + 2, Branch::Plus), LevelKey::new(m, Branch::Minus))
            }
            RegimePreset::Custom => {
                if r.source.is_none() || r.target.is_none() {
                    return Err(Error::config(
                        "the custom preset needs resonance.source and resonance.target",
                    ));
                }
                (LevelKey::ground(), LevelKey::ground())
            }
        };
        if let Some(s) = &r.source {
            source = s.key()?;
        }
        if let Some(t) = &r.target {
            target = t.key()?;
        }
        ResonanceSpec::new(source, target, r.order).map_err(|e| Error::config(e.to_string()))
    }

    /// η from the explicit value or the resonance condition (without numerical tuning).
    pub fn nominal_eta(&self, p: &SystemParams) -> Result<f64> {
        if let Some(eta) = self.modulation.eta {
            return Ok(eta);
        }
        let spec = self.resonance_spec()?;
        let k = spec.order as f64;
        let shift = self.resonance.shift * delta_plus_small(p);
        Ok(match self.resonance.reference {
            ShiftReference::Bare => spec.eta_with_bare_shift(p, self.resonance.shift),
            ShiftReference::Corrected => (spec.corrected_gap(p)?.abs() + shift) / k,
        })
    }

    pub fn initial_state(&self, basis: Basis, p: &SystemParams) -> Result<QuantumState> {
        let init = match self.initial {
            Some(s) => s,
            None => {
                let src = self.resonance_spec()?.source;
                if src.m == 0 {
                    InitialState::Zes
                } else {
                    InitialState::Dressed {
                        m: src.m,
                        branch: src.branch,
                    }
                }
            }
        };
        match init {
            InitialState::Zes => QuantumState::basis_state(basis, Qubit::G, 0),
            InitialState::Fock { qubit, n } => QuantumState::basis_state(basis, qubit, n),
            InitialState::Dressed { m, branch } => dressed_state(p, basis, m, branch),
        }
    }

    /// Horizon in units of 1/ω0; `rate` is θ_K of the resonance.
    pub fn horizon(&self, rate: f64) -> Result<f64> {
        let e = &self.evolution;
        if let Some(h) = e.horizon {
            return Ok(h);
        }
        if let Some(us) = e.horizon_us {
            return Ok(
                us * 1e-6 * 2.0 * std::f64::consts::PI * self.system.omega0_hz.unwrap_or(f64::NAN) / self.system.omega0,
            );
        }
        let transfers = e.horizon_transfers.unwrap_or(1.0);
        if !(rate > 0.0) {
            return Err(Error::config(
                "the transition rate vanishes; give evolution.horizon explicitly",
            ));
        }
        Ok(transfers * std::f64::consts::PI / rate)
    }

    pub fn grid(&self, horizon: f64) -> Result<TimeGrid> {
        TimeGrid::new(0.0, horizon, self.evolution.samples)
    }

    /// Upper level checked by the validity report.
    pub fn validity_m_max(&self) -> Result<u32> {
        if let Some(m) = self.validity.m_max {
            return Ok(m);
        }
        let spec = self.resonance_spec()?;
        Ok(spec.source.m.max(spec.target.m).max(1))
    }

    /// Microseconds per unit of ω0·t, when the physical frequency is known.
    pub fn microseconds_per_unit(&self) -> Option<f64> {
        self.system
            .omega0_hz
            .map(|hz| self.system.omega0 / (2.0 * std::f64::consts::PI * hz) * 1e6)
    }
}
