//! Physical constants of the modulated qubit-resonator system.
//!
//! Units: ℏ = 1 and every frequency or rate is an angular frequency, usually
//! quoted relative to the cavity frequency `omega0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which Hamiltonian parameter carries the sinusoidal modulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationTarget {
    /// Qubit transition frequency Ω(t) = Ω0 + ε sin(ηt).
    Omega,
    /// Coupling strength g(t) = g0 + ε sin(ηt).
    Coupling,
    None,
}

/// Dressed-level branch label S ∈ {+, −}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+", alias = "plus")]
    Plus,
    #[serde(rename = "-", alias = "minus")]
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    pub fn from_sign(x: f64) -> Branch {
        if x >= 0.0 {
            Branch::Plus
        } else {
            Branch::Minus
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}

/// System and modulation parameters.
///
/// The modulation waveform is fixed to `sin(ηt)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega0: f64,
    #[serde(rename = "Omega0")]
    pub qubit_omega0: f64,
    pub g0: f64,
    pub chi0: f64,
    pub target: ModulationTarget,
    pub epsilon: f64,
    pub eta: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub gamma_phi: f64,
    pub n_qubits: u32,
}

impl SystemParams {
    /// Unmodulated, dissipationless single-qubit system.
    pub fn new(omega0: f64, qubit_omega0: f64, g0: f64) -> Self {
        SystemParams {
            omega0,
            qubit_omega0,
            g0,
            chi0: 0.0,
            target: ModulationTarget::None,
            epsilon: 0.0,
            eta: 0.0,
            kappa: 0.0,
            gamma: 0.0,
            gamma_phi: 0.0,
            n_qubits: 1,
        }
    }

    pub fn with_chi0(mut self, chi0: f64) -> Self {
        self.chi0 = chi0;
        self
    }

    pub fn with_modulation(mut self, target: ModulationTarget, epsilon: f64, eta: f64) -> Self {
        self.target = target;
        self.epsilon = epsilon;
        self.eta = eta;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_dissipation(mut self, kappa: f64, gamma: f64, gamma_phi: f64) -> Self {
        self.kappa = kappa;
        self.gamma = gamma;
        self.gamma_phi = gamma_phi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega0", self.omega0),
            ("Omega0", self.qubit_omega0),
            ("g0", self.g0),
            ("chi0", self.chi0),
            ("epsilon", self.epsilon),
            ("eta", self.eta),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("gamma_phi", self.gamma_phi),
        ];
        if let Some((name, _)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!("{name} is not finite")));
        }
        if self.omega0 <= 0.0 {
            return Err(Error::invalid("omega0 must be positive"));
        }
        for (name, v) in [
            ("g0", self.g0),
            ("epsilon", self.epsilon),
            ("eta", self.eta),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("gamma_phi", self.gamma_phi),
        ] {
            if v < 0.0 {
                return Err(Error::invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.n_qubits == 0 {
            return Err(Error::invalid("n_qubits must be at least 1"));
        }
        Ok(())
    }

    /// Δ₋ = ω0 − Ω0.
    pub fn delta_minus(&self) -> f64 {
        self.omega0 - self.qubit_omega0
    }

    /// Δ₊ = ω0 + Ω0.
    pub fn delta_plus(&self) -> f64 {
        self.omega0 + self.qubit_omega0
    }

    /// Modulation depth seen by parameter `k` (zero unless `k` is the target).
    pub fn depth(&self, k: ModulationTarget) -> f64 {
        if k == self.target && k != ModulationTarget::None {
            self.epsilon
        } else {
            0.0
        }
    }

    /// Ω(t).
    pub fn omega_at(&self, t: f64) -> f64 {
        self.qubit_omega0 + self.depth(ModulationTarget::Omega) * (self.eta * t).sin()
    }

    /// g(t).
    pub fn coupling_at(&self, t: f64) -> f64 {
        self.g0 + self.depth(ModulationTarget::Coupling) * (self.eta * t).sin()
    }

    pub fn is_modulated(&self) -> bool {
        self.target != ModulationTarget::None && self.epsilon > 0.0 && self.eta > 0.0
    }

    pub fn is_dissipative(&self) -> bool {
        self.kappa > 0.0 || self.gamma > 0.0 || self.gamma_phi > 0.0
    }

    /// Modulation period 2π/η, if the Hamiltonian is actually time dependent.
    pub fn period(&self) -> Option<f64> {
        self.is_modulated().then(|| 2.0 * std::f64::consts::PI / self.eta)
    }
}
