//! Effective amplitude equations in the dressed basis and reconstruction of the full state.
//!
//! The slow amplitudes b_{m,T} obey
//! ḃ_{m,T} = Σ_S [(Θ e^{iηt} + Φ e^{2iηt}) e^{−it(λ̄_{m+2,S} − λ̄_{m,T})} b_{m+2,S} − (c.c. downward)],
//! integrated with every oscillating term kept.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{guard, Error, Result};
use crate::hilbert::{Basis, QuantumState};
use crate::linalg::{I, ONE, ZERO};
use crate::ode::{Integrator, OdeOptions, OdeStats};
use crate::params::{Branch, SystemParams};
use crate::rates::RateTable;
use crate::spectrum::{amplitudes, beta, branches, eigenfrequency, nu_shift, pi_raw, SpectrumTable};

/// A dressed level (m, S); the ground level is stored with S = +.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
pub struct LevelKey {
    pub m: u32,
    pub branch: Branch,
}

impl LevelKey {
    pub fn new(m: u32, branch: Branch) -> LevelKey {
        LevelKey {
            m,
            branch: if m == 0 { Branch::Plus } else { branch },
        }
    }

    pub fn ground() -> LevelKey {
        LevelKey::new(0, Branch::Plus)
    }
}

impl std::fmt::Display for LevelKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.m == 0 {
            write!(f, "0")
        } else {
            write!(f, "{},{}", self.m, self.branch)
        }
    }
}

/// The set of dressed levels retained in the effective model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ladder {
    pub levels: Vec<LevelKey>,
    /// Whether population reaching the highest level signals an exhausted ladder.
    pub check_top: bool,
}

impl Ladder {
    /// All levels m ≡ parity (mod 2) up to `m_max`, both branches.
    pub fn parity_chain(parity: u32, m_max: u32) -> Ladder {
        let mut levels = Vec::new();
        let mut m = parity % 2;
        while m <= m_max {
            for &b in branches(m) {
                levels.push(LevelKey::new(m, b));
            }
            m += 2;
        }
        Ladder {
            levels,
            check_top: true,
        }
    }

    /// An explicit set of levels (no top-rung check).
    pub fn custom(mut levels: Vec<LevelKey>) -> Ladder {
        levels = levels.into_iter().map(|k| LevelKey::new(k.m, k.branch)).collect();
        levels.sort();
        levels.dedup();
        Ladder {
            levels,
            check_top: false,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn index(&self, key: LevelKey) -> Option<usize> {
        let key = LevelKey::new(key.m, key.branch);
        self.levels.iter().position(|k| *k == key)
    }

    pub fn m_max(&self) -> u32 {
        self.levels.iter().map(|k| k.m).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeVector {
    pub ladder: Ladder,
    pub values: Vec<C64>,
}

impl AmplitudeVector {
    pub fn basis(ladder: Ladder, key: LevelKey) -> Result<AmplitudeVector> {
        let idx = ladder
            .index(key)
            .ok_or_else(|| Error::invalid(format!("level {key} is not on the ladder")))?;
        let mut values = vec![ZERO; ladder.len()];
        values[idx] = ONE;
        Ok(AmplitudeVector { ladder, values })
    }

    pub fn from_values(ladder: Ladder, values: Vec<C64>) -> Result<AmplitudeVector> {
        if values.len() != ladder.len() {
            return Err(Error::invalid("amplitude count does not match the ladder"));
        }
        Ok(AmplitudeVector { ladder, values })
    }

    pub fn get(&self, key: LevelKey) -> C64 {
        self.ladder.index(key).map_or(ZERO, |i| self.values[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[derive(Clone, Debug)]
pub struct EffectiveOptions {
    pub ode: OdeOptions,
    /// Population allowed on the highest rung before the ladder counts as exhausted.
    pub top_threshold: f64,
    /// Extra frequency offsets Δν added to λ̄ of individual levels (numerical SEFS).
    pub sefs: Vec<(LevelKey, f64)>,
}

impl Default for EffectiveOptions {
    fn default() -> Self {
        EffectiveOptions {
            ode: OdeOptions::default(),
            top_threshold: 1e-4,
            sefs: Vec::new(),
        }
    }
}

impl EffectiveOptions {
    pub(crate) fn sefs_of(&self, key: LevelKey) -> f64 {
        self.sefs
            .iter()
            .filter(|(k, _)| LevelKey::new(k.m, k.branch) == key)
            .map(|(_, v)| v)
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct AmplitudeTrajectory {
    pub ladder: Ladder,
    pub times: Vec<f64>,
    pub amplitudes: Vec<Vec<C64>>,
    pub stats: OdeStats,
    pub max_norm_drift: f64,
}

impl AmplitudeTrajectory {
    pub fn population(&self, sample: usize, key: LevelKey) -> f64 {
        self.ladder
            .index(key)
            .map_or(0.0, |i| self.amplitudes[sample][i].norm_sqr())
    }

    pub fn at(&self, sample: usize) -> AmplitudeVector {
        AmplitudeVector {
            ladder: self.ladder.clone(),
            values: self.amplitudes[sample].clone(),
        }
    }
}

struct Coupling {
    lower: usize,
    upper: usize,
    theta: C64,
    phi: C64,
    /// λ̄_upper − λ̄_lower (SEFS included)
    omega: f64,
}

pub fn evolve_effective(
    rates: &RateTable,
    spectrum: &SpectrumTable,
    b0: &AmplitudeVector,
    times: &[f64],
    opts: &EffectiveOptions,
) -> Result<AmplitudeTrajectory> {
    let ladder = &b0.ladder;
    if ladder.m_max() > spectrum.m_max {
        return Err(Error::invalid("spectrum table does not cover the ladder"));
    }
    let lam = |k: LevelKey| -> Result<f64> { Ok(spectrum.lambda_bar(k.m, k.branch)? + opts.sefs_of(k)) };
    let mut couplings = Vec::new();
    for (li, lo) in ladder.levels.iter().enumerate() {
        for (ui, up) in ladder.levels.iter().enumerate() {
            if up.m != lo.m + 2 {
                continue;
            }
            let entry = rates
                .get(up.m, lo.branch, up.branch)
                .ok_or_else(|| Error::invalid(format!("rate table lacks the transition {lo} → {up}")))?;
            couplings.push(Coupling {
                lower: li,
                upper: ui,
                theta: entry.theta,
                phi: entry.phi,
                omega: lam(*up)? - lam(*lo)?,
            });
        }
    }
    let eta = rates.eta;
    let rhs = |t: f64, b: &[C64], db: &mut [C64]| {
        db.iter_mut().for_each(|x| *x = ZERO);
        for c in &couplings {
            let f = c.theta * C64::from_polar(1.0, (eta - c.omega) * t)
                + c.phi * C64::from_polar(1.0, (2.0 * eta - c.omega) * t);
            db[c.lower] += f * b[c.upper];
            db[c.upper] -= f.conj() * b[c.lower];
        }
    };
    let top: Vec<usize> = if ladder.check_top {
        let mm = ladder.m_max();
        (0..ladder.len()).filter(|&i| ladder.levels[i].m == mm).collect()
    } else {
        Vec::new()
    };
    let n0 = b0.norm_sqr();
    let mut y = b0.values.clone();
    let mut out = Vec::with_capacity(times.len());
    let mut drift = 0.0f64;
    let mut integ = Integrator::new(y.len(), opts.ode.clone());
    let stats = integ.integrate(rhs, times.first().copied().unwrap_or(0.0), &mut y, times, |_, _, b| {
        let pop: f64 = top.iter().map(|&i| b[i].norm_sqr()).sum();
        if pop > opts.top_threshold {
            return Err(Error::Truncation {
                population: pop,
                n_max: ladder.m_max() as usize,
                suggested: ladder.m_max() as usize + 4,
            });
        }
        let n: f64 = b.iter().map(|z| z.norm_sqr()).sum();
        drift = drift.max((n - n0).abs());
        out.push(b.to_vec());
        Ok(())
    })?;
    Ok(AmplitudeTrajectory {
        ladder: ladder.clone(),
        times: times.to_vec(),
        amplitudes: out,
        stats,
        max_norm_drift: drift,
    })
}

/// ζ^{(k)}_{m,T}(t), k = params.target, evaluated literally.
pub fn zeta_coefficient(p: &SystemParams, m: u32, t_branch: Branch, t: f64) -> Result<C64> {
    if m == 0 {
        return Ok(ZERO);
    }
    let k = p.target;
    let mi = m as i64;
    let off = pi_raw(p, k, mi, t_branch, t_branch.flip())?;
    if off == 0.0 {
        return Ok(ZERO);
    }
    let eta = guard(p.eta, p.omega0, || "η".into())?;
    let w = p.omega0;
    let tb = t_branch.sign() * beta(p, m);
    let dpi = pi_raw(p, k, mi, t_branch, t_branch)? - pi_raw(p, k, mi, t_branch.flip(), t_branch.flip())?;
    let term = |freq: f64, den: f64, label: &str| -> Result<C64> {
        let den = guard(den, w, || label.to_string())?;
        Ok((C64::from_polar(1.0, freq * t) - ONE) / den)
    };
    let mut bracket = term(tb + eta, eta + tb, "η + Tβ_m")? + term(tb - eta, eta - tb, "η − Tβ_m")?;
    if dpi != 0.0 {
        bracket += (term(tb + 2.0 * eta, 2.0 * eta + tb, "2η + Tβ_m")?
            + term(tb - 2.0 * eta, 2.0 * eta - tb, "2η − Tβ_m")?)
            * (dpi / (2.0 * eta) * -I);
    }
    Ok(I * (off / 2.0) * C64::from_polar(1.0, dpi / eta) * bracket)
}

/// Lab-frame state from effective amplitudes at time `t`.
///
/// `sefs` offsets (if any) enter the intrinsic phases exactly as they entered λ̄.
pub fn reconstruct_state(
    amps: &AmplitudeVector,
    p: &SystemParams,
    t: f64,
    basis: Basis,
    sefs: &[(LevelKey, f64)],
) -> Result<QuantumState> {
    let k = p.target;
    let nu = |key: LevelKey| -> Result<f64> {
        let extra: f64 = sefs
            .iter()
            .filter(|(kk, _)| LevelKey::new(kk.m, kk.branch) == key)
            .map(|(_, v)| v)
            .sum();
        Ok(nu_shift(p, key.m, key.branch)? + extra)
    };
    let mut psi = DVector::<C64>::zeros(basis.dim());
    let mut levels: Vec<u32> = amps.ladder.levels.iter().map(|k| k.m).collect();
    levels.dedup();
    for m in levels {
        if m as usize > basis.n_max() {
            return Err(Error::invalid(format!("level {m} exceeds n_max {}", basis.n_max())));
        }
        for &s in branches(m) {
            let key = LevelKey::new(m, s);
            let a = if m == 0 {
                C64::from_polar(1.0, -t * nu(key)?) * amps.get(key)
            } else {
                let flip = LevelKey::new(m, s.flip());
                let pss = pi_raw(p, k, m as i64, s, s)?;
                let phase = if p.eta > 0.0 {
                    C64::from_polar(1.0, pss * ((p.eta * t).cos() - 1.0) / p.eta)
                } else {
                    ONE
                };
                let direct = C64::from_polar(1.0, -t * nu(key)?) * amps.get(key);
                let mixed = if amps.get(flip) != ZERO {
                    zeta_coefficient(p, m, s, t)? * C64::from_polar(1.0, -t * nu(flip)?) * amps.get(flip)
                } else {
                    ZERO
                };
                phase * (direct - mixed)
            };
            if a == ZERO {
                continue;
            }
            let coeff = C64::from_polar(1.0, -t * eigenfrequency(p, m, s)) * a;
            let (sv, cv) = amplitudes(p, m, s)?;
            psi[2 * m as usize] += coeff * sv;
            if m > 0 {
                psi[2 * (m as usize - 1) + 1] += coeff * cv;
            }
        }
    }
    QuantumState::from_amplitudes(basis, psi)
}
