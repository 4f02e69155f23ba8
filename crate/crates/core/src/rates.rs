//! First-order (Θ) and second-order (Φ) modulation-induced transition rates.
//!
//! `Θ_{m,T,S}` and `Φ_{m,T,S}` couple the lower dressed state φ_{m−2,T} to the upper state
//! φ_{m,S}; `m` is always the upper (target) level. The general expressions take the actual
//! modulation frequency η, so they stay meaningful off resonance.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{guard, Error, Result};
use crate::linalg::{I, ZERO};
use crate::params::{Branch, ModulationTarget, SystemParams};
use crate::spectrum::{beta, branches, corrected_eigenfrequency, g_lambda_bar, lambda_raw, pi_raw, DerivedDetunings};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub enum Regime {
    General,
    Resonant,
    #[serde(rename = "AJC", alias = "ajc")]
    Ajc,
    #[serde(rename = "DCE", alias = "dce")]
    Dce,
    #[serde(rename = "AntiDCE", alias = "anti-dce", alias = "antidce")]
    AntiDce,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateEntry {
    /// Upper (target) level.
    pub m: u32,
    pub t: Branch,
    pub s: Branch,
    pub k: ModulationTarget,
    pub theta: C64,
    pub phi: C64,
    pub regime: Regime,
}

impl RateEntry {
    pub fn theta_abs(&self) -> f64 {
        self.theta.norm()
    }

    pub fn phi_abs(&self) -> f64 {
        self.phi.norm()
    }

    /// |Θ| for K = 1, |Φ| for K = 2.
    pub fn rate(&self, order: u8) -> f64 {
        if order == 2 {
            self.phi_abs()
        } else {
            self.theta_abs()
        }
    }
}

/// `num/den`, with a collision error only when the numerator is actually nonzero.
fn frac(num: C64, den: f64, omega0: f64, what: impl FnOnce() -> String) -> Result<C64> {
    if num == ZERO {
        return Ok(ZERO);
    }
    Ok(num / guard(den, omega0, what)?)
}

fn check_upper(m: u32) -> Result<()> {
    if m < 2 {
        return Err(Error::invalid("transition rates need an upper level m ≥ 2"));
    }
    Ok(())
}

/// General first-order rate Θ^{(k)}_{m,T,S} at modulation frequency `eta`, k = params.target.
pub fn theta_general(p: &SystemParams, m: u32, t: Branch, s: Branch, eta: f64) -> Result<C64> {
    check_upper(m)?;
    let k = p.target;
    if p.depth(k) == 0.0 {
        return Ok(ZERO);
    }
    let w = p.omega0;
    let mi = m as i64;
    let b = beta(p, m);
    let b2 = beta(p, m - 2);
    let mut tot = ZERO;
    for r in Branch::BOTH {
        let num = g_lambda_bar(p, m, t, r)? * pi_raw(p, k, mi, r, s)?;
        let shift = if r == s.flip() { s.sign() * b } else { 0.0 };
        tot += frac(num, eta - shift, w, || format!("η − {s}β_{m}"))?;
    }
    if m > 2 {
        for r in Branch::BOTH {
            let num = g_lambda_bar(p, m, r, s)? * pi_raw(p, k, mi - 2, t, r)?;
            let shift = if r == t.flip() { t.sign() * b2 } else { 0.0 };
            tot -= frac(num, eta + shift, w, || format!("η + {t}β_{}", m - 2))?;
        }
    }
    if k == ModulationTarget::Coupling {
        tot -= C64::new(p.epsilon * lambda_raw(p, m, t, s)?, 0.0);
    }
    Ok(tot * 0.5)
}

/// General second-order rate Φ^{(k)}_{m,T,S} at modulation frequency `eta`.
pub fn phi_general(p: &SystemParams, m: u32, t: Branch, s: Branch, eta: f64) -> Result<C64> {
    check_upper(m)?;
    let k = p.target;
    if p.depth(k) == 0.0 {
        return Ok(ZERO);
    }
    let w = p.omega0;
    let eta = guard(eta, w, || "η".into())?;
    let mi = m as i64;
    let b = beta(p, m);
    let b2 = beta(p, m - 2);
    let pi = |mm: i64, a: Branch, c: Branch| pi_raw(p, k, mm, a, c);
    // Branch of the lower level; level 0 has a single state.
    let lo = |x: Branch| if m == 2 { Branch::Plus } else { x };
    let glb = |a: Branch, c: Branch| g_lambda_bar(p, m, lo(a), c);
    let (nt, ns) = (t.flip(), s.flip());
    let sb = s.sign() * b;
    let tb2 = t.sign() * b2;

    let pss = pi(mi, s, s)?;
    let pnsns = pi(mi, ns, ns)?;
    let pnss = pi(mi, ns, s)?;
    let ltt = pi(mi - 2, t, t)?;
    let lntnt = pi(mi - 2, nt, nt)?;
    let ltnt = pi(mi - 2, t, nt)?;

    let mut tot = glb(t, s)? * ((pss - ltt).powi(2) / (2.0 * eta * eta));
    let num = glb(nt, ns)? * (pnss * ltnt);
    if num != ZERO {
        let d1 = guard(eta - sb, w, || format!("η − {s}β_{m}"))?;
        let d2 = guard(eta + tb2, w, || format!("η + {t}β_{}", m - 2))?;
        tot -= num / (d1 * d2);
    }
    let pre = glb(t, ns)? * (pnss / eta);
    if pre != ZERO {
        tot += pre
            * (frac(C64::new(pnsns - ltt, 0.0), eta - sb, w, || format!("η − {s}β_{m}"))?
                + frac(C64::new(pss - pnsns, 0.0), 2.0 * eta - sb, w, || {
                    format!("2η − {s}β_{m}")
                })?);
    }
    let pre = glb(nt, s)? * (ltnt / eta);
    if pre != ZERO {
        tot -= pre
            * (frac(C64::new(pss - lntnt, 0.0), eta + tb2, w, || {
                format!("η + {t}β_{}", m - 2)
            })? + frac(C64::new(lntnt - ltt, 0.0), 2.0 * eta + tb2, w, || {
                format!("2η + {t}β_{}", m - 2)
            })?);
    }
    if k == ModulationTarget::Coupling {
        let lam = |a: Branch, c: Branch| lambda_raw(p, m, lo(a), c);
        let mut g = C64::new(lam(t, s)? * (pss - ltt) / eta, 0.0);
        g += frac(C64::new(lam(t, ns)? * pnss, 0.0), eta - sb, w, || {
            format!("η − {s}β_{m}")
        })?;
        g -= frac(C64::new(lam(nt, s)? * ltnt, 0.0), eta + tb2, w, || {
            format!("η + {t}β_{}", m - 2)
        })?;
        tot -= g * p.epsilon;
    }
    Ok(I * tot * 0.25)
}

pub fn general_entry(p: &SystemParams, m: u32, t: Branch, s: Branch, eta: f64) -> Result<RateEntry> {
    Ok(RateEntry {
        m,
        t,
        s,
        k: p.target,
        theta: theta_general(p, m, t, s, eta)?,
        phi: phi_general(p, m, t, s, eta)?,
        regime: Regime::General,
    })
}

/// All general rates for upper levels 2..=m_max at the modulation frequency in `params`.
#[derive(Clone, Debug, Serialize)]
pub struct RateTable {
    pub eta: f64,
    pub m_max: u32,
    pub entries: Vec<RateEntry>,
}

impl RateTable {
    pub fn build(p: &SystemParams, m_max: u32) -> Result<RateTable> {
        p.validate()?;
        let mut entries = Vec::new();
        for m in 2..=m_max {
            for &t in branches(m - 2) {
                for s in Branch::BOTH {
                    entries.push(general_entry(p, m, t, s, p.eta)?);
                }
            }
        }
        Ok(RateTable {
            eta: p.eta,
            m_max,
            entries,
        })
    }

    pub fn get(&self, m: u32, t: Branch, s: Branch) -> Option<&RateEntry> {
        let t = if m == 2 { Branch::Plus } else { t };
        self.entries.iter().find(|e| e.m == m && e.t == t && e.s == s)
    }
}

/// Rate magnitude of the transition (m−2,T) → (m,S) driven at its own K-order resonance,
/// η = (λ̄_{m,S} − λ̄_{m−2,T})/K.
pub fn rate_at_resonance(p: &SystemParams, m: u32, t: Branch, s: Branch, order: u8) -> Result<f64> {
    check_upper(m)?;
    let gap = corrected_eigenfrequency(p, m, s)? - corrected_eigenfrequency(p, m - 2, t)?;
    let eta = gap / order as f64;
    Ok(if order == 2 {
        phi_general(p, m, t, s, eta)?.norm()
    } else {
        theta_general(p, m, t, s, eta)?.norm()
    })
}

/// Resonant-regime (Δ₋ = 0) leading-order rates.
pub fn rates_resonant_closed_form(p: &SystemParams, m: u32, t: Branch, s: Branch) -> Result<RateEntry> {
    check_upper(m)?;
    if p.delta_minus().abs() > 1e-12 * p.omega0 {
        return Err(Error::invalid("resonant closed forms require Δ₋ = 0"));
    }
    if p.g0 == 0.0 {
        return Err(Error::Degenerate("resonant closed forms need g0 > 0".into()));
    }
    let (g, chi, sg, tg) = (p.g0, p.chi0, s.sign(), t.sign());
    let lower = (m - 2) as f64;
    let (theta, phi) = match p.target {
        ModulationTarget::Omega => {
            let x = p.epsilon / (8.0 * p.qubit_omega0);
            if m == 2 {
                let a = sg * g * 2f64.sqrt();
                (
                    C64::new(a * x, 0.0),
                    C64::new(-sg * 2f64.sqrt() * chi / g, 3.0) * (a * x * x),
                )
            } else {
                let a = sg * g * (lower + 1.0).sqrt();
                let bracket = C64::new(-2.0 * chi / g * (sg * (lower + 2.0).sqrt() + tg * lower.sqrt()), 2.0);
                (C64::new(a * x, 0.0), bracket * (a * x * x))
            }
        }
        ModulationTarget::Coupling => {
            let x = p.epsilon / (2.0 * g);
            if m == 2 {
                let a = -sg * g / 2f64.sqrt();
                (
                    C64::new(a * x, 0.0),
                    C64::new(0.0, sg * 2f64.sqrt() * g / p.omega0) * (a * x * x),
                )
            } else {
                let a = -sg * g / 2.0 * (lower + 1.0).sqrt();
                let f = g / p.omega0 * (sg * (lower + 2.0).sqrt() - tg * lower.sqrt());
                (C64::new(a * x, 0.0), C64::new(0.0, f) * (a * x * x))
            }
        }
        ModulationTarget::None => (ZERO, ZERO),
    };
    Ok(RateEntry {
        m,
        t,
        s,
        k: p.target,
        theta,
        phi,
        regime: Regime::Resonant,
    })
}

/// Default bound on g0√m/(|Δ₋|/2) for the dispersive closed forms (m = lower level).
pub const DISPERSIVE_RATIO: f64 = 0.25;

pub fn rates_dispersive_closed_form(
    p: &SystemParams,
    regime: Regime,
    m: u32,
    t: Branch,
    s: Branch,
) -> Result<RateEntry> {
    rates_dispersive_closed_form_with(p, regime, m, t, s, DISPERSIVE_RATIO)
}

/// Dispersive leading-order rates for `regime` with an explicit validity bound.
pub fn rates_dispersive_closed_form_with(
    p: &SystemParams,
    regime: Regime,
    m: u32,
    t: Branch,
    s: Branch,
    max_ratio: f64,
) -> Result<RateEntry> {
    check_upper(m)?;
    let det = DerivedDetunings::new(p);
    let dm = p.delta_minus();
    let sym = det.require_symbol()?;
    let dmin = det.require_delta_minus()?;
    let lower = (m - 2) as f64;
    let ratio = p.g0 * lower.sqrt() / (dm.abs() / 2.0);
    if ratio > max_ratio {
        return Err(Error::Validity(format!(
            "g0√m/(|Δ₋|/2) = {ratio:.3} exceeds {max_ratio} at m = {}",
            m - 2
        )));
    }
    let t = match (m, regime) {
        (2, Regime::Dce) => s,
        (2, Regime::Ajc) => sym,
        (2, Regime::AntiDce) => sym.flip(),
        _ => t,
    };
    let expected = match regime {
        Regime::Ajc => (sym, sym.flip()),
        Regime::Dce => (s, s),
        Regime::AntiDce => (sym.flip(), sym),
        _ => return Err(Error::invalid(format!("{regime:?} is not a dispersive regime"))),
    };
    if regime == Regime::Dce {
        if t != s {
            return Err(Error::invalid("DCE couples equal branches (T = S)"));
        }
    } else if (t, s) != expected {
        return Err(Error::invalid(format!(
            "{regime:?} couples (T, S) = ({}, {}), got ({t}, {s})",
            expected.0, expected.1
        )));
    }
    let (g, chi, w0, wq, dp) = (p.g0, p.chi0, p.omega0, p.qubit_omega0, p.delta_plus());
    let d = sym.sign();
    let omega = p.target == ModulationTarget::Omega;
    let (theta, phi) = match (regime, p.target) {
        (_, ModulationTarget::None) => (ZERO, ZERO),
        (Regime::Ajc, _) => {
            let a = g * (lower + 1.0).sqrt();
            if omega {
                let x = p.epsilon / (2.0 * dp);
                (C64::new(-d * a * x, 0.0), C64::new(0.0, -d * a * x * x * 2.0))
            } else {
                let x = p.epsilon / (2.0 * g);
                let f = g / dp * 4.0 * g * (lower + 1.0) / dm;
                (C64::new(d * a * x, 0.0), C64::new(0.0, -d * a * x * x * f))
            }
        }
        (Regime::Dce, _) => {
            let (sign, root, chi_sign) = if s == sym {
                (1.0, ((lower + 1.0) * (lower + 2.0)).sqrt(), -1.0)
            } else {
                (-1.0, (lower * (lower + 1.0)).sqrt(), 1.0)
            };
            let a = sign * dmin * root;
            if omega {
                let x = p.epsilon / (2.0 * dp);
                let bracket = C64::new(chi_sign * 2.0 * chi / dm * (lower + 1.0), 1.0);
                (C64::new(a * x, 0.0), bracket * (a * x * x * dp / wq))
            } else {
                let x = p.epsilon / (2.0 * g);
                (
                    C64::new(-a * x * 2.0 * wq / dp, 0.0),
                    C64::new(0.0, -a * x * x * dm / wq),
                )
            }
        }
        (Regime::AntiDce, _) => {
            let a = d * dmin * g / dm * (lower * (lower + 1.0) * (lower + 2.0)).sqrt();
            if omega {
                let x = p.epsilon / (2.0 * w0);
                (
                    C64::new(0.5 * a * x, 0.0),
                    C64::new(-2.0 * chi / dm, 1.0) * (0.5 * a * x * x),
                )
            } else {
                let x = p.epsilon / (2.0 * g);
                (
                    C64::new(-a * x * wq / w0, 0.0),
                    C64::new(0.0, -a * x * x * 2.0 * dm / w0),
                )
            }
        }
        _ => unreachable!(),
    };
    Ok(RateEntry {
        m,
        t,
        s,
        k: p.target,
        theta,
        phi,
        regime,
    })
}
