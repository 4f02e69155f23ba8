//! Dressed Jaynes–Cummings spectrum and the matrix elements built on it.
//!
//! Level `m` holds the pair |φ_{m,±}⟩ = s|g,m⟩ + c|e,m−1⟩; level 0 is the single state
//! |g,0⟩ (s = 1, c = 0) and every sum over its branch has exactly one term.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{guard, Error, Result};
use crate::hilbert::{Basis, QuantumState, Qubit};
use crate::params::{Branch, ModulationTarget, SystemParams};

/// Detunings and dispersive-regime shorthands.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DerivedDetunings {
    pub delta_minus: f64,
    pub delta_plus: f64,
    /// δ₊ = g0²/Δ₊
    pub small_delta_plus: f64,
    /// δ₋ = g0²/Δ₋, undefined at resonance.
    pub small_delta_minus: Option<f64>,
    /// δ_χ = 4χ0²/Δ₊
    pub delta_chi: f64,
    /// α = g0⁴/Δ₋³, undefined at resonance.
    pub kerr_alpha: Option<f64>,
    /// 𝒟 = sign(Δ₋), undefined at resonance.
    pub detuning_symbol: Option<Branch>,
}

impl DerivedDetunings {
    pub fn new(p: &SystemParams) -> DerivedDetunings {
        let dm = p.delta_minus();
        let dp = p.delta_plus();
        let resonant = dm == 0.0;
        let g2 = p.g0 * p.g0;
        DerivedDetunings {
            delta_minus: dm,
            delta_plus: dp,
            small_delta_plus: g2 / dp,
            small_delta_minus: (!resonant).then(|| g2 / dm),
            delta_chi: 4.0 * p.chi0 * p.chi0 / dp,
            kerr_alpha: (!resonant).then(|| g2 * g2 / (dm * dm * dm)),
            detuning_symbol: (!resonant).then(|| Branch::from_sign(dm)),
        }
    }

    pub fn require_delta_minus(&self) -> Result<f64> {
        self.small_delta_minus
            .ok_or_else(|| Error::invalid("δ₋ is undefined at zero detuning"))
    }

    pub fn require_symbol(&self) -> Result<Branch> {
        self.detuning_symbol
            .ok_or_else(|| Error::invalid("detuning sign is undefined at zero detuning"))
    }
}

/// β_m = √(Δ₋² + 4g0²m).
pub fn beta(p: &SystemParams, m: u32) -> f64 {
    let dm = p.delta_minus();
    (dm * dm + 4.0 * p.g0 * p.g0 * m as f64).sqrt()
}

/// Mixing angle θ_m, principal branch.
///
/// For Δ₋ < 0 the numerator Δ₋ + β_m is evaluated in the cancellation-free form
/// 4g0²m/(β_m − Δ₋).
pub fn mixing_angle(p: &SystemParams, m: u32) -> Result<f64> {
    if m == 0 {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    let dm = p.delta_minus();
    let b = beta(p, m);
    if b < 1e-14 * p.omega0 {
        return Err(Error::Degenerate(
            "g0 = 0 and Δ₋ = 0: the dressed basis is undefined".into(),
        ));
    }
    let num = if dm >= 0.0 {
        dm + b
    } else {
        4.0 * p.g0 * p.g0 * m as f64 / (b - dm)
    };
    Ok(num.atan2(2.0 * p.g0 * (m as f64).sqrt()))
}

/// (s_{m,S}, c_{m,S}).
pub fn amplitudes(p: &SystemParams, m: u32, s: Branch) -> Result<(f64, f64)> {
    if m == 0 {
        return Ok((1.0, 0.0));
    }
    let th = mixing_angle(p, m)?;
    Ok(match s {
        Branch::Plus => (th.sin(), th.cos()),
        Branch::Minus => (th.cos(), -th.sin()),
    })
}

/// λ_{m,S}: λ_0 = 0, λ_m = ω0 m + (Sβ_m − Δ₋)/2.
pub fn eigenfrequency(p: &SystemParams, m: u32, s: Branch) -> f64 {
    if m == 0 {
        return 0.0;
    }
    p.omega0 * m as f64 + (s.sign() * beta(p, m) - p.delta_minus()) / 2.0
}

pub fn dressed_state(p: &SystemParams, basis: Basis, m: u32, s: Branch) -> Result<QuantumState> {
    let m_us = m as usize;
    if m_us > basis.n_max() {
        return Err(Error::invalid(format!("level {m} exceeds n_max {}", basis.n_max())));
    }
    let (sv, cv) = amplitudes(p, m, s)?;
    let mut v = DVector::zeros(basis.dim());
    v[basis.index(Qubit::G, m_us)] = C64::new(sv, 0.0);
    if m > 0 {
        v[basis.index(Qubit::E, m_us - 1)] = C64::new(cv, 0.0);
    }
    QuantumState::from_amplitudes(basis, v)
}

/// Π at level m without the m ≥ 1 precondition: level 0 (and below) carries no Π.
pub(crate) fn pi_raw(p: &SystemParams, k: ModulationTarget, m: i64, t: Branch, s: Branch) -> Result<f64> {
    if m <= 0 {
        return Ok(0.0);
    }
    let m = m as u32;
    let eps = p.depth(k);
    if eps == 0.0 {
        return Ok(0.0);
    }
    let (st, ct) = amplitudes(p, m, t)?;
    let (ss, cs) = amplitudes(p, m, s)?;
    Ok(match k {
        ModulationTarget::Omega => eps * ct * cs,
        ModulationTarget::Coupling => eps * (m as f64).sqrt() * (st * cs + ct * ss),
        ModulationTarget::None => 0.0,
    })
}

/// Π^{(k)}_{m,T,S}, the modulation matrix element inside level m.
///
/// Evaluated with the depth of `k` taken from `params` (zero when `k` is not the target).
pub fn pi_element(p: &SystemParams, k: ModulationTarget, m: u32, t: Branch, s: Branch) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("Π is not defined on the ground level"));
    }
    pi_raw(p, k, m as i64, t, s)
}

/// Λ, L and Λ̄ between levels m and m+2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MatrixElements {
    /// ⟨φ_{m,T}|aσ₋|φ_{m+2,S}⟩
    pub lambda: f64,
    /// ⟨φ_{m,T}|a²|φ_{m+2,S}⟩
    pub l: f64,
    /// Λ − i(χ0/g0)L
    pub lambda_bar: C64,
}

/// Λ_{m+2,T,S} (the index is the upper level).
pub(crate) fn lambda_raw(p: &SystemParams, upper: u32, t: Branch, s: Branch) -> Result<f64> {
    debug_assert!(upper >= 2);
    let (st, _) = amplitudes(p, upper - 2, t)?;
    let (_, cs) = amplitudes(p, upper, s)?;
    Ok(st * cs * ((upper - 1) as f64).sqrt())
}

pub(crate) fn l_raw(p: &SystemParams, upper: u32, t: Branch, s: Branch) -> Result<f64> {
    let (st, ct) = amplitudes(p, upper - 2, t)?;
    let (ss, cs) = amplitudes(p, upper, s)?;
    let m = upper as f64;
    Ok(st * ss * (m * (m - 1.0)).sqrt() + ct * cs * ((m - 1.0) * (m - 2.0)).max(0.0).sqrt())
}

/// g0·Λ̄ = g0Λ − iχ0L, finite even when g0 = 0.
pub(crate) fn g_lambda_bar(p: &SystemParams, upper: u32, t: Branch, s: Branch) -> Result<C64> {
    Ok(C64::new(
        p.g0 * lambda_raw(p, upper, t, s)?,
        -p.chi0 * l_raw(p, upper, t, s)?,
    ))
}

pub fn lambda_elements(p: &SystemParams, m_plus_2: u32, t: Branch, s: Branch) -> Result<MatrixElements> {
    if m_plus_2 < 2 {
        return Err(Error::invalid(
            "Λ couples level m to m+2, so the upper level must be ≥ 2",
        ));
    }
    let lambda = lambda_raw(p, m_plus_2, t, s)?;
    let l = l_raw(p, m_plus_2, t, s)?;
    let lambda_bar = if p.chi0 == 0.0 {
        C64::new(lambda, 0.0)
    } else if p.g0 == 0.0 {
        return Err(Error::invalid("Λ̄ is undefined for g0 = 0 with χ0 ≠ 0"));
    } else {
        C64::new(lambda, -p.chi0 / p.g0 * l)
    };
    Ok(MatrixElements { lambda, l, lambda_bar })
}

/// Branches present at level m (one at the ground level).
pub(crate) fn branches(m: u32) -> &'static [Branch] {
    if m == 0 {
        &[Branch::Plus]
    } else {
        &Branch::BOTH
    }
}

/// Intrinsic shift ν_{m,T} (Bloch–Siegert and squeezing contributions).
pub fn nu_shift(p: &SystemParams, m: u32, t: Branch) -> Result<f64> {
    let lam_mt = eigenfrequency(p, m, t);
    let mut nu = 0.0;
    for &s in branches(m + 2) {
        let num = g_lambda_bar(p, m + 2, t, s)?.norm_sqr();
        if num == 0.0 {
            continue;
        }
        let den = guard(eigenfrequency(p, m + 2, s) - lam_mt, p.omega0, || {
            format!("λ_{{{},{s}}} − λ_{{{m},{t}}}", m + 2)
        })?;
        nu -= num / den;
    }
    if m >= 2 {
        for &s in branches(m - 2) {
            let num = g_lambda_bar(p, m, s, t)?.norm_sqr();
            if num == 0.0 {
                continue;
            }
            let den = guard(lam_mt - eigenfrequency(p, m - 2, s), p.omega0, || {
                format!("λ_{{{m},{t}}} − λ_{{{},{s}}}", m - 2)
            })?;
            nu += num / den;
        }
    }
    Ok(nu)
}

/// λ̄ = λ + ν (the numerical SEFS correction is kept separately).
pub fn corrected_eigenfrequency(p: &SystemParams, m: u32, t: Branch) -> Result<f64> {
    Ok(eigenfrequency(p, m, t) + nu_shift(p, m, t)?)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DressedLevel {
    pub m: u32,
    pub branch: Branch,
    pub lambda: f64,
    pub beta_m: f64,
    pub theta_m: f64,
    pub s: f64,
    pub c: f64,
    pub nu: f64,
    pub lambda_bar: f64,
}

impl DressedLevel {
    pub fn new(p: &SystemParams, m: u32, branch: Branch) -> Result<DressedLevel> {
        let branch = if m == 0 { Branch::Plus } else { branch };
        let (s, c) = amplitudes(p, m, branch)?;
        let lambda = eigenfrequency(p, m, branch);
        let nu = nu_shift(p, m, branch)?;
        Ok(DressedLevel {
            m,
            branch,
            lambda,
            beta_m: beta(p, m),
            theta_m: mixing_angle(p, m)?,
            s,
            c,
            nu,
            lambda_bar: lambda + nu,
        })
    }
}

/// Dressed levels 0..=m_max with their corrected frequencies.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumTable {
    pub m_max: u32,
    pub levels: Vec<DressedLevel>,
    pub detunings: DerivedDetunings,
}

impl SpectrumTable {
    pub fn build(p: &SystemParams, m_max: u32) -> Result<SpectrumTable> {
        p.validate()?;
        let mut levels = Vec::with_capacity(2 * m_max as usize + 1);
        for m in 0..=m_max {
            for &b in branches(m) {
                levels.push(DressedLevel::new(p, m, b)?);
            }
        }
        Ok(SpectrumTable {
            m_max,
            levels,
            detunings: DerivedDetunings::new(p),
        })
    }

    pub fn level(&self, m: u32, s: Branch) -> Result<&DressedLevel> {
        if m > self.m_max {
            return Err(Error::invalid(format!(
                "level {m} beyond the table (m_max = {})",
                self.m_max
            )));
        }
        let idx = if m == 0 {
            0
        } else {
            2 * m as usize - 1 + usize::from(s == Branch::Minus)
        };
        Ok(&self.levels[idx])
    }

    pub fn lambda_bar(&self, m: u32, s: Branch) -> Result<f64> {
        Ok(self.level(m, s)?.lambda_bar)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidityEntry {
    pub name: String,
    /// Value relative to ω0.
    pub ratio: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidityReport {
    pub m_max: u32,
    pub threshold: f64,
    pub entries: Vec<ValidityEntry>,
    /// Order-of-magnitude SEFS estimate, relative to ω0 (informational).
    pub sefs_order: f64,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn violations(&self) -> Vec<&ValidityEntry> {
        self.entries.iter().filter(|e| !e.passed).collect()
    }
}

/// Small-parameter checks on levels 1..=m_max; flags ratios above `threshold` (default 0.1).
pub fn validity_check(p: &SystemParams, m_max: u32, threshold: f64) -> ValidityReport {
    let k = p.target;
    let w = p.omega0;
    let pi = |m: i64, a: Branch, b: Branch| pi_raw(p, k, m, a, b).unwrap_or(f64::NAN);
    let mut branch_diff = 0.0f64;
    let mut offdiag = 0.0f64;
    let mut ladder2 = 0.0f64;
    let mut ladder1 = 0.0f64;
    let mut coupling = 0.0f64;
    let mut squeeze = 0.0f64;
    let degenerate = mixing_angle(p, 1).is_err();
    if !degenerate {
        for m in 1..=m_max as i64 {
            for s in Branch::BOTH {
                let diag_flip = pi(m, s.flip(), s.flip());
                branch_diff = branch_diff.max((pi(m, s, s) - diag_flip).abs());
                offdiag = offdiag.max(pi(m, s, s.flip()).abs());
                for dm in [-2i64, 2] {
                    if m + dm >= 1 {
                        ladder2 = ladder2.max((pi(m + dm, s, s) - diag_flip).abs());
                    }
                }
                for dm in [-1i64, 1] {
                    if m + dm >= 1 {
                        ladder1 = ladder1.max((pi(m + dm, s, s) - diag_flip).abs());
                    }
                }
                for t in branches(m as u32) {
                    let upper = m as u32 + 2;
                    if let (Ok(lam), Ok(l)) = (lambda_raw(p, upper, *t, s), l_raw(p, upper, *t, s)) {
                        coupling = coupling.max((p.g0 * lam).abs());
                        squeeze = squeeze.max((p.chi0 * l).abs());
                    }
                }
            }
        }
    }
    let mm = m_max.max(1) as f64;
    let eps_g = p.depth(ModulationTarget::Coupling);
    let raw = [
        ("pi_branch_difference", branch_diff),
        ("pi_off_diagonal", offdiag),
        ("pi_ladder_difference_2", ladder2),
        ("pi_ladder_difference_1", ladder1),
        ("g0_lambda", coupling),
        ("chi0_l", squeeze),
        ("epsilon", p.epsilon),
        ("g0_sqrt_m", p.g0 * mm.sqrt()),
        ("epsilon_g_sqrt_m", eps_g * mm.sqrt()),
        ("chi0_m", p.chi0.abs() * mm),
    ];
    let entries = raw
        .iter()
        .map(|&(name, v)| {
            let ratio = v / w;
            ValidityEntry {
                name: name.to_string(),
                ratio,
                passed: ratio.is_finite() && ratio <= threshold,
            }
        })
        .collect();
    ValidityReport {
        m_max,
        threshold,
        entries,
        sefs_order: offdiag.max(ladder2).powi(2) / (w * w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fock_operators, jc_hamiltonian, Expectation};

    fn resonant() -> SystemParams {
        SystemParams::new(1.0, 1.0, 0.05)
    }

    fn dispersive() -> SystemParams {
        SystemParams::new(1.0, 0.6, 0.05)
    }

    #[test]
    fn eigenfrequency_examples() {
        assert_eq!(eigenfrequency(&resonant(), 0, Branch::Minus), 0.0);
        assert!((eigenfrequency(&resonant(), 1, Branch::Plus) - 1.05).abs() < 1e-15);
        let want = 1.0 + (0.17f64.sqrt() - 0.4) / 2.0;
        assert!((eigenfrequency(&dispersive(), 1, Branch::Plus) - want).abs() < 1e-14);
    }

    #[test]
    fn resonant_mixing_is_even() {
        let (s, c) = amplitudes(&resonant(), 3, Branch::Plus).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s - h).abs() < 1e-15 && (c - h).abs() < 1e-15);
        assert!(matches!(
            amplitudes(&SystemParams::new(1.0, 1.0, 0.0), 1, Branch::Plus),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn decoupling_limit() {
        for (w, plus_is_ground) in [(0.6, true), (1.4, false)] {
            let p = SystemParams::new(1.0, w, 0.0);
            let (s, c) = amplitudes(&p, 2, Branch::Plus).unwrap();
            if plus_is_ground {
                assert!((s - 1.0).abs() < 1e-15 && c.abs() < 1e-15);
            } else {
                assert!(s.abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dressed_states_are_eigenvectors() {
        for p in [resonant(), dispersive(), SystemParams::new(1.0, 1.3, 0.08)] {
            let b = Basis::new(8).unwrap();
            let h = jc_hamiltonian(&p, b);
            for m in 0..=8u32 {
                for &s in branches(m) {
                    let phi = dressed_state(&p, b, m, s).unwrap();
                    let r = &h.matrix * &phi.amplitudes - &phi.amplitudes * C64::new(eigenfrequency(&p, m, s), 0.0);
                    assert!(r.norm() < 1e-12, "m={m} s={s}");
                }
            }
        }
    }

    #[test]
    fn mean_photon_number_of_dressed_state() {
        let b = Basis::new(4).unwrap();
        let ops = fock_operators(b);
        let phi = dressed_state(&resonant(), b, 1, Branch::Plus).unwrap();
        assert!((phi.expectation(&ops.n).unwrap().re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn pi_examples() {
        let p = resonant().with_modulation(ModulationTarget::Omega, 0.05, 2.0);
        let v = pi_element(&p, ModulationTarget::Omega, 1, Branch::Plus, Branch::Minus).unwrap();
        assert!((v + 0.025).abs() < 1e-15);
        assert!(pi_element(&p, ModulationTarget::Omega, 0, Branch::Plus, Branch::Plus).is_err());
        let p = resonant().with_modulation(ModulationTarget::Coupling, 0.01, 2.0);
        for m in 1..6u32 {
            for s in Branch::BOTH {
                let d = pi_element(&p, ModulationTarget::Coupling, m, s, s).unwrap();
                assert!((d - 0.01 * s.sign() * (m as f64).sqrt()).abs() < 1e-15);
                let o = pi_element(&p, ModulationTarget::Coupling, m, s, s.flip()).unwrap();
                assert!(o.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pi_matches_operator_contraction() {
        let p = dispersive().with_modulation(ModulationTarget::Omega, 0.03, 0.4);
        let b = Basis::new(5).unwrap();
        let ops = fock_operators(b);
        let op = ops.sigma_z.scale(C64::new(0.5 * p.epsilon, 0.0));
        for m in 1..=4u32 {
            for t in Branch::BOTH {
                for s in Branch::BOTH {
                    let bra = dressed_state(&p, b, m, t).unwrap();
                    let ket = dressed_state(&p, b, m, s).unwrap();
                    let direct = bra.amplitudes.dotc(&(&op.matrix * &ket.amplitudes)).re;
                    // (ε/2)σz differs from ε|e⟩⟨e| by a multiple of identity.
                    let shift = if t == s { -0.5 * p.epsilon } else { 0.0 };
                    let pi = pi_element(&p, ModulationTarget::Omega, m, t, s).unwrap();
                    assert!((direct - (pi + shift)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn lambda_matches_contraction() {
        let p = dispersive().with_chi0(0.01);
        let b = Basis::new(8).unwrap();
        let ops = fock_operators(b);
        let asm = ops.a.dot(&ops.sigma_minus);
        let a2 = ops.a.dot(&ops.a);
        for upper in 2..=7u32 {
            for &t in branches(upper - 2) {
                for s in Branch::BOTH {
                    let bra = dressed_state(&p, b, upper - 2, t).unwrap();
                    let ket = dressed_state(&p, b, upper, s).unwrap();
                    let el = lambda_elements(&p, upper, t, s).unwrap();
                    let lam = bra.amplitudes.dotc(&(&asm.matrix * &ket.amplitudes)).re;
                    let l = bra.amplitudes.dotc(&(&a2.matrix * &ket.amplitudes)).re;
                    assert!((el.lambda - lam).abs() < 1e-14);
                    assert!((el.l - l).abs() < 1e-13);
                    assert!((el.lambda_bar - C64::new(lam, -0.2 * l)).norm() < 1e-13);
                }
            }
        }
        let bad = SystemParams::new(1.0, 0.6, 0.0).with_chi0(0.01);
        assert!(lambda_elements(&bad, 2, Branch::Plus, Branch::Plus).is_err());
        assert!(lambda_elements(&p, 1, Branch::Plus, Branch::Plus).is_err());
    }

    #[test]
    fn ground_shift_resonant() {
        let p = resonant();
        let dp = 0.05f64.powi(2) / 2.0;
        let nu0 = nu_shift(&p, 0, Branch::Plus).unwrap();
        let direct: f64 = Branch::BOTH
            .iter()
            .map(|&s| {
                let (_, c) = amplitudes(&p, 2, s).unwrap();
                -p.g0 * p.g0 * c * c / eigenfrequency(&p, 2, s)
            })
            .sum();
        assert!((nu0 - direct).abs() < 1e-16);
        assert!((nu0 + dp).abs() < 2e-3 * dp);
        // With squeezing: λ̄_0 = −(δ₊ + δ_χ/2) to leading order.
        let chi = 0.01;
        let p = resonant().with_chi0(chi);
        let want = -(dp + 2.0 * chi * chi / 2.0);
        let got = corrected_eigenfrequency(&p, 0, Branch::Plus).unwrap();
        assert!((got - want).abs() < 0.01 * want.abs());
    }

    #[test]
    fn ground_shift_matches_second_order_perturbation() {
        // Rabi ground energy minus JC ground energy, to second order in the counter-rotating term.
        let p = SystemParams::new(1.0, 0.9, 0.02);
        let b = Basis::new(10).unwrap();
        let h = crate::hilbert::hamiltonian_at(&p, b, 0.0).unwrap();
        let e0 = h.eigenvalues().unwrap()[0] + 0.5 * p.qubit_omega0;
        let nu0 = nu_shift(&p, 0, Branch::Plus).unwrap();
        assert!((e0 - nu0).abs() < 1e-3 * nu0.abs(), "{e0} vs {nu0}");
    }

    #[test]
    fn dispersive_shift_pattern() {
        let g = 0.01;
        let p = SystemParams::new(1.0, 0.9, g);
        let d = DerivedDetunings::new(&p);
        let lb1 = corrected_eigenfrequency(&p, 1, d.detuning_symbol.unwrap()).unwrap();
        let lb0 = corrected_eigenfrequency(&p, 0, Branch::Plus).unwrap();
        let alpha = d.kerr_alpha.unwrap();
        let want = 1.0 + d.small_delta_minus.unwrap() - d.small_delta_plus - d.delta_chi - alpha;
        assert!(((lb1 - lb0) - want).abs() < 5.0 * alpha.abs());
    }

    #[test]
    fn table_lookup() {
        let t = SpectrumTable::build(&resonant(), 4).unwrap();
        assert_eq!(t.levels.len(), 9);
        let l = t.level(3, Branch::Minus).unwrap();
        assert_eq!((l.m, l.branch), (3, Branch::Minus));
        assert!((l.lambda_bar - l.lambda - l.nu).abs() < 1e-15);
        assert!(t.level(5, Branch::Plus).is_err());
        assert_eq!(t.level(0, Branch::Minus).unwrap().m, 0);
    }

    #[test]
    fn validity_examples() {
        let p = resonant().with_modulation(ModulationTarget::Omega, 0.05, 2.0);
        assert!(validity_check(&p, 2, 0.1).passed());
        let strong = SystemParams::new(1.0, 1.0, 1.0);
        let r = validity_check(&strong, 2, 0.1);
        assert!(r.violations().iter().any(|e| e.name == "g0_sqrt_m"));
        let free = SystemParams::new(1.0, 0.5, 0.0);
        let r = validity_check(&free, 3, 0.1);
        assert!(r.entries.iter().all(|e| e.ratio == 0.0));
    }
}
