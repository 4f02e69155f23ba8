//! Collective model for N ≫ 1 qubits.
//!
//! The Holstein–Primakoff boson b̂ replaces the collective spin, leaving two coupled modes.
//! To first order in b̂†b̂/N everything except a cubic remainder is quadratic, so Gaussian
//! states stay Gaussian and first and second moments evolve in closed form.
//!
//! Every [`QuadraticTerm`] stands for `c·e^{−iωt}·M + h.c.`. A number monomial such as Â†Â
//! is its own conjugate, so its effective frequency is `2·Re(c·e^{−iωt})`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{guard, Error, Result};
use crate::linalg::Sparse;
use crate::ode::{Integrator, OdeOptions, OdeStats};
use crate::params::{Branch, ModulationTarget, SystemParams};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Collective constants derived from single-qubit parameters and N = `base.n_qubits`.
#[derive(Clone, Debug, Serialize)]
pub struct CollectiveParams {
    pub base: SystemParams,
    pub n: u32,
    /// g̃0 = √N·g0
    pub g_tilde: f64,
    pub epsilon_omega: f64,
    /// ε̃_g = √N·ε_g
    pub epsilon_g_tilde: f64,
    /// β = √(Δ₋² + 4g̃0²)
    pub beta: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    /// δ̃₊ = g̃0²/Δ₊
    pub delta_tilde_plus: f64,
    /// δ̃₋ = g̃0²/Δ₋, undefined at resonance.
    pub delta_tilde_minus: Option<f64>,
    /// δ_χ = 4χ0²/Δ₊
    pub delta_chi: f64,
}

impl CollectiveParams {
    pub fn new(base: SystemParams) -> Result<CollectiveParams> {
        base.validate()?;
        let n = base.n_qubits;
        let root = (n as f64).sqrt();
        let g = root * base.g0;
        let dm = base.delta_minus();
        let dp = base.delta_plus();
        if dp <= 0.0 {
            return Err(Error::invalid("Δ₊ must be positive"));
        }
        let beta = (dm * dm + 4.0 * g * g).sqrt();
        Ok(CollectiveParams {
            n,
            g_tilde: g,
            epsilon_omega: base.depth(ModulationTarget::Omega),
            epsilon_g_tilde: root * base.depth(ModulationTarget::Coupling),
            beta,
            beta_plus: (beta + dm) / 2.0,
            beta_minus: (beta - dm) / 2.0,
            delta_tilde_plus: g * g / dp,
            delta_tilde_minus: (dm != 0.0).then(|| g * g / dm),
            delta_chi: 4.0 * base.chi0 * base.chi0 / dp,
            base,
        })
    }

    pub fn delta_minus(&self) -> f64 {
        self.base.delta_minus()
    }

    pub fn delta_plus(&self) -> f64 {
        self.base.delta_plus()
    }

    pub fn eta(&self) -> f64 {
        self.base.eta
    }

    fn require_delta_tilde_minus(&self) -> Result<f64> {
        self.delta_tilde_minus
            .ok_or_else(|| Error::invalid("δ̃₋ is undefined at zero detuning"))
    }
}

/// Quadratic monomials of the two modes. In the lab-frame split the modes are (â, b̂).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Monomial {
    /// Â²
    AA,
    /// ÂB̂
    AB,
    /// B̂²
    BB,
    /// Â†Â
    NumberA,
    /// B̂†B̂
    NumberB,
    /// Â†B̂
    Hop,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadraticTerm {
    pub monomial: Monomial,
    pub coeff: C64,
    /// ω in e^{−iωt}.
    pub freq: f64,
}

impl QuadraticTerm {
    pub fn new(monomial: Monomial, coeff: C64, freq: f64) -> QuadraticTerm {
        QuadraticTerm { monomial, coeff, freq }
    }

    fn at(&self, t: f64) -> C64 {
        self.coeff * C64::from_polar(1.0, -self.freq * t)
    }
}

/// A quadratic two-mode Hamiltonian, each term implicitly accompanied by its conjugate.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct QuadraticGenerator {
    pub terms: Vec<QuadraticTerm>,
}

/// Mode-space matrices of H = α†Mα + ½(α†Gα†ᵀ + h.c.) with α = (Â, B̂).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeMatrices {
    pub m: [[C64; 2]; 2],
    pub g: [[C64; 2]; 2],
}

impl QuadraticGenerator {
    pub fn zero() -> QuadraticGenerator {
        QuadraticGenerator::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == C64::new(0.0, 0.0))
    }

    pub fn push(&mut self, monomial: Monomial, coeff: C64, freq: f64) {
        self.terms.push(QuadraticTerm::new(monomial, coeff, freq));
    }

    /// Sum of the coefficients multiplying `monomial` (time phases ignored).
    pub fn coefficient(&self, monomial: Monomial) -> C64 {
        self.terms
            .iter()
            .filter(|t| t.monomial == monomial)
            .map(|t| t.coeff)
            .sum()
    }

    /// Largest coefficient modulus, the magnitude used to compare generators.
    pub fn magnitude(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    pub fn matrices(&self, t: f64) -> ModeMatrices {
        let z = C64::new(0.0, 0.0);
        let mut m = [[z; 2]; 2];
        let mut g = [[z; 2]; 2];
        for term in &self.terms {
            let c = term.at(t);
            match term.monomial {
                Monomial::AA => g[0][0] += 2.0 * c.conj(),
                Monomial::BB => g[1][1] += 2.0 * c.conj(),
                Monomial::AB => {
                    g[0][1] += c.conj();
                    g[1][0] += c.conj();
                }
                Monomial::NumberA => m[0][0] += 2.0 * c.re,
                Monomial::NumberB => m[1][1] += 2.0 * c.re,
                Monomial::Hop => {
                    m[0][1] += c;
                    m[1][0] += c.conj();
                }
            }
        }
        ModeMatrices { m, g }
    }

    /// Drift S(t) of the quadratures (x_A, p_A, x_B, p_B), α = (x + ip)/√2.
    pub fn drift(&self, t: f64) -> [[f64; 4]; 4] {
        let ModeMatrices { m, g } = self.matrices(t);
        let mut s = [[0.0; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                let (mr, mi, gr, gi) = (m[i][j].re, m[i][j].im, g[i][j].re, g[i][j].im);
                s[2 * i][2 * j] = mi + gi;
                s[2 * i][2 * j + 1] = mr - gr;
                s[2 * i + 1][2 * j] = -(mr + gr);
                s[2 * i + 1][2 * j + 1] = mi - gi;
            }
        }
        s
    }

    /// Dense Hamiltonian on the two-mode Fock space truncated at `n_max` quanta per mode.
    pub fn fock_matrix(&self, n_max: usize, t: f64) -> DMatrix<C64> {
        let (a, b) = two_mode_ladders(n_max);
        let d = a.nrows();
        let mut h = DMatrix::<C64>::zeros(d, d);
        for term in &self.terms {
            let c = term.at(t);
            let op = match term.monomial {
                Monomial::AA => &a * &a,
                Monomial::AB => &a * &b,
                Monomial::BB => &b * &b,
                Monomial::NumberA => a.adjoint() * &a,
                Monomial::NumberB => b.adjoint() * &b,
                Monomial::Hop => a.adjoint() * &b,
            };
            h += &op * c + op.adjoint() * c.conj();
        }
        h
    }
}

/// Ladder operators of modes A and B on the product space, index n_A·(n_max+1) + n_B.
fn two_mode_ladders(n_max: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let k = n_max + 1;
    let d = k * k;
    let mut a = DMatrix::<C64>::zeros(d, d);
    let mut b = DMatrix::<C64>::zeros(d, d);
    for na in 0..k {
        for nb in 0..k {
            let idx = na * k + nb;
            if na > 0 {
                a[((na - 1) * k + nb, idx)] = C64::new((na as f64).sqrt(), 0.0);
            }
            if nb > 0 {
                b[(na * k + nb - 1, idx)] = C64::new((nb as f64).sqrt(), 0.0);
            }
        }
    }
    (a, b)
}

/// The cubic remainder −(g̃/2N)(â+â†)(b̂†²b̂ + b̂†b̂²), kept only as a record.
#[derive(Clone, Debug, Serialize)]
pub struct NonGaussianDescriptor {
    pub prefactor: f64,
    pub expression: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct HpSplit {
    pub jc: QuadraticGenerator,
    pub gaussian: QuadraticGenerator,
    pub non_gaussian: NonGaussianDescriptor,
    pub modulation: QuadraticGenerator,
}

/// H = H_JC + H_G + H_NG + H_m in the lab-frame modes (â, b̂).
///
/// The counter-rotating coupling in H_G carries the full g̃(t), so under coupling modulation
/// its sinusoidal part lives in `gaussian` while `modulation` holds only the rotating part.
pub fn hp_hamiltonian_split(cp: &CollectiveParams) -> HpSplit {
    let p = &cp.base;
    let g = cp.g_tilde;
    let eta = p.eta;
    // ε sin(ηt) = (iε/2)e^{−iηt} + c.c.
    let half_sin = |eps: f64| C64::new(0.0, eps / 2.0);

    let mut jc = QuadraticGenerator::zero();
    jc.push(Monomial::NumberA, (p.omega0 / 2.0).into(), 0.0);
    jc.push(Monomial::NumberB, (p.qubit_omega0 / 2.0).into(), 0.0);
    jc.push(Monomial::Hop, g.into(), 0.0);

    let mut gaussian = QuadraticGenerator::zero();
    gaussian.push(Monomial::AB, g.into(), 0.0);
    // iχ0(â†² − â²) = (−iχ0)â² + h.c.
    gaussian.push(Monomial::AA, C64::new(0.0, -p.chi0), 0.0);

    let mut modulation = QuadraticGenerator::zero();
    if cp.epsilon_omega > 0.0 {
        modulation.push(Monomial::NumberB, half_sin(cp.epsilon_omega), eta);
    }
    let eg = cp.epsilon_g_tilde;
    if eg > 0.0 {
        // ÂB̂ + h.c. absorbs both exponentials of sin(ηt) directly.
        gaussian.push(Monomial::AB, half_sin(eg), eta);
        gaussian.push(Monomial::AB, -half_sin(eg), -eta);
        modulation.push(Monomial::Hop, half_sin(eg), eta);
        modulation.push(Monomial::Hop, -half_sin(eg), -eta);
    }
    HpSplit {
        jc,
        gaussian,
        non_gaussian: NonGaussianDescriptor {
            prefactor: -g / (2.0 * cp.n as f64),
            expression: "(a + a†)(b†² b + b† b²)",
        },
        modulation,
    }
}

/// Free-evolution map: â = u00·Â_h + u01·B̂_h, b̂ = u10·Â_h + u11·B̂_h. The matrix is unitary.
pub fn heisenberg_transform(cp: &CollectiveParams, t: f64) -> Result<[[C64; 2]; 2]> {
    if !(cp.beta > 0.0) {
        return Err(Error::Degenerate("β = 0: no coupling and no detuning".into()));
    }
    let pre = C64::from_polar(1.0 / cp.beta, -t * cp.delta_plus() / 2.0);
    let em = C64::from_polar(1.0, -t * cp.beta / 2.0);
    let ep = em.conj();
    let g = cp.g_tilde;
    let mix = pre * g * (em - ep);
    Ok([
        [pre * (cp.beta_plus * em + cp.beta_minus * ep), mix],
        [mix, pre * (cp.beta_minus * em + cp.beta_plus * ep)],
    ])
}

/// Small c-number functions of the ansatz relating (Â_h, B̂_h) to the slow (Â, B̂).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnsatzCorrections {
    pub f_a: C64,
    pub f_b: C64,
    pub f_ab: C64,
    pub f_2: C64,
}

/// (e^{iwt} − 1)/w
fn ramp(w: f64, t: f64) -> C64 {
    (C64::from_polar(1.0, w * t) - 1.0) / w
}

struct Ansatz {
    eta: f64,
    beta: f64,
    bp: f64,
    bm: f64,
    /// Weight of the bare e^{iSηt} term in F_AB and F_2: −Δ₋ for Ω, 4δ̃₋·Δ₋ = 4g̃0² for g.
    bare: f64,
    /// Prefactor of F_AB and F_2 without the depth: g̃0 for Ω, Δ₋ for g.
    ab_scale: f64,
    depth: f64,
    k: ModulationTarget,
    g: f64,
    dm: f64,
}

impl Ansatz {
    fn new(cp: &CollectiveParams, k: ModulationTarget) -> Result<Ansatz> {
        let eta = cp.eta();
        let w0 = cp.base.omega0;
        guard(eta, w0, || "η".into())?;
        guard(eta - cp.beta, w0, || "η − β".into())?;
        guard(cp.beta, w0, || "β".into())?;
        let (g, dm) = (cp.g_tilde, cp.delta_minus());
        let (depth, bare, ab_scale) = match k {
            ModulationTarget::Omega => (cp.epsilon_omega, -dm, g),
            ModulationTarget::Coupling => (cp.epsilon_g_tilde, 4.0 * g * g, 1.0),
            ModulationTarget::None => return Err(Error::invalid("ansatz corrections need a modulation target")),
        };
        Ok(Ansatz {
            eta,
            beta: cp.beta,
            bp: cp.beta_plus,
            bm: cp.beta_minus,
            bare,
            ab_scale,
            depth,
            k,
            g,
            dm,
        })
    }

    fn b2(&self) -> f64 {
        2.0 * self.beta * self.beta
    }

    /// Bracket of F_A and F_B: u·ramp(η) + v·[ramp(η+β) + ramp(η−β)] + c.c.
    fn diagonal(&self, u: f64, v: f64, t: f64) -> f64 {
        let (e, b) = (self.eta, self.beta);
        let z = u * ramp(e, t) + v * (ramp(e + b, t) + ramp(e - b, t));
        2.0 * z.re
    }

    fn f_a(&self, t: f64) -> f64 {
        match self.k {
            ModulationTarget::Omega => self.depth * self.g * self.g / self.b2() * self.diagonal(2.0, -1.0, t),
            _ => self.depth * self.g * self.dm / self.b2() * self.diagonal(2.0, -1.0, t),
        }
    }

    fn f_b(&self, t: f64) -> f64 {
        match self.k {
            // g̃0²·(2 + Δ₋²/g̃0²) written without dividing by g̃0.
            ModulationTarget::Omega => {
                let (g2, d2) = (self.g * self.g, self.dm * self.dm);
                let e = self.eta;
                let z = (2.0 * g2 + d2) * ramp(e, t) + g2 * (ramp(e + self.beta, t) + ramp(e - self.beta, t));
                self.depth / self.b2() * 2.0 * z.re
            }
            _ => self.depth * self.g * self.dm / self.b2() * self.diagonal(-2.0, 1.0, t),
        }
    }

    /// Σ_S [bare·X(Sη) + β₊·X(S(η+Sβ)) − β₋·X(S(η−Sβ))] with the bare weight of F_AB.
    fn ab_sum(&self, x: impl Fn(f64, f64) -> C64) -> C64 {
        let (e, b) = (self.eta, self.beta);
        let bare_weight = match self.k {
            ModulationTarget::Omega => self.bare,
            // Δ₋ multiplies the β± terms but 4δ̃₋Δ₋ = 4g̃0² is finite at Δ₋ = 0.
            _ => self.bare,
        };
        let (wp, wm) = match self.k {
            ModulationTarget::Omega => (self.bp, self.bm),
            _ => (self.dm * self.bp, self.dm * self.bm),
        };
        [1.0, -1.0]
            .iter()
            .map(|&s| {
                bare_weight * x(s * e, e) + wp * x(s * (e + s * b), e + s * b) - wm * x(s * (e - s * b), e - s * b)
            })
            .sum()
    }

    fn f_ab(&self, t: f64) -> C64 {
        let pre = self.depth * self.ab_scale / self.b2();
        // X(Sw, w) = (e^{iSwt} − 1)/w
        pre * self.ab_sum(|sw, w| (C64::from_polar(1.0, sw * t) - 1.0) / w)
    }

    fn f_2_integrand(&self, tau: f64) -> C64 {
        let sum = self.ab_sum(|sw, _| C64::from_polar(1.0, sw * tau));
        (self.f_a(tau) - self.f_b(tau)) * (sum - sum.conj())
    }

    fn f_2(&self, t: f64, rtol: f64) -> C64 {
        let pre = self.depth * self.ab_scale / self.b2();
        let w_max = self.eta + self.beta;
        pre * integrate(|tau| self.f_2_integrand(tau), 0.0, t, w_max, rtol)
    }
}

/// F_A, F_B, F_AB and F_2 for modulation of `k` at time t; F_2 by adaptive quadrature.
pub fn ansatz_corrections(cp: &CollectiveParams, k: ModulationTarget, t: f64) -> Result<AnsatzCorrections> {
    let an = Ansatz::new(cp, k)?;
    Ok(AnsatzCorrections {
        f_a: an.f_a(t).into(),
        f_b: an.f_b(t).into(),
        f_ab: an.f_ab(t),
        f_2: an.f_2(t, 1e-8),
    })
}

// Gauss–Kronrod 7/15 abscissae and weights on [−1, 1], listed from the edge inwards.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &impl Fn(f64) -> C64, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let pair = f(c - h * XGK[j]) + f(c + h * XGK[j]);
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive Gauss–Kronrod quadrature. The interval is first cut into pieces no longer than
/// half a period of the fastest oscillation `w_max`.
pub fn integrate(f: impl Fn(f64) -> C64, a: f64, b: f64, w_max: f64, rtol: f64) -> C64 {
    if b == a {
        return C64::new(0.0, 0.0);
    }
    let pieces = if w_max > 0.0 {
        (((b - a).abs() * w_max / PI).ceil() as usize).clamp(1, 1 << 20)
    } else {
        1
    };
    let width = (b - a) / pieces as f64;
    let mut total = C64::new(0.0, 0.0);
    let mut stack = Vec::new();
    for i in 0..pieces {
        let lo = a + width * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + width };
        stack.push((lo, hi, 0u32));
        while let Some((lo, hi, depth)) = stack.pop() {
            let (est, err) = gk15(&f, lo, hi);
            let floor = 1e-15 * est.norm().max(f64::MIN_POSITIVE);
            if err <= (rtol * est.norm()).max(floor) || depth >= 40 {
                total += est;
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((lo, mid, depth + 1));
                stack.push((mid, hi, depth + 1));
            }
        }
    }
    total
}

/// Resonances of the collective effective Hamiltonians.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollectiveRegime {
    /// Δ₋ = 0, η ≈ 2ω0 (order 1) or ω0 (order 2).
    ResonantCenter,
    /// Δ₋ = 0, η ≈ 2(ω0 ± g̃0) or ω0 ± g̃0.
    ResonantSplit(Branch),
    /// Dispersive, η ≈ Δ₊ or Δ₊/2.
    Ajc,
    /// Dispersive, η ≈ 2ω0 or ω0.
    Dce,
    /// Dispersive, η ≈ 2Ω0 or Ω0.
    InverseDce,
}

impl CollectiveRegime {
    fn is_resonant(self) -> bool {
        matches!(
            self,
            CollectiveRegime::ResonantCenter | CollectiveRegime::ResonantSplit(_)
        )
    }
}

fn check_regime(cp: &CollectiveParams, regime: CollectiveRegime, order: u8) -> Result<()> {
    if order != 1 && order != 2 {
        return Err(Error::invalid(format!("resonance order must be 1 or 2, got {order}")));
    }
    let dm = cp.delta_minus();
    if regime.is_resonant() {
        if dm.abs() > 1e-12 * cp.base.omega0 {
            return Err(Error::Unsupported(format!("{regime:?} needs Δ₋ = 0, got {dm}")));
        }
    } else if !(dm.abs() > 2.0 * cp.g_tilde.abs()) {
        return Err(Error::Unsupported(format!(
            "{regime:?} needs the dispersive regime |Δ₋| > 2g̃0, got Δ₋ = {dm}, g̃0 = {}",
            cp.g_tilde
        )));
    }
    Ok(())
}

/// The η that nulls the printed phase of the effective Hamiltonian (δ_χ phases aside).
pub fn collective_resonance_eta(cp: &CollectiveParams, regime: CollectiveRegime, order: u8) -> Result<f64> {
    check_regime(cp, regime, order)?;
    let k = order as f64;
    let (w0, q0, dtp) = (cp.base.omega0, cp.base.qubit_omega0, cp.delta_tilde_plus);
    let numerator = match regime {
        CollectiveRegime::ResonantCenter => 2.0 * w0 - 2.0 * dtp,
        CollectiveRegime::ResonantSplit(s) => 2.0 * w0 + 2.0 * s.sign() * cp.g_tilde - 2.0 * dtp,
        CollectiveRegime::Ajc => cp.delta_plus() - 2.0 * dtp,
        CollectiveRegime::Dce => 2.0 * w0 + 2.0 * cp.require_delta_tilde_minus()? - 2.0 * dtp,
        CollectiveRegime::InverseDce => 2.0 * q0 - 2.0 * cp.require_delta_tilde_minus()? - 2.0 * dtp,
    };
    Ok(numerator / k)
}

/// Effective Hamiltonian of the slow modes (Â, B̂) near a K-order resonance.
///
/// Coefficients and phases are taken term by term from the collective-model expressions;
/// the Â² term carries an extra e^{2itδ_χ} and ÂB̂ an extra e^{itδ_χ}.
pub fn effective_hamiltonian(
    cp: &CollectiveParams,
    regime: CollectiveRegime,
    order: u8,
    k: ModulationTarget,
) -> Result<QuadraticGenerator> {
    check_regime(cp, regime, order)?;
    let (w0, q0) = (cp.base.omega0, cp.base.qubit_omega0);
    let g = cp.g_tilde;
    let (dm, dp) = (cp.delta_minus(), cp.delta_plus());
    let dtp = cp.delta_tilde_plus;
    let eta = cp.eta();
    let eo = cp.epsilon_omega;
    let eg = cp.epsilon_g_tilde;
    let first = order == 1;
    let depth = match k {
        ModulationTarget::Omega => eo,
        ModulationTarget::Coupling => eg,
        ModulationTarget::None => return Err(Error::invalid("effective Hamiltonian needs a modulation target")),
    };
    if depth == 0.0 {
        return Ok(QuadraticGenerator::zero());
    }
    if k == ModulationTarget::Coupling && !(g > 0.0) {
        return Err(Error::invalid("coupling modulation needs g̃0 > 0"));
    }
    let go = eg / (2.0 * g);

    // (prefactor, [c_AA, c_AB, c_BB], phase Θ) with H = prefactor·[...]·e^{−itΘ}.
    let (pre, bracket, theta): (C64, [f64; 3], f64) = match regime {
        CollectiveRegime::ResonantCenter => {
            let base = g * g / (2.0 * w0);
            let x = eo / (4.0 * q0);
            if k == ModulationTarget::Coupling {
                return Ok(QuadraticGenerator::zero());
            }
            if first {
                (I * base * x, [1.0, 0.0, -1.0], 2.0 * w0 - 2.0 * dtp - eta)
            } else {
                ((-base * x * x * 8.0).into(), [1.0, 0.0, -1.0], 2.0 * (w0 - dtp - eta))
            }
        }
        CollectiveRegime::ResonantSplit(branch) => {
            let s = branch.sign();
            let t1 = 2.0 * w0 + 2.0 * s * g - 2.0 * dtp - eta;
            let t2 = 2.0 * (w0 + s * g - dtp - eta);
            let x = eo / (8.0 * q0);
            match (k, first) {
                (ModulationTarget::Omega, true) => (I * g * x, [s * 0.5, 1.0, s * 0.5], t1),
                (ModulationTarget::Omega, false) => ((-g * x * x / 4.0).into(), [s * 5.0, 14.0, s * 5.0], t2),
                (_, true) => (-I * g * 0.5 * go, [s * 0.5, 1.0, s * 0.5], t1),
                (_, false) => ((g * 0.5 * go * go * 2.0 * g / w0).into(), [0.5, s, 0.5], t2),
            }
        }
        CollectiveRegime::Ajc => {
            let r = g / dm;
            let br = [-r, 1.0, r];
            let t1 = dp - 2.0 * dtp - eta;
            let t2 = dp - 2.0 * dtp - 2.0 * eta;
            let x = eo / (2.0 * dp);
            match (k, first) {
                (ModulationTarget::Omega, true) => (I * g * x, br, t1),
                (ModulationTarget::Omega, false) => ((-g * x * x * 2.0).into(), br, t2),
                (_, true) => (-I * g * go, br, t1),
                (_, false) => ((-g * go * go * (2.0 * g / dp).powi(2) * 5.0).into(), br, t2),
            }
        }
        CollectiveRegime::Dce => {
            let dtm = cp.require_delta_tilde_minus()?;
            let r = g / dm;
            let t1 = 2.0 * w0 + 2.0 * dtm - 2.0 * dtp - eta;
            let t2 = 2.0 * (w0 + dtm - dtp - eta);
            let x = eo / (2.0 * q0);
            let lead = dtm * q0 / dp;
            let lead_g = 2.0 * dtm * q0 / dp;
            match (k, first) {
                (ModulationTarget::Omega, true) => (I * lead * x, [1.0, 2.0 * r, r * r], t1),
                (ModulationTarget::Omega, false) => ((-lead * x * x).into(), [1.0, 4.0 * r, 3.0 * r * r], t2),
                (_, true) => (-I * lead_g * go, [1.0, 2.0 * r, r * r], t1),
                (_, false) => (
                    (lead_g * go * go * dp * dm / (2.0 * q0 * q0)).into(),
                    [1.0, 2.0 * r, r * r],
                    t2,
                ),
            }
        }
        CollectiveRegime::InverseDce => {
            let dtm = cp.require_delta_tilde_minus()?;
            let r = g / dm;
            let t1 = 2.0 * q0 - 2.0 * dtm - 2.0 * dtp - eta;
            let t2 = 2.0 * (q0 - dtm - dtp - eta);
            let x = eo / (2.0 * q0);
            let lead = dtm * w0 / dp;
            let lead_g = 2.0 * dtm * w0 / dp;
            match (k, first) {
                (ModulationTarget::Omega, true) => (-I * lead * x, [r * r, -2.0 * r, 1.0], t1),
                (ModulationTarget::Omega, false) => ((lead * x * x).into(), [3.0 * r * r, -4.0 * r, 1.0], t2),
                (_, true) => (I * lead_g * go, [r * r, -2.0 * r, 1.0], t1),
                (_, false) => (
                    (lead_g * go * go * dp * dm / (2.0 * w0 * w0)).into(),
                    [r * r, -2.0 * r, 1.0],
                    t2,
                ),
            }
        }
    };

    let dchi = cp.delta_chi;
    let mut gen = QuadraticGenerator::zero();
    for (monomial, c, shift) in [
        (Monomial::AA, bracket[0], 2.0 * dchi),
        (Monomial::AB, bracket[1], dchi),
        (Monomial::BB, bracket[2], 0.0),
    ] {
        if c != 0.0 {
            gen.push(monomial, pre * c, theta - shift);
        }
    }
    Ok(gen)
}

/// First moments and symmetrized covariance of the quadratures (x_A, p_A, x_B, p_B).
///
/// Vacuum has covariance I/2; the uncertainty relation requires symplectic eigenvalues ≥ 1/2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianState {
    pub mean: [f64; 4],
    pub cov: [[f64; 4]; 4],
}

impl GaussianState {
    pub fn vacuum() -> GaussianState {
        let mut cov = [[0.0; 4]; 4];
        for (i, row) in cov.iter_mut().enumerate() {
            row[i] = 0.5;
        }
        GaussianState { mean: [0.0; 4], cov }
    }

    /// Coherent state with amplitudes ⟨Â⟩ = alpha_a, ⟨B̂⟩ = alpha_b.
    pub fn coherent(alpha_a: C64, alpha_b: C64) -> GaussianState {
        let s = std::f64::consts::SQRT_2;
        let mut g = GaussianState::vacuum();
        g.mean = [s * alpha_a.re, s * alpha_a.im, s * alpha_b.re, s * alpha_b.im];
        g
    }

    /// ⟨Â†Â⟩ (mode 0) or ⟨B̂†B̂⟩ (mode 1).
    pub fn occupation(&self, mode: usize) -> f64 {
        let (x, p) = (2 * mode, 2 * mode + 1);
        (self.cov[x][x] + self.cov[p][p] + self.mean[x].powi(2) + self.mean[p].powi(2) - 1.0) / 2.0
    }

    /// Symplectic eigenvalues ν₋ ≤ ν₊.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        let v = &self.cov;
        let det2 = |a: f64, b: f64, c: f64, d: f64| a * d - b * c;
        let da = det2(v[0][0], v[0][1], v[1][0], v[1][1]);
        let db = det2(v[2][2], v[2][3], v[3][2], v[3][3]);
        let dc = det2(v[0][2], v[0][3], v[1][2], v[1][3]);
        let delta = da + db + 2.0 * dc;
        let det = DMatrix::from_fn(4, 4, |i, j| v[i][j]).determinant();
        let root = (delta * delta - 4.0 * det).max(0.0).sqrt();
        let plus = (delta + root) / 2.0;
        // ν₋² = det/ν₊² avoids cancellation for strongly squeezed states.
        let minus = if plus > 0.0 { det / plus } else { 0.0 };
        (minus.max(0.0).sqrt(), plus.max(0.0).sqrt())
    }

    fn cov_norm(&self) -> f64 {
        self.cov.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn symmetry_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..4 {
            for j in 0..i {
                d = d.max((self.cov[i][j] - self.cov[j][i]).abs());
            }
        }
        d
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        if self
            .mean
            .iter()
            .chain(self.cov.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("Gaussian state has non-finite entries"));
        }
        if self.symmetry_defect() > tol * self.cov_norm().max(1.0) {
            return Err(Error::invalid("covariance matrix is not symmetric"));
        }
        let (nu, _) = self.symplectic_eigenvalues();
        if nu < 0.5 - uncertainty_slack(tol, self.cov_norm()) {
            return Err(Error::Validity(format!(
                "uncertainty relation violated: smallest symplectic eigenvalue {nu:.10}"
            )));
        }
        Ok(())
    }
}

/// Round-off in ν₋ grows with the square of the covariance scale.
fn uncertainty_slack(tol: f64, scale: f64) -> f64 {
    tol + 1e-13 * scale * scale
}

#[derive(Clone, Debug)]
pub struct GaussianOptions {
    pub ode: OdeOptions,
    pub uncertainty_tolerance: f64,
    /// Qubit count for the ⟨B̂†B̂⟩/N < `density_threshold` check; `None` disables it.
    pub n_qubits: Option<u32>,
    pub density_threshold: f64,
}

impl Default for GaussianOptions {
    fn default() -> Self {
        GaussianOptions {
            ode: OdeOptions::default().with_tol(1e-11, 1e-13),
            uncertainty_tolerance: 1e-6,
            n_qubits: None,
            density_threshold: 0.1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussianTrajectory {
    pub t: Vec<f64>,
    pub occupation_a: Vec<f64>,
    pub occupation_b: Vec<f64>,
    pub states: Vec<GaussianState>,
    /// max_t ‖ΦΩΦᵀ − Ω‖ / max(1, ‖Φ‖²) for the transfer matrix Φ.
    pub symplectic_defect: f64,
    pub min_symplectic_eigenvalue: f64,
    pub ode: OdeStats,
    pub warnings: Vec<String>,
}

const OMEGA: [[f64; 4]; 4] = [
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
];

/// Propagates the mean, covariance and transfer matrix: Ṙ = SR, V̇ = SV + VSᵀ, Φ̇ = SΦ.
pub fn evolve_gaussian(
    generator: &QuadraticGenerator,
    s0: &GaussianState,
    times: &[f64],
    opts: &GaussianOptions,
) -> Result<GaussianTrajectory> {
    s0.validate(opts.uncertainty_tolerance)?;
    let t0 = *times.first().ok_or_else(|| Error::invalid("empty time grid"))?;
    let mut y = vec![0.0; 36];
    y[..4].copy_from_slice(&s0.mean);
    for i in 0..4 {
        for j in 0..4 {
            y[4 + 4 * i + j] = s0.cov[i][j];
        }
        y[20 + 5 * i] = 1.0;
    }
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let s = generator.drift(t);
        for i in 0..4 {
            dy[i] = (0..4).map(|k| s[i][k] * y[k]).sum();
        }
        for i in 0..4 {
            for j in 0..4 {
                let mut sv = 0.0;
                let mut vs = 0.0;
                let mut sp = 0.0;
                for k in 0..4 {
                    sv += s[i][k] * y[4 + 4 * k + j];
                    vs += y[4 + 4 * i + k] * s[j][k];
                    sp += s[i][k] * y[20 + 4 * k + j];
                }
                dy[4 + 4 * i + j] = sv + vs;
                dy[20 + 4 * i + j] = sp;
            }
        }
    };

    let mut out = GaussianTrajectory {
        t: Vec::with_capacity(times.len()),
        occupation_a: Vec::with_capacity(times.len()),
        occupation_b: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
        symplectic_defect: 0.0,
        min_symplectic_eigenvalue: f64::INFINITY,
        ode: OdeStats::default(),
        warnings: Vec::new(),
    };
    let mut density_warned = false;
    let mut integ = Integrator::new(36, opts.ode.clone());
    out.ode = integ.integrate(rhs, t0, &mut y, times, |_, t, y| {
        let mut state = GaussianState {
            mean: [0.0; 4],
            cov: [[0.0; 4]; 4],
        };
        state.mean.copy_from_slice(&y[..4]);
        for i in 0..4 {
            for j in 0..4 {
                // Symmetrize: the two triangles drift apart only by round-off.
                state.cov[i][j] = 0.5 * (y[4 + 4 * i + j] + y[4 + 4 * j + i]);
            }
        }
        let phi = |i: usize, j: usize| y[20 + 4 * i + j];
        let mut defect = 0.0f64;
        let mut scale = 1.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    for l in 0..4 {
                        s += phi(i, k) * OMEGA[k][l] * phi(j, l);
                    }
                }
                defect = defect.max((s - OMEGA[i][j]).abs());
                scale = scale.max(phi(i, j).powi(2));
            }
        }
        out.symplectic_defect = out.symplectic_defect.max(defect / scale);
        let (nu, _) = state.symplectic_eigenvalues();
        out.min_symplectic_eigenvalue = out.min_symplectic_eigenvalue.min(nu);
        if nu < 0.5 - uncertainty_slack(opts.uncertainty_tolerance, state.cov_norm()) {
            return Err(Error::Solver(format!(
                "uncertainty relation violated at t = {t:.6e} (ν₋ = {nu:.10}); tighten the integrator tolerance"
            )));
        }
        let nb = state.occupation(1);
        if let Some(n) = opts.n_qubits {
            if !density_warned && nb / n as f64 >= opts.density_threshold {
                density_warned = true;
                out.warnings.push(format!(
                    "⟨B†B⟩/N = {:.3} at t = {t:.6e} exceeds {}: the Holstein–Primakoff expansion is leaving its range",
                    nb / n as f64,
                    opts.density_threshold
                ));
            }
        }
        out.t.push(t);
        out.occupation_a.push(state.occupation(0));
        out.occupation_b.push(nb);
        out.states.push(state);
        Ok(())
    })?;
    Ok(out)
}

/// Occupations ⟨Â†Â⟩, ⟨B̂†B̂⟩ from vacuum by direct Schrödinger evolution on a truncated
/// two-mode Fock space; an independent check of [`evolve_gaussian`] at short times.
pub fn fock_occupations(
    generator: &QuadraticGenerator,
    n_max: usize,
    times: &[f64],
    ode: &OdeOptions,
) -> Result<Vec<(f64, f64)>> {
    if n_max < 1 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let t0 = *times.first().ok_or_else(|| Error::invalid("empty time grid"))?;
    let (a, b) = two_mode_ladders(n_max);
    let na = a.adjoint() * &a;
    let nb = b.adjoint() * &b;
    let d = a.nrows();
    let mut psi = vec![C64::new(0.0, 0.0); d];
    psi[0] = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(times.len());
    let ops: Vec<(Sparse, Sparse, &QuadraticTerm)> = generator
        .terms
        .iter()
        .map(|term| {
            let op = match term.monomial {
                Monomial::AA => &a * &a,
                Monomial::AB => &a * &b,
                Monomial::BB => &b * &b,
                Monomial::NumberA => a.adjoint() * &a,
                Monomial::NumberB => b.adjoint() * &b,
                Monomial::Hop => a.adjoint() * &b,
            };
            (Sparse::from_dense(&op), Sparse::from_dense(&op.adjoint()), term)
        })
        .collect();
    let mut integ = Integrator::new(d, ode.clone());
    integ.integrate(
        |t, y: &[C64], dy: &mut [C64]| {
            dy.fill(C64::new(0.0, 0.0));
            for (op, op_dag, term) in &ops {
                let c = term.at(t);
                op.mul_vec_acc(-I * c, y, dy);
                op_dag.mul_vec_acc(-I * c.conj(), y, dy);
            }
        },
        t0,
        &mut psi,
        times,
        |_, _, y| {
            let v = DVector::from_column_slice(y);
            out.push((v.dotc(&(&na * &v)).re, v.dotc(&(&nb * &v)).re));
            Ok(())
        },
    )?;
    Ok(out)
}
