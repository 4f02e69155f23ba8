//! Truncated qubit ⊗ Fock space.
//!
//! Basis order is interleaved: |g,0⟩, |e,0⟩, |g,1⟩, |e,1⟩, …, i.e. `index = 2n + q`
//! with q = 0 for the ground state. The dimension is `2(n_max + 1)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect, I, ONE, ZERO};
use crate::params::{ModulationTarget, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Qubit {
    #[serde(alias = "ground")]
    G,
    #[serde(alias = "excited")]
    E,
}

impl Qubit {
    fn offset(self) -> usize {
        match self {
            Qubit::G => 0,
            Qubit::E => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Basis {
    n_max: usize,
}

impl Basis {
    pub fn new(n_max: usize) -> Result<Basis> {
        if n_max < 1 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        Ok(Basis { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    pub fn index(&self, q: Qubit, n: usize) -> usize {
        debug_assert!(n <= self.n_max);
        2 * n + q.offset()
    }

    pub fn decompose(&self, index: usize) -> (Qubit, usize) {
        let q = if index % 2 == 0 { Qubit::G } else { Qubit::E };
        (q, index / 2)
    }

    fn check(&self, other: &Basis) -> Result<()> {
        if self != other {
            return Err(Error::BasisMismatch(format!("n_max {} vs {}", self.n_max, other.n_max)));
        }
        Ok(())
    }
}

/// Dense operator on a truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    pub basis: Basis,
    pub matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(basis: Basis, matrix: DMatrix<C64>) -> Result<Operator> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "{}x{} matrix on a basis of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                basis.dim()
            )));
        }
        Ok(Operator { basis, matrix })
    }

    pub fn zeros(basis: Basis) -> Operator {
        Operator {
            basis,
            matrix: DMatrix::zeros(basis.dim(), basis.dim()),
        }
    }

    pub fn identity(basis: Basis) -> Operator {
        Operator {
            basis,
            matrix: DMatrix::identity(basis.dim(), basis.dim()),
        }
    }

    pub fn dagger(&self) -> Operator {
        Operator {
            basis: self.basis,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn dot(&self, rhs: &Operator) -> Operator {
        Operator {
            basis: self.basis,
            matrix: &self.matrix * &rhs.matrix,
        }
    }

    pub fn commutator(&self, rhs: &Operator) -> Operator {
        Operator {
            basis: self.basis,
            matrix: &self.matrix * &rhs.matrix - &rhs.matrix * &self.matrix,
        }
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator {
            basis: self.basis,
            matrix: &self.matrix * c,
        }
    }

    pub fn add(&self, rhs: &Operator) -> Operator {
        Operator {
            basis: self.basis,
            matrix: &self.matrix + &rhs.matrix,
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_hermitian(1e-10) {
            return Err(Error::invalid("eigenvalues requested for a non-Hermitian operator"));
        }
        Ok(hermitian_eigenvalues(&self.matrix))
    }
}

#[derive(Clone, Debug)]
pub struct FockOperators {
    pub a: Operator,
    pub a_dagger: Operator,
    pub n: Operator,
    pub sigma_minus: Operator,
    pub sigma_plus: Operator,
    pub sigma_z: Operator,
    /// |e⟩⟨e| ⊗ 1
    pub excited: Operator,
    /// |g,0⟩⟨g,0|
    pub ground_vacuum: Operator,
}

pub fn fock_operators(basis: Basis) -> FockOperators {
    let d = basis.dim();
    let mut a = DMatrix::zeros(d, d);
    let mut sm = DMatrix::zeros(d, d);
    let mut ee = DMatrix::zeros(d, d);
    for n in 0..=basis.n_max() {
        for q in [Qubit::G, Qubit::E] {
            let i = basis.index(q, n);
            if n > 0 {
                a[(basis.index(q, n - 1), i)] = C64::new((n as f64).sqrt(), 0.0);
            }
            if q == Qubit::E {
                sm[(basis.index(Qubit::G, n), i)] = ONE;
                ee[(i, i)] = ONE;
            }
        }
    }
    let mut gv = DMatrix::zeros(d, d);
    gv[(0, 0)] = ONE;
    let op = |m: DMatrix<C64>| Operator { basis, matrix: m };
    let a = op(a);
    let a_dagger = a.dagger();
    let n = a_dagger.dot(&a);
    let sigma_minus = op(sm);
    let sigma_plus = sigma_minus.dagger();
    let sigma_z = op(&ee * C64::new(2.0, 0.0) - DMatrix::identity(d, d));
    FockOperators {
        a,
        a_dagger,
        n,
        sigma_minus,
        sigma_plus,
        sigma_z,
        excited: op(ee),
        ground_vacuum: op(gv),
    }
}

/// H(t) = H_static + sin(ηt)·H_mod, the split form of the modulated Rabi Hamiltonian.
#[derive(Clone, Debug)]
pub struct ModulatedHamiltonian {
    pub basis: Basis,
    pub h_static: Operator,
    pub h_mod: Operator,
    pub eta: f64,
}

impl ModulatedHamiltonian {
    pub fn build(params: &SystemParams, basis: Basis) -> Result<ModulatedHamiltonian> {
        params.validate()?;
        if params.n_qubits != 1 {
            return Err(Error::Unsupported(
                "the exact Hamiltonian is single-qubit; use the collective model for N > 1".into(),
            ));
        }
        if basis.n_max() < 2 {
            return Err(Error::invalid("n_max must be at least 2 for the modulated Hamiltonian"));
        }
        let ops = fock_operators(basis);
        let x = ops.a.add(&ops.a_dagger).dot(&ops.sigma_plus.add(&ops.sigma_minus));
        let squeeze = ops
            .a_dagger
            .dot(&ops.a_dagger)
            .add(&ops.a.dot(&ops.a).scale(-ONE))
            .scale(I * params.chi0);
        let re = |v: f64| C64::new(v, 0.0);
        let h_static = ops
            .n
            .scale(re(params.omega0))
            .add(&squeeze)
            .add(&ops.sigma_z.scale(re(0.5 * params.qubit_omega0)))
            .add(&x.scale(re(params.g0)));
        let h_mod = match params.target {
            ModulationTarget::Omega => ops.sigma_z.scale(re(0.5 * params.epsilon)),
            ModulationTarget::Coupling => x.scale(re(params.epsilon)),
            ModulationTarget::None => Operator::zeros(basis),
        };
        Ok(ModulatedHamiltonian {
            basis,
            h_static,
            h_mod,
            eta: params.eta,
        })
    }

    pub fn at(&self, t: f64) -> Operator {
        self.h_static
            .add(&self.h_mod.scale(C64::new((self.eta * t).sin(), 0.0)))
    }

    pub fn is_time_dependent(&self) -> bool {
        self.eta > 0.0 && self.h_mod.matrix.iter().any(|z| *z != ZERO)
    }
}

/// H0(t) of the modulated Rabi model at time `t`.
pub fn hamiltonian_at(params: &SystemParams, basis: Basis, t: f64) -> Result<Operator> {
    Ok(ModulatedHamiltonian::build(params, basis)?.at(t))
}

/// Unmodulated Jaynes–Cummings Hamiltonian ω0 n + Ω0|e⟩⟨e| + g0(aσ₊ + a†σ₋).
///
/// The qubit energy is referenced to |g⟩, so its spectrum is exactly the dressed λ_{m,S}.
pub fn jc_hamiltonian(params: &SystemParams, basis: Basis) -> Operator {
    let ops = fock_operators(basis);
    let re = |v: f64| C64::new(v, 0.0);
    let hop = ops.a.dot(&ops.sigma_plus);
    ops.n
        .scale(re(params.omega0))
        .add(&ops.excited.scale(re(params.qubit_omega0)))
        .add(&hop.add(&hop.dagger()).scale(re(params.g0)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    pub basis: Basis,
    pub amplitudes: DVector<C64>,
}

impl QuantumState {
    pub fn basis_state(basis: Basis, q: Qubit, n: usize) -> Result<QuantumState> {
        if n > basis.n_max() {
            return Err(Error::invalid(format!(
                "photon number {n} exceeds n_max {}",
                basis.n_max()
            )));
        }
        let mut v = DVector::zeros(basis.dim());
        v[basis.index(q, n)] = ONE;
        Ok(QuantumState { basis, amplitudes: v })
    }

    pub fn from_amplitudes(basis: Basis, amplitudes: DVector<C64>) -> Result<QuantumState> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        Ok(QuantumState { basis, amplitudes })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(mut self) -> Result<QuantumState> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        self.amplitudes /= C64::new(n, 0.0);
        Ok(self)
    }

    pub fn overlap(&self, other: &QuantumState) -> Result<C64> {
        self.basis.check(&other.basis)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Population of the top Fock level.
    pub fn top_population(&self) -> f64 {
        let n = self.basis.n_max();
        self.amplitudes[2 * n].norm_sqr() + self.amplitudes[2 * n + 1].norm_sqr()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            basis: self.basis,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub basis: Basis,
    pub matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(basis: Basis, matrix: DMatrix<C64>) -> Result<DensityMatrix> {
        let op = Operator::new(basis, matrix)?;
        let rho = DensityMatrix {
            basis,
            matrix: op.matrix,
        };
        rho.validate()?;
        Ok(rho)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)[0]
    }

    /// Checks trace (1e-8), Hermiticity (1e-10) and positivity (−1e-8).
    pub fn validate(&self) -> Result<()> {
        if (self.trace() - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(format!("trace {} differs from 1", self.trace())));
        }
        let h = hermiticity_defect(&self.matrix);
        if h > 1e-10 {
            return Err(Error::invalid(format!("density matrix not Hermitian ({h:.2e})")));
        }
        let lo = self.min_eigenvalue();
        if lo < -1e-8 {
            return Err(Error::invalid(format!("negative eigenvalue {lo:.3e}")));
        }
        Ok(())
    }

    /// Replaces ρ by (ρ + ρ†)/2.
    pub fn hermitize(&mut self) {
        let adj = self.matrix.adjoint();
        self.matrix = (&self.matrix + adj) * C64::new(0.5, 0.0);
    }

    pub fn top_population(&self) -> f64 {
        let n = self.basis.n_max();
        self.matrix[(2 * n, 2 * n)].re + self.matrix[(2 * n + 1, 2 * n + 1)].re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// Anything an operator expectation value can be taken in.
pub trait Expectation {
    fn expectation(&self, op: &Operator) -> Result<C64>;
}

impl Expectation for QuantumState {
    fn expectation(&self, op: &Operator) -> Result<C64> {
        self.basis.check(&op.basis)?;
        Ok(self.amplitudes.dotc(&(&op.matrix * &self.amplitudes)))
    }
}

impl Expectation for DensityMatrix {
    fn expectation(&self, op: &Operator) -> Result<C64> {
        self.basis.check(&op.basis)?;
        let d = self.basis.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += op.matrix[(i, k)] * self.matrix[(k, i)];
            }
        }
        Ok(acc)
    }
}

/// ⟨ψ|O|ψ⟩ or Tr[Oρ].
pub fn expectation<S: Expectation>(state: &S, op: &Operator) -> Result<C64> {
    state.expectation(op)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_on_smallest_basis() {
        let b = Basis::new(1).unwrap();
        let ops = fock_operators(b);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (0, 2) || (i, j) == (1, 3) {
                    ONE
                } else {
                    ZERO
                };
                assert_eq!(ops.a.matrix[(i, j)], expected);
            }
        }
        assert!(Basis::new(0).is_err());
    }

    #[test]
    fn canonical_commutator_below_top() {
        let b = Basis::new(6).unwrap();
        let ops = fock_operators(b);
        let c = ops.a.commutator(&ops.a_dagger);
        for i in 0..b.dim() {
            let (_, n) = b.decompose(i);
            for j in 0..b.dim() {
                if n < b.n_max() {
                    let e = if i == j { ONE } else { ZERO };
                    assert!((c.matrix[(i, j)] - e).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn number_operator_is_diagonal_photon_count() {
        let b = Basis::new(5).unwrap();
        let ops = fock_operators(b);
        for i in 0..b.dim() {
            let (_, n) = b.decompose(i);
            assert!((ops.n.matrix[(i, i)].re - n as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn basis_round_trip() {
        let b = Basis::new(9).unwrap();
        for i in 0..b.dim() {
            let (q, n) = b.decompose(i);
            assert_eq!(b.index(q, n), i);
        }
    }

    #[test]
    fn hamiltonian_hermitian_and_decoupled_spectrum() {
        let b = Basis::new(4).unwrap();
        let p = SystemParams::new(1.0, 0.7, 0.0);
        let ev = hamiltonian_at(&p, b, 1.3).unwrap().eigenvalues().unwrap();
        let mut expected: Vec<f64> = (0..=4).flat_map(|n| [n as f64 - 0.35, n as f64 + 0.35]).collect();
        expected.sort_by(|a, b| a.total_cmp(b));
        for (a, e) in ev.iter().zip(&expected) {
            assert!((a - e).abs() < 1e-12);
        }
        let p =
            SystemParams::new(1.0, 0.7, 0.05)
                .with_chi0(0.01)
                .with_modulation(ModulationTarget::Coupling, 0.02, 1.9);
        let h = hamiltonian_at(&p, b, 0.77).unwrap();
        assert!(h.hermiticity_defect() < 1e-12);
        assert!(hamiltonian_at(&p, Basis::new(1).unwrap(), 0.0).is_err());
    }

    #[test]
    fn expectation_examples() {
        let b = Basis::new(3).unwrap();
        let ops = fock_operators(b);
        let g0 = QuantumState::basis_state(b, Qubit::G, 0).unwrap();
        assert_eq!(expectation(&g0, &ops.n).unwrap(), ZERO);
        let e0 = QuantumState::basis_state(b, Qubit::E, 0).unwrap();
        assert!((expectation(&e0, &ops.excited).unwrap() - ONE).norm() < 1e-15);
        let rho = e0.to_density();
        assert!((expectation(&rho, &ops.excited).unwrap() - ONE).norm() < 1e-15);
        let other = fock_operators(Basis::new(2).unwrap());
        assert!(matches!(expectation(&g0, &other.n), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn density_validation() {
        let b = Basis::new(2).unwrap();
        let mut m = DMatrix::zeros(b.dim(), b.dim());
        m[(0, 0)] = C64::new(1.2, 0.0);
        m[(1, 1)] = C64::new(-0.2, 0.0);
        assert!(DensityMatrix::new(b, m).is_err());
    }
}
