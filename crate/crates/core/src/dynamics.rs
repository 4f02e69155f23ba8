//! Exact evolution under the modulated Rabi Hamiltonian, pure and dissipative.
//!
//! Long driven runs are propagated stroboscopically: the one-period map (U_T for states,
//! the superoperator P_T for density matrices) is integrated once and raised to the output
//! stride, so samples fall on whole modulation periods. Short runs integrate directly on the
//! requested grid, in the lab frame or a frame rotating with the bare energies.
//!
//! Density matrices are flattened row-major: `v[i*d + j] = ρ_ij`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{fock_operators, Basis, DensityMatrix, ModulatedHamiltonian, QuantumState};
use crate::linalg::{cmatpow, hermitian_eigenvalues, unitarize, Sparse, I, ONE, ZERO};
use crate::ode::{Integrator, OdeOptions, OdeStats};
use crate::params::SystemParams;

/// Uniform output grid with `samples` points including both ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, samples: usize) -> Result<TimeGrid> {
        if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::invalid(format!("bad time span [{t0}, {t1}]")));
        }
        if samples < 2 && t1 > t0 {
            return Err(Error::invalid("a non-empty span needs at least two samples"));
        }
        Ok(TimeGrid {
            t0,
            t1,
            samples: samples.max(1),
        })
    }

    pub fn spacing(&self) -> f64 {
        if self.samples < 2 {
            0.0
        } else {
            (self.t1 - self.t0) / (self.samples - 1) as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.spacing();
        (0..self.samples).map(|k| self.t0 + k as f64 * dt).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    #[default]
    Lab,
    /// Rotating with ω0n̂ + Ω0|e⟩⟨e| (up to a constant); observables are unchanged.
    Interaction,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagation {
    /// Stroboscopic when the sample spacing is at least one period, direct otherwise.
    #[default]
    Auto,
    Stroboscopic,
    Direct,
}

#[derive(Clone, Debug)]
pub struct DynamicsOptions {
    pub ode: OdeOptions,
    pub propagation: Propagation,
    pub frame: Frame,
    /// Population on the top Fock rung that counts as truncation overflow.
    pub truncation_threshold: f64,
    /// Downgrade truncation overflow to a warning.
    pub allow_truncation: bool,
    /// Largest tolerated |‖ψ‖² − 1| or |Tr ρ − 1|.
    pub norm_tolerance: f64,
    /// Most negative eigenvalue tolerated in an output density matrix.
    pub positivity_tolerance: f64,
    pub keep_snapshots: bool,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        DynamicsOptions {
            ode: OdeOptions::default(),
            propagation: Propagation::Auto,
            frame: Frame::Lab,
            truncation_threshold: 1e-6,
            allow_truncation: false,
            norm_tolerance: 1e-8,
            positivity_tolerance: 1e-7,
            keep_snapshots: false,
        }
    }
}

impl DynamicsOptions {
    pub fn with_ode(mut self, ode: OdeOptions) -> Self {
        self.ode = ode;
        self
    }

    pub fn with_propagation(mut self, p: Propagation) -> Self {
        self.propagation = p;
        self
    }

    pub fn with_frame(mut self, f: Frame) -> Self {
        self.frame = f;
        self
    }

    pub fn with_snapshots(mut self) -> Self {
        self.keep_snapshots = true;
        self
    }

    pub fn allowing_truncation(mut self) -> Self {
        self.allow_truncation = true;
        self
    }
}

/// ⟨n̂⟩, P_e and P_{g,0} of one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Observables {
    pub mean_n: f64,
    pub p_e: f64,
    pub p_g0: f64,
}

/// States whose diagonal populations in the Fock basis are available.
pub trait Populations {
    fn basis(&self) -> Basis;
    fn population(&self, index: usize) -> f64;
}

impl Populations for QuantumState {
    fn basis(&self) -> Basis {
        self.basis
    }

    fn population(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }
}

impl Populations for DensityMatrix {
    fn basis(&self) -> Basis {
        self.basis
    }

    fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }
}

pub fn observables<S: Populations>(state: &S) -> Observables {
    observables_from(state.basis(), |i| state.population(i))
}

fn observables_from(basis: Basis, pop: impl Fn(usize) -> f64) -> Observables {
    let mut mean_n = 0.0;
    let mut p_e = 0.0;
    for i in 0..basis.dim() {
        let p = pop(i);
        mean_n += (i / 2) as f64 * p;
        if i % 2 == 1 {
            p_e += p;
        }
    }
    Observables {
        mean_n,
        p_e,
        p_g0: pop(0),
    }
}

#[derive(Clone, Debug, Default)]
pub enum Snapshots {
    #[default]
    None,
    Pure(Vec<QuantumState>),
    Mixed(Vec<DensityMatrix>),
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    /// "stroboscopic" or "direct".
    pub propagation: String,
    pub frame: Option<Frame>,
    /// Interval covered by one integrated map and how many of them make one sample step.
    pub base_interval: Option<f64>,
    pub stride: Option<u64>,
    pub ode: OdeStats,
    pub max_norm_drift: f64,
    pub min_eigenvalue: Option<f64>,
    pub max_top_population: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub mean_n: Vec<f64>,
    pub p_e: Vec<f64>,
    pub p_g0: Vec<f64>,
    #[serde(skip)]
    pub snapshots: Snapshots,
    pub diagnostics: Diagnostics,
}

impl TimeSeries {
    fn empty() -> TimeSeries {
        TimeSeries {
            t: Vec::new(),
            mean_n: Vec::new(),
            p_e: Vec::new(),
            p_g0: Vec::new(),
            snapshots: Snapshots::None,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn observables_at(&self, k: usize) -> Observables {
        Observables {
            mean_n: self.mean_n[k],
            p_e: self.p_e[k],
            p_g0: self.p_g0[k],
        }
    }

    /// max_t [1 − P_{g,0}(t)].
    pub fn max_excitation(&self) -> f64 {
        self.p_g0.iter().map(|p| 1.0 - p).fold(0.0, f64::max)
    }

    fn push(&mut self, t: f64, o: Observables) {
        self.t.push(t);
        self.mean_n.push(o.mean_n);
        self.p_e.push(o.p_e);
        self.p_g0.push(o.p_g0);
    }
}

/// Hamiltonian and dissipator in sparse form, ready for the right-hand sides.
struct Model {
    d: usize,
    h_static: Sparse,
    h_mod: Sparse,
    eta: f64,
    /// Σ J†J
    jj: Sparse,
    jumps: Vec<Sparse>,
    rotating: Option<Rotating>,
}

struct Rotating {
    energies: Vec<f64>,
    /// (i, j, static part, modulated part, E_i − E_j) of H − H_D.
    entries: Vec<(usize, usize, C64, C64, f64)>,
}

impl Model {
    fn new(params: &SystemParams, basis: Basis, frame: Frame) -> Result<Model> {
        let mh = ModulatedHamiltonian::build(params, basis)?;
        let ops = fock_operators(basis);
        let d = basis.dim();
        let mut jumps = Vec::new();
        let mut jj = DMatrix::<C64>::zeros(d, d);
        for (rate, op) in [
            (params.kappa, &ops.a),
            (params.gamma, &ops.sigma_minus),
            (params.gamma_phi / 2.0, &ops.sigma_z),
        ] {
            if rate > 0.0 {
                let j = &op.matrix * C64::new(rate.sqrt(), 0.0);
                jj += j.adjoint() * &j;
                jumps.push(Sparse::from_dense(&j));
            }
        }
        let rotating = match frame {
            Frame::Lab => None,
            Frame::Interaction => {
                let energies: Vec<f64> = (0..d)
                    .map(|i| {
                        let qz = if i % 2 == 1 { 0.5 } else { -0.5 };
                        params.omega0 * (i / 2) as f64 + params.qubit_omega0 * qz
                    })
                    .collect();
                let mut entries = Vec::new();
                for i in 0..d {
                    for j in 0..d {
                        let mut vs = mh.h_static.matrix[(i, j)];
                        if i == j {
                            vs -= energies[i];
                        }
                        let vm = mh.h_mod.matrix[(i, j)];
                        if vs.norm() > 1e-300 || vm != ZERO {
                            entries.push((i, j, vs, vm, energies[i] - energies[j]));
                        }
                    }
                }
                Some(Rotating { energies, entries })
            }
        };
        Ok(Model {
            d,
            h_static: Sparse::from_dense(&mh.h_static.matrix),
            h_mod: Sparse::from_dense(&mh.h_mod.matrix),
            eta: mh.eta,
            jj: Sparse::from_dense(&jj),
            jumps,
            rotating,
        })
    }

    /// Calls `f` with H(t) as a list of weighted sparse parts.
    #[inline]
    fn with_hamiltonian<R>(&self, t: f64, f: impl FnOnce(&[(f64, &Sparse)]) -> R) -> R {
        let s = (self.eta * t).sin();
        match &self.rotating {
            None => f(&[(1.0, &self.h_static), (s, &self.h_mod)]),
            Some(rot) => {
                let h = Sparse {
                    dim: self.d,
                    entries: rot
                        .entries
                        .iter()
                        .map(|&(i, j, vs, vm, w)| (i, j, (vs + vm * s) * C64::from_polar(1.0, w * t)))
                        .collect(),
                };
                f(&[(1.0, &h)])
            }
        }
    }

    fn schrodinger(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        dy.fill(ZERO);
        self.with_hamiltonian(t, |parts| {
            for &(c, h) in parts {
                if c != 0.0 {
                    h.mul_vec_acc(-I * c, y, dy);
                }
            }
        });
    }

    /// dU/dt = −iH U on a row-major d×d block.
    fn propagator(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        dy.fill(ZERO);
        self.with_hamiltonian(t, |parts| {
            for &(c, h) in parts {
                if c != 0.0 {
                    h.left_mul_acc(-I * c, y, dy);
                }
            }
        });
    }

    /// Lindblad right-hand side on consecutive d×d blocks.
    fn lindblad(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        dy.fill(ZERO);
        let d2 = self.d * self.d;
        self.with_hamiltonian(t, |parts| {
            for (r, out) in y.chunks_exact(d2).zip(dy.chunks_exact_mut(d2)) {
                self.lindblad_block(parts, r, out);
            }
        });
    }

    #[inline]
    fn lindblad_block(&self, parts: &[(f64, &Sparse)], r: &[C64], out: &mut [C64]) {
        let d = self.d;
        for &(c, h) in parts {
            if c != 0.0 {
                h.left_mul_acc(-I * c, r, out);
                h.right_mul_acc(I * c, r, out);
            }
        }
        let half = C64::new(-0.5, 0.0);
        self.jj.left_mul_acc(half, r, out);
        self.jj.right_mul_acc(half, r, out);
        for j in &self.jumps {
            for &(a, k, v) in &j.entries {
                for &(b, l, w) in &j.entries {
                    out[a * d + b] += v * w.conj() * r[k * d + l];
                }
            }
        }
    }

    fn to_lab_state(&self, t: f64, psi: &mut [C64]) {
        if let Some(rot) = &self.rotating {
            for (x, e) in psi.iter_mut().zip(&rot.energies) {
                *x *= C64::from_polar(1.0, -e * t);
            }
        }
    }

    fn to_lab_density(&self, t: f64, rho: &mut DMatrix<C64>) {
        if let Some(rot) = &self.rotating {
            for i in 0..self.d {
                for j in 0..self.d {
                    rho[(i, j)] *= C64::from_polar(1.0, -(rot.energies[i] - rot.energies[j]) * t);
                }
            }
        }
    }
}

fn flatten(rho: &DMatrix<C64>) -> Vec<C64> {
    let d = rho.nrows();
    (0..d * d).map(|k| rho[(k / d, k % d)]).collect()
}

fn unflatten(v: &[C64], d: usize) -> DMatrix<C64> {
    DMatrix::from_row_slice(d, d, v)
}

/// U(t0 + τ, t0) by integrating the identity.
fn integrate_unitary(model: &Model, t0: f64, tau: f64, ode: &OdeOptions) -> Result<(DMatrix<C64>, OdeStats)> {
    let d = model.d;
    let mut y = flatten(&DMatrix::identity(d, d));
    let mut integ = Integrator::new(y.len(), ode.clone());
    let stats = integ.integrate(
        |t, y, dy| model.propagator(t, y, dy),
        t0,
        &mut y,
        &[t0 + tau],
        |_, _, _| Ok(()),
    )?;
    Ok((unitarize(&unflatten(&y, d)), stats))
}

/// Columns of the channel over [t0, t0 + τ] in blocks, to bound memory.
fn integrate_channel(model: &Model, t0: f64, tau: f64, ode: &OdeOptions) -> Result<(DMatrix<C64>, OdeStats)> {
    const BLOCK: usize = 64;
    let d2 = model.d * model.d;
    let mut p = DMatrix::<C64>::zeros(d2, d2);
    let mut stats = OdeStats::default();
    let mut start = 0;
    while start < d2 {
        let cols = BLOCK.min(d2 - start);
        let mut y = vec![ZERO; cols * d2];
        for c in 0..cols {
            y[c * d2 + start + c] = ONE;
        }
        let mut integ = Integrator::new(y.len(), ode.clone());
        stats += integ.integrate(
            |t, y, dy| model.lindblad(t, y, dy),
            t0,
            &mut y,
            &[t0 + tau],
            |_, _, _| Ok(()),
        )?;
        for c in 0..cols {
            for r in 0..d2 {
                p[(r, start + c)] = y[c * d2 + r];
            }
        }
        start += cols;
    }
    project_trace(&mut p, model.d);
    Ok((p, stats))
}

/// P += vec(I)(vec(I)† − vec(I)†P)/d, making the map exactly trace preserving.
fn project_trace(p: &mut DMatrix<C64>, d: usize) {
    let d2 = d * d;
    for c in 0..d2 {
        let tr: C64 = (0..d).map(|i| p[(i * d + i, c)]).sum();
        let want = if c % (d + 1) == 0 { ONE } else { ZERO };
        let fix = (want - tr) / d as f64;
        for i in 0..d {
            p[(i * d + i, c)] += fix;
        }
    }
}

/// Raises a one-interval map to `stride`, or keeps it for repeated application when that is cheaper.
fn stride_map(m: &DMatrix<C64>, stride: u64, steps: usize) -> (DMatrix<C64>, u64) {
    let n = m.nrows() as f64;
    let power_cost = 2.0 * (stride as f64).log2().max(1.0) * n.powi(3);
    let apply_cost = steps as f64 * stride as f64 * n * n;
    if stride > 1 && power_cost < apply_cost {
        (cmatpow(m, stride), 1)
    } else {
        (m.clone(), stride)
    }
}

enum Plan {
    Direct(Vec<f64>),
    Stroboscopic {
        t0: f64,
        tau: f64,
        stride: u64,
        samples: usize,
    },
}

fn plan(params: &SystemParams, grid: &TimeGrid, opts: &DynamicsOptions) -> Result<Plan> {
    let direct = || Plan::Direct(grid.times());
    let want_strobe = match opts.propagation {
        Propagation::Direct => return Ok(direct()),
        Propagation::Stroboscopic => {
            if opts.frame == Frame::Interaction {
                return Err(Error::Unsupported(
                    "stroboscopic propagation runs in the lab frame".into(),
                ));
            }
            true
        }
        Propagation::Auto => opts.frame == Frame::Lab,
    };
    if !want_strobe || grid.samples < 2 {
        return Ok(direct());
    }
    let dt = grid.spacing();
    let span = grid.t1 - grid.t0;
    match params.period() {
        Some(period) => {
            if opts.propagation == Propagation::Auto && dt < period {
                return Ok(direct());
            }
            let stride = ((dt / period).round() as u64).max(1);
            // the last sample lands on or just past t1
            let samples = (span / (stride as f64 * period) * (1.0 - 1e-12)).ceil() as usize + 1;
            if samples < 2 {
                return Err(Error::invalid("the time span is shorter than one modulation period"));
            }
            Ok(Plan::Stroboscopic {
                t0: grid.t0,
                tau: period,
                stride,
                samples,
            })
        }
        None => {
            let max_tau = 2.0 * std::f64::consts::PI / params.omega0;
            let stride = (dt / max_tau).ceil().max(1.0) as u64;
            Ok(Plan::Stroboscopic {
                t0: grid.t0,
                tau: dt / stride as f64,
                stride,
                samples: grid.samples,
            })
        }
    }
}

/// Per-sample checks and bookkeeping shared by every propagation path.
struct Recorder<'a> {
    basis: Basis,
    opts: &'a DynamicsOptions,
    series: TimeSeries,
    pure: Vec<QuantumState>,
    mixed: Vec<DensityMatrix>,
}

impl<'a> Recorder<'a> {
    fn new(basis: Basis, opts: &'a DynamicsOptions) -> Self {
        Recorder {
            basis,
            opts,
            series: TimeSeries::empty(),
            pure: Vec::new(),
            mixed: Vec::new(),
        }
    }

    fn top(&mut self, pop: f64) -> Result<()> {
        let diag = &mut self.series.diagnostics;
        diag.max_top_population = diag.max_top_population.max(pop);
        if pop > self.opts.truncation_threshold {
            let n_max = self.basis.n_max();
            if !self.opts.allow_truncation {
                return Err(Error::Truncation {
                    population: pop,
                    n_max,
                    suggested: n_max + (n_max / 2).max(2),
                });
            }
            if diag.warnings.is_empty() {
                diag.warnings.push(format!(
                    "top Fock population {pop:.3e} exceeds the truncation threshold"
                ));
            }
        }
        Ok(())
    }

    fn drift(&mut self, drift: f64) -> Result<()> {
        let diag = &mut self.series.diagnostics;
        diag.max_norm_drift = diag.max_norm_drift.max(drift);
        if drift > self.opts.norm_tolerance {
            return Err(Error::Solver(format!(
                "norm/trace drift {drift:.3e} exceeds {:.1e}; tighten the tolerances",
                self.opts.norm_tolerance
            )));
        }
        Ok(())
    }

    fn pure(&mut self, t: f64, psi: DVector<C64>) -> Result<()> {
        let state = QuantumState {
            basis: self.basis,
            amplitudes: psi,
        };
        self.drift((state.norm() * state.norm() - 1.0).abs())?;
        self.top(state.top_population())?;
        self.series.push(t, observables(&state));
        if self.opts.keep_snapshots {
            self.pure.push(state);
        }
        Ok(())
    }

    fn mixed(&mut self, t: f64, rho: DMatrix<C64>) -> Result<()> {
        let mut rho = DensityMatrix {
            basis: self.basis,
            matrix: rho,
        };
        rho.hermitize();
        self.drift((rho.trace() - 1.0).abs())?;
        self.top(rho.top_population())?;
        let lo = hermitian_eigenvalues(&rho.matrix)[0];
        let diag = &mut self.series.diagnostics;
        diag.min_eigenvalue = Some(diag.min_eigenvalue.map_or(lo, |m| m.min(lo)));
        if lo < -self.opts.positivity_tolerance {
            return Err(Error::Solver(format!(
                "density matrix lost positivity (eigenvalue {lo:.3e}) at t = {t}"
            )));
        }
        self.series.push(t, observables(&rho));
        if self.opts.keep_snapshots {
            self.mixed.push(rho);
        }
        Ok(())
    }

    fn finish(mut self) -> TimeSeries {
        self.series.snapshots = if !self.pure.is_empty() {
            Snapshots::Pure(self.pure)
        } else if !self.mixed.is_empty() {
            Snapshots::Mixed(self.mixed)
        } else {
            Snapshots::None
        };
        self.series
    }
}

/// iψ̇ = H(t)ψ sampled on `grid` (or the stroboscopic grid covering it).
pub fn evolve_schrodinger(
    params: &SystemParams,
    basis: Basis,
    psi0: &QuantumState,
    grid: &TimeGrid,
    opts: &DynamicsOptions,
) -> Result<TimeSeries> {
    if psi0.basis != basis {
        return Err(Error::BasisMismatch("initial state lives on a different basis".into()));
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!("initial state has norm {}", psi0.norm())));
    }
    let model = Model::new(params, basis, opts.frame)?;
    let mut rec = Recorder::new(basis, opts);
    match plan(params, grid, opts)? {
        Plan::Direct(times) => {
            rec.series.diagnostics.propagation = "direct".into();
            rec.series.diagnostics.frame = Some(opts.frame);
            let mut y: Vec<C64> = psi0.amplitudes.iter().copied().collect();
            let mut integ = Integrator::new(y.len(), opts.ode.clone());
            let stats = integ.integrate(
                |t, y, dy| model.schrodinger(t, y, dy),
                times[0],
                &mut y,
                &times,
                |_, t, y| {
                    let mut psi = y.to_vec();
                    model.to_lab_state(t, &mut psi);
                    rec.pure(t, DVector::from_vec(psi))
                },
            )?;
            rec.series.diagnostics.ode = stats;
        }
        Plan::Stroboscopic {
            t0,
            tau,
            stride,
            samples,
        } => {
            let (u, stats) = integrate_unitary(&model, t0, tau, &opts.ode)?;
            let (step, reps) = stride_map(&u, stride, samples);
            let step = if reps == 1 { unitarize(&step) } else { step };
            let diag = &mut rec.series.diagnostics;
            diag.propagation = "stroboscopic".into();
            diag.frame = Some(Frame::Lab);
            diag.base_interval = Some(tau);
            diag.stride = Some(stride);
            diag.ode = stats;
            let mut psi = psi0.amplitudes.clone();
            rec.pure(t0, psi.clone())?;
            for k in 1..samples {
                for _ in 0..reps {
                    psi = &step * &psi;
                }
                rec.pure(t0 + (k as u64 * stride) as f64 * tau, psi.clone())?;
            }
        }
    }
    Ok(rec.finish())
}

/// dρ/dt = −i[H(t),ρ] + κD[â]ρ + γD[σ̂₋]ρ + (γ_φ/2)D[σ̂_z]ρ sampled on `grid`.
pub fn evolve_lindblad(
    params: &SystemParams,
    basis: Basis,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &DynamicsOptions,
) -> Result<TimeSeries> {
    if rho0.basis != basis {
        return Err(Error::BasisMismatch("initial state lives on a different basis".into()));
    }
    rho0.validate()?;
    let model = Model::new(params, basis, opts.frame)?;
    let d = basis.dim();
    let mut rec = Recorder::new(basis, opts);
    let mut rho = rho0.matrix.clone();
    model.to_lab_density(0.0, &mut rho);
    match plan(params, grid, opts)? {
        Plan::Direct(times) => {
            rec.series.diagnostics.propagation = "direct".into();
            rec.series.diagnostics.frame = Some(opts.frame);
            let mut y = flatten(&rho0.matrix);
            if let Some(rot) = &model.rotating {
                let t0 = times[0];
                for i in 0..d {
                    for j in 0..d {
                        y[i * d + j] *= C64::from_polar(1.0, (rot.energies[i] - rot.energies[j]) * t0);
                    }
                }
            }
            let mut integ = Integrator::new(y.len(), opts.ode.clone());
            let stats = integ.integrate(
                |t, y, dy| model.lindblad(t, y, dy),
                times[0],
                &mut y,
                &times,
                |_, t, y| {
                    let mut m = unflatten(y, d);
                    model.to_lab_density(t, &mut m);
                    rec.mixed(t, m)
                },
            )?;
            rec.series.diagnostics.ode = stats;
        }
        Plan::Stroboscopic {
            t0,
            tau,
            stride,
            samples,
        } => {
            let (p, stats) = integrate_channel(&model, t0, tau, &opts.ode)?;
            let (mut step, reps) = stride_map(&p, stride, samples);
            if reps == 1 {
                project_trace(&mut step, d);
            }
            let diag = &mut rec.series.diagnostics;
            diag.propagation = "stroboscopic".into();
            diag.frame = Some(Frame::Lab);
            diag.base_interval = Some(tau);
            diag.stride = Some(stride);
            diag.ode = stats;
            let mut v = DVector::from_vec(flatten(&rho0.matrix));
            rec.mixed(t0, rho0.matrix.clone())?;
            for k in 1..samples {
                for _ in 0..reps {
                    v = &step * &v;
                }
                rec.mixed(t0 + (k as u64 * stride) as f64 * tau, unflatten(v.as_slice(), d))?;
            }
        }
    }
    Ok(rec.finish())
}

/// One-period unitary U(T, 0) of a driven system.
#[derive(Clone, Debug)]
pub struct FloquetUnitary {
    pub basis: Basis,
    pub period: f64,
    pub matrix: DMatrix<C64>,
    pub stats: OdeStats,
}

impl FloquetUnitary {
    pub fn compute(params: &SystemParams, basis: Basis, ode: &OdeOptions) -> Result<FloquetUnitary> {
        let period = params
            .period()
            .ok_or_else(|| Error::invalid("the Hamiltonian is not time dependent"))?;
        let model = Model::new(params, basis, Frame::Lab)?;
        let (matrix, stats) = integrate_unitary(&model, 0.0, period, ode)?;
        Ok(FloquetUnitary {
            basis,
            period,
            matrix,
            stats,
        })
    }

    /// Calls `visit(k, ψ(kT))` for k = 1..=periods.
    pub fn orbit(
        &self,
        psi0: &QuantumState,
        periods: usize,
        mut visit: impl FnMut(usize, &DVector<C64>),
    ) -> Result<()> {
        if psi0.basis != self.basis {
            return Err(Error::BasisMismatch("initial state lives on a different basis".into()));
        }
        let mut psi = psi0.amplitudes.clone();
        let mut next = psi.clone();
        for k in 1..=periods {
            next.gemv(ONE, &self.matrix, &psi, ZERO);
            std::mem::swap(&mut psi, &mut next);
            visit(k, &psi);
        }
        Ok(())
    }
}

/// One-period dynamical map P_T acting on row-major flattened density matrices.
#[derive(Clone, Debug)]
pub struct FloquetChannel {
    pub basis: Basis,
    pub period: f64,
    pub matrix: DMatrix<C64>,
    pub stats: OdeStats,
}

impl FloquetChannel {
    pub fn compute(params: &SystemParams, basis: Basis, ode: &OdeOptions) -> Result<FloquetChannel> {
        let period = params
            .period()
            .ok_or_else(|| Error::invalid("the Hamiltonian is not time dependent"))?;
        let model = Model::new(params, basis, Frame::Lab)?;
        let (matrix, stats) = integrate_channel(&model, 0.0, period, ode)?;
        Ok(FloquetChannel {
            basis,
            period,
            matrix,
            stats,
        })
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let d = self.basis.dim();
        let v = &self.matrix * DVector::from_vec(flatten(&rho.matrix));
        DensityMatrix {
            basis: self.basis,
            matrix: unflatten(v.as_slice(), d),
        }
    }
}

/// Dense Liouvillian of a time-independent model, in the row-major vectorization.
pub fn liouvillian(params: &SystemParams, basis: Basis) -> Result<DMatrix<C64>> {
    if params.is_modulated() {
        return Err(Error::invalid("the Liouvillian is time dependent under modulation"));
    }
    let model = Model::new(params, basis, Frame::Lab)?;
    let d2 = model.d * model.d;
    let mut l = DMatrix::zeros(d2, d2);
    let mut e = vec![ZERO; d2];
    let mut out = vec![ZERO; d2];
    for c in 0..d2 {
        e[c] = ONE;
        model.lindblad(0.0, &e, &mut out);
        for r in 0..d2 {
            l[(r, c)] = out[r];
        }
        e[c] = ZERO;
    }
    Ok(l)
}

/// Dynamical map over [t0, t0 + τ] in the lab frame.
pub(crate) fn channel_over(
    params: &SystemParams,
    basis: Basis,
    t0: f64,
    tau: f64,
    ode: &OdeOptions,
) -> Result<(DMatrix<C64>, OdeStats)> {
    let model = Model::new(params, basis, Frame::Lab)?;
    integrate_channel(&model, t0, tau, ode)
}

pub(crate) fn density_from_vec(basis: Basis, v: &[C64]) -> DensityMatrix {
    DensityMatrix {
        basis,
        matrix: unflatten(v, basis.dim()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Qubit;
    use crate::params::{Branch, ModulationTarget};
    use crate::spectrum::dressed_state;

    fn basis(n: usize) -> Basis {
        Basis::new(n).unwrap()
    }

    #[test]
    fn observables_of_basis_states() {
        let b = basis(4);
        let o = observables(&QuantumState::basis_state(b, Qubit::G, 0).unwrap());
        assert_eq!((o.mean_n, o.p_e, o.p_g0), (0.0, 0.0, 1.0));
        let o = observables(&QuantumState::basis_state(b, Qubit::E, 1).unwrap().to_density());
        assert_eq!((o.mean_n, o.p_e, o.p_g0), (1.0, 1.0, 0.0));
        let p = SystemParams::new(1.0, 1.0, 0.05);
        let o = observables(&dressed_state(&p, b, 2, Branch::Plus).unwrap());
        assert!((o.mean_n - 1.5).abs() < 1e-14);
    }

    #[test]
    fn free_vacuum_is_stationary() {
        let p = SystemParams::new(1.0, 0.8, 0.0);
        let b = basis(3);
        let psi = QuantumState::basis_state(b, Qubit::G, 0).unwrap();
        let grid = TimeGrid::new(0.0, 50.0, 11).unwrap();
        for prop in [Propagation::Direct, Propagation::Stroboscopic] {
            let ts =
                evolve_schrodinger(&p, b, &psi, &grid, &DynamicsOptions::default().with_propagation(prop)).unwrap();
            assert!(ts.p_g0.iter().all(|&x| (x - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn free_qubit_decay() {
        let p = SystemParams::new(1.0, 0.7, 0.0).with_dissipation(0.0, 0.02, 0.0);
        let b = basis(2);
        let rho = QuantumState::basis_state(b, Qubit::E, 0).unwrap().to_density();
        let grid = TimeGrid::new(0.0, 100.0, 21).unwrap();
        for prop in [Propagation::Direct, Propagation::Stroboscopic] {
            let ts = evolve_lindblad(&p, b, &rho, &grid, &DynamicsOptions::default().with_propagation(prop)).unwrap();
            for (t, pe) in ts.t.iter().zip(&ts.p_e) {
                assert!((pe - (-0.02 * t).exp()).abs() < 1e-8, "{t} {pe}");
            }
        }
    }

    #[test]
    fn frames_agree() {
        let p = SystemParams::new(1.0, 0.9, 0.05)
            .with_chi0(0.01)
            .with_modulation(ModulationTarget::Omega, 0.05, 2.1)
            .with_dissipation(1e-3, 2e-3, 1e-3);
        let b = basis(4);
        let psi = QuantumState::basis_state(b, Qubit::E, 1).unwrap();
        let grid = TimeGrid::new(0.0, 20.0, 41).unwrap();
        let lab = DynamicsOptions::default()
            .with_propagation(Propagation::Direct)
            .allowing_truncation();
        let rot = lab.clone().with_frame(Frame::Interaction);
        let a = evolve_schrodinger(&p, b, &psi, &grid, &lab).unwrap();
        let r = evolve_schrodinger(&p, b, &psi, &grid, &rot).unwrap();
        let a2 = evolve_lindblad(&p, b, &psi.to_density(), &grid, &lab).unwrap();
        let r2 = evolve_lindblad(&p, b, &psi.to_density(), &grid, &rot).unwrap();
        for k in 0..grid.samples {
            assert!((a.mean_n[k] - r.mean_n[k]).abs() < 1e-8);
            assert!((a.p_g0[k] - r.p_g0[k]).abs() < 1e-8);
            assert!((a2.p_e[k] - r2.p_e[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn stroboscopic_matches_direct() {
        let p = SystemParams::new(1.0, 1.0, 0.05)
            .with_modulation(ModulationTarget::Omega, 0.05, 2.0)
            .with_dissipation(1e-3, 1e-3, 1e-3);
        let b = basis(4);
        let psi = QuantumState::basis_state(b, Qubit::G, 0).unwrap();
        let period = p.period().unwrap();
        let grid = TimeGrid::new(0.0, 12.0 * period, 5).unwrap();
        let strobe = DynamicsOptions::default();
        let direct = strobe.clone().with_propagation(Propagation::Direct);
        let s = evolve_lindblad(&p, b, &psi.to_density(), &grid, &strobe).unwrap();
        let d = evolve_lindblad(&p, b, &psi.to_density(), &grid, &direct).unwrap();
        assert_eq!(s.diagnostics.propagation, "stroboscopic");
        assert_eq!(s.diagnostics.stride, Some(3));
        for k in 0..5 {
            assert!((s.t[k] - d.t[k]).abs() < 1e-9);
            assert!((s.mean_n[k] - d.mean_n[k]).abs() < 1e-8);
            assert!((s.p_g0[k] - d.p_g0[k]).abs() < 1e-8);
        }
        let u = evolve_schrodinger(&p, b, &psi, &grid, &strobe).unwrap();
        let v = evolve_schrodinger(&p, b, &psi, &grid, &direct).unwrap();
        for k in 0..5 {
            assert!((u.p_e[k] - v.p_e[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn truncation_is_reported() {
        let p = SystemParams::new(1.0, 1.0, 0.0);
        let b = basis(2);
        let psi = QuantumState::basis_state(b, Qubit::G, 2).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let err = evolve_schrodinger(&p, b, &psi, &grid, &DynamicsOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::Truncation {
                n_max: 2,
                suggested: 4,
                ..
            }
        ));
        let ts = evolve_schrodinger(&p, b, &psi, &grid, &DynamicsOptions::default().allowing_truncation()).unwrap();
        assert_eq!(ts.diagnostics.warnings.len(), 1);
    }

    #[test]
    fn liouvillian_annihilates_vacuum_and_preserves_trace() {
        let p = SystemParams::new(1.0, 0.8, 0.04).with_dissipation(0.01, 0.02, 0.005);
        let b = basis(3);
        let l = liouvillian(&p, b).unwrap();
        let d = b.dim();
        for c in 0..d * d {
            let tr: C64 = (0..d).map(|i| l[(i * d + i, c)]).sum();
            assert!(tr.norm() < 1e-13);
        }
        let q = SystemParams::new(1.0, 0.8, 0.0).with_dissipation(0.01, 0.02, 0.005);
        let l = liouvillian(&q, b).unwrap();
        let v = QuantumState::basis_state(b, Qubit::G, 0).unwrap().to_density();
        let out = &l * DVector::from_vec(flatten(&v.matrix));
        assert!(out.iter().all(|z| z.norm() < 1e-14));
    }
}
