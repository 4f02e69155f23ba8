//! Adaptive embedded Runge–Kutta integrators (Dormand–Prince 8(5,3) and 5(4)).
//!
//! The step-size controller follows the usual recipe: `scale = atol + max(|y|, |y_new|)·rtol`,
//! RMS error norm, safety 0.9, growth clamped to [0.2, 10], no growth right after a rejection.
//! Output times are hit exactly by shortening the step that would cross them.

use std::ops::{Add, AddAssign, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Element type an integrator can propagate.
pub trait OdeScalar: Copy + Default + Send + Sync + Add<Output = Self> + AddAssign + Mul<f64, Output = Self> {
    fn norm_sqr(self) -> f64;
}

impl OdeScalar for f64 {
    #[inline]
    fn norm_sqr(self) -> f64 {
        self * self
    }
}

impl OdeScalar for Complex64 {
    #[inline]
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dop853,
    Rk45,
}

#[derive(Clone, Debug)]
pub struct OdeOptions {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub first_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            method: Method::Dop853,
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            first_step: None,
            max_steps: 50_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct OdeStats {
    pub nfev: u64,
    pub accepted: u64,
    pub rejected: u64,
}

impl std::ops::AddAssign for OdeStats {
    fn add_assign(&mut self, o: OdeStats) {
        self.nfev += o.nfev;
        self.accepted += o.accepted;
        self.rejected += o.rejected;
    }
}

mod dop853 {
    pub const ORDER: f64 = 7.0;
    pub const ERR_EXP: f64 = -1.0 / 8.0;
    pub const C: [f64; 12] = [
        0.0,
        0.05260015195876773,
        0.0789002279381516,
        0.1183503419072274,
        0.2816496580927726,
        0.3333333333333333,
        0.25,
        0.3076923076923077,
        0.6512820512820513,
        0.6,
        0.8571428571428571,
        1.0,
    ];
    pub const B: [f64; 12] = [
        0.054293734116568765,
        0.0,
        0.0,
        0.0,
        0.0,
        4.450312892752409,
        1.8915178993145003,
        -5.801203960010585,
        0.3111643669578199,
        -0.1521609496625161,
        0.20136540080403034,
        0.04471061572777259,
    ];
    pub const E3: [f64; 13] = [
        -0.18980075407240762,
        0.0,
        0.0,
        0.0,
        0.0,
        4.450312892752409,
        1.8915178993145003,
        -5.801203960010585,
        -0.4226823213237919,
        -0.1521609496625161,
        0.20136540080403034,
        0.02265179219836082,
        0.0,
    ];
    pub const E5: [f64; 13] = [
        0.01312004499419488,
        0.0,
        0.0,
        0.0,
        0.0,
        -1.2251564463762044,
        -0.4957589496572502,
        1.6643771824549864,
        -0.35032884874997366,
        0.3341791187130175,
        0.08192320648511571,
        -0.022355307863886294,
        0.0,
    ];
    pub const A: [[f64; 12]; 12] = [
        [0.0; 12],
        [
            0.05260015195876773,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [
            0.0197250569845379,
            0.0591751709536137,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [
            0.02958758547680685,
            0.0,
            0.08876275643042054,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [
            0.2413651341592667,
            0.0,
            -0.8845494793282861,
            0.924834003261792,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [
            0.037037037037037035,
            0.0,
            0.0,
            0.17082860872947386,
            0.12546768756682242,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [
            0.037109375,
            0.0,
            0.0,
            0.17025221101954405,
            0.06021653898045596,
            -0.017578125,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [
            0.03709200011850479,
            0.0,
            0.0,
            0.17038392571223998,
            0.10726203044637328,
            -0.015319437748624402,
            0.008273789163814023,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [
            0.6241109587160757,
            0.0,
            0.0,
            -3.3608926294469414,
            -0.868219346841726,
            27.59209969944671,
            20.154067550477894,
            -43.48988418106996,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [
            0.47766253643826434,
            0.0,
            0.0,
            -2.4881146199716677,
            -0.590290826836843,
            21.230051448181193,
            15.279233632882423,
            -33.28821096898486,
            -0.020331201708508627,
            0.0,
            0.0,
            0.0,
        ],
        [
            -0.9371424300859873,
            0.0,
            0.0,
            5.186372428844064,
            1.0914373489967295,
            -8.149787010746927,
            -18.52006565999696,
            22.739487099350505,
            2.4936055526796523,
            -3.0467644718982196,
            0.0,
            0.0,
        ],
        [
            2.273310147516538,
            0.0,
            0.0,
            -10.53449546673725,
            -2.0008720582248625,
            -17.9589318631188,
            27.94888452941996,
            -2.8589982771350235,
            -8.87285693353063,
            12.360567175794303,
            0.6433927460157636,
            0.0,
        ],
    ];
}

mod rk45 {
    pub const ORDER: f64 = 4.0;
    pub const ERR_EXP: f64 = -1.0 / 5.0;
    pub const C: [f64; 6] = [0.0, 0.2, 0.3, 0.8, 0.8888888888888888, 1.0];
    pub const B: [f64; 6] = [
        0.09114583333333333,
        0.0,
        0.44923629829290207,
        0.6510416666666666,
        -0.322376179245283,
        0.13095238095238096,
    ];
    pub const E: [f64; 7] = [
        -0.0012326388888888888,
        0.0,
        0.0042527702905061394,
        -0.03697916666666667,
        0.05086379716981132,
        -0.0419047619047619,
        0.025,
    ];
    pub const A: [[f64; 5]; 6] = [
        [0.0; 5],
        [0.2, 0.0, 0.0, 0.0, 0.0],
        [0.075, 0.225, 0.0, 0.0, 0.0],
        [0.9777777777777777, -3.7333333333333334, 3.5555555555555554, 0.0, 0.0],
        [
            2.9525986892242035,
            -11.595793324188385,
            9.822892851699436,
            -0.2908093278463649,
            0.0,
        ],
        [
            2.8462752525252526,
            -10.757575757575758,
            8.906422717743473,
            0.2784090909090909,
            -0.2735313036020583,
        ],
    ];
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// Reusable integrator state for a fixed dimension.
pub struct Integrator<S: OdeScalar> {
    opts: OdeOptions,
    k: Vec<Vec<S>>,
    y_stage: Vec<S>,
    y_new: Vec<S>,
    scale: Vec<f64>,
    h: Option<f64>,
    stats: OdeStats,
}

impl<S: OdeScalar> Integrator<S> {
    pub fn new(dim: usize, opts: OdeOptions) -> Self {
        let stages = match opts.method {
            Method::Dop853 => 13,
            Method::Rk45 => 7,
        };
        Integrator {
            k: vec![vec![S::default(); dim]; stages],
            y_stage: vec![S::default(); dim],
            y_new: vec![S::default(); dim],
            scale: vec![0.0; dim],
            h: opts.first_step,
            opts,
            stats: OdeStats::default(),
        }
    }

    pub fn stats(&self) -> OdeStats {
        self.stats
    }

    /// Integrates `y` from `t0` through every time in `t_out` (non-decreasing, ≥ t0),
    /// calling `on_output(index, t, y)` at each.
    pub fn integrate<F, O>(
        &mut self,
        mut f: F,
        t0: f64,
        y: &mut [S],
        t_out: &[f64],
        mut on_output: O,
    ) -> Result<OdeStats>
    where
        F: FnMut(f64, &[S], &mut [S]),
        O: FnMut(usize, f64, &[S]) -> Result<()>,
    {
        let n = y.len();
        if n != self.y_new.len() {
            return Err(Error::Solver(format!(
                "state length {n} does not match integrator dimension {}",
                self.y_new.len()
            )));
        }
        if !(self.opts.rtol > 0.0 && self.opts.atol >= 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        let before = self.stats;
        let mut t = t0;
        f(t, y, &mut self.k[0]);
        self.stats.nfev += 1;
        let mut steps = 0usize;
        for (idx, &target) in t_out.iter().enumerate() {
            if target < t {
                return Err(Error::invalid("output times must be non-decreasing"));
            }
            while t < target {
                let remaining = target - t;
                if self.h.is_none() {
                    let h0 = self.initial_step(&mut f, t, y, remaining);
                    self.h = Some(h0);
                }
                let mut h = self.h.unwrap().min(self.opts.max_step);
                let mut rejected = false;
                loop {
                    steps += 1;
                    if steps > self.opts.max_steps {
                        return Err(Error::Solver(format!(
                            "step budget of {} exhausted at t = {t:.6e}",
                            self.opts.max_steps
                        )));
                    }
                    let last = h >= remaining;
                    let h_try = if last { remaining } else { h };
                    let min_step = 10.0 * f64::EPSILON * t.abs().max(1.0);
                    if h_try < min_step && !last {
                        return Err(Error::Solver(format!("step size {h_try:.3e} underflow at t = {t:.6e}")));
                    }
                    let err = self.step(&mut f, t, y, h_try);
                    if err <= 1.0 {
                        let mut factor = if err == 0.0 {
                            MAX_FACTOR
                        } else {
                            (SAFETY * err.powf(self.err_exp())).min(MAX_FACTOR)
                        };
                        if rejected {
                            factor = factor.min(1.0);
                        }
                        t = if last { target } else { t + h_try };
                        y.copy_from_slice(&self.y_new);
                        // FSAL: the last stage is f(t+h, y_new).
                        let last_stage = self.k.len() - 1;
                        self.k.swap(0, last_stage);
                        self.stats.accepted += 1;
                        // A step clamped onto an output time says nothing about the next one.
                        let clamped = last && h_try < h;
                        self.h = Some(if clamped { h } else { h_try * factor });
                        break;
                    }
                    self.stats.rejected += 1;
                    rejected = true;
                    h = h_try * (SAFETY * err.powf(self.err_exp())).max(MIN_FACTOR);
                }
            }
            on_output(idx, t, y)?;
        }
        let mut delta = self.stats;
        delta.nfev -= before.nfev;
        delta.accepted -= before.accepted;
        delta.rejected -= before.rejected;
        Ok(delta)
    }

    fn err_exp(&self) -> f64 {
        match self.opts.method {
            Method::Dop853 => dop853::ERR_EXP,
            Method::Rk45 => rk45::ERR_EXP,
        }
    }

    fn order(&self) -> f64 {
        match self.opts.method {
            Method::Dop853 => dop853::ORDER,
            Method::Rk45 => rk45::ORDER,
        }
    }

    fn initial_step<F>(&mut self, f: &mut F, t: f64, y: &[S], interval: f64) -> f64
    where
        F: FnMut(f64, &[S], &mut [S]),
    {
        let n = y.len() as f64;
        let (rtol, atol) = (self.opts.rtol, self.opts.atol);
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..y.len() {
            let sc = atol + y[i].norm_sqr().sqrt() * rtol;
            self.scale[i] = sc;
            d0 += y[i].norm_sqr() / (sc * sc);
            d1 += self.k[0][i].norm_sqr() / (sc * sc);
        }
        let d0 = (d0 / n).sqrt();
        let d1 = (d1 / n).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(interval);
        for i in 0..y.len() {
            self.y_stage[i] = y[i] + self.k[0][i] * h0;
        }
        let (probe, rest) = self.k.split_last_mut().unwrap();
        f(t + h0, &self.y_stage, probe);
        self.stats.nfev += 1;
        let mut d2 = 0.0;
        for i in 0..y.len() {
            let diff = probe[i] + rest[0][i] * -1.0;
            d2 += diff.norm_sqr() / (self.scale[i] * self.scale[i]);
        }
        let d2 = (d2 / n).sqrt() / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / (self.order() + 1.0))
        };
        (100.0 * h0).min(h1).min(interval).min(self.opts.max_step)
    }

    /// One trial step; fills `y_new` and the FSAL stage, returns the scaled error norm.
    fn step<F>(&mut self, f: &mut F, t: f64, y: &[S], h: f64) -> f64
    where
        F: FnMut(f64, &[S], &mut [S]),
    {
        self.stats.nfev += self.k.len() as u64 - 1;
        match self.opts.method {
            Method::Dop853 => {
                self.stages(f, t, y, h, &dop853::C, |s, j| dop853::A[s][j], &dop853::B);
                let n = y.len();
                self.fill_scale(y);
                let mut e5 = 0.0;
                let mut e3 = 0.0;
                for i in 0..n {
                    let mut a5 = S::default();
                    let mut a3 = S::default();
                    for s in 0..13 {
                        if dop853::E5[s] != 0.0 || dop853::E3[s] != 0.0 {
                            a5 += self.k[s][i] * dop853::E5[s];
                            a3 += self.k[s][i] * dop853::E3[s];
                        }
                    }
                    let inv = 1.0 / (self.scale[i] * self.scale[i]);
                    e5 += a5.norm_sqr() * inv;
                    e3 += a3.norm_sqr() * inv;
                }
                if e5 == 0.0 && e3 == 0.0 {
                    return 0.0;
                }
                let denom = e5 + 0.01 * e3;
                h.abs() * e5 / (denom * n as f64).sqrt()
            }
            Method::Rk45 => {
                self.stages(f, t, y, h, &rk45::C, |s, j| rk45::A[s][j], &rk45::B);
                let n = y.len();
                self.fill_scale(y);
                let mut err = 0.0;
                for i in 0..n {
                    let mut acc = S::default();
                    for s in 0..7 {
                        if rk45::E[s] != 0.0 {
                            acc += self.k[s][i] * rk45::E[s];
                        }
                    }
                    err += (acc * h).norm_sqr() / (self.scale[i] * self.scale[i]);
                }
                (err / n as f64).sqrt()
            }
        }
    }

    fn stages<F>(&mut self, f: &mut F, t: f64, y: &[S], h: f64, c: &[f64], a: impl Fn(usize, usize) -> f64, b: &[f64])
    where
        F: FnMut(f64, &[S], &mut [S]),
    {
        let n_stages = c.len();
        for s in 1..n_stages {
            self.y_stage.copy_from_slice(y);
            for j in 0..s {
                let coef = a(s, j);
                if coef != 0.0 {
                    let hc = h * coef;
                    let kj = &self.k[j];
                    for (ys, &kv) in self.y_stage.iter_mut().zip(kj.iter()) {
                        *ys += kv * hc;
                    }
                }
            }
            f(t + c[s] * h, &self.y_stage, &mut self.k[s]);
        }
        self.y_new.copy_from_slice(y);
        for (j, &bj) in b.iter().enumerate() {
            if bj != 0.0 {
                let hb = h * bj;
                for (yn, &kv) in self.y_new.iter_mut().zip(self.k[j].iter()) {
                    *yn += kv * hb;
                }
            }
        }
        let last = self.k.len() - 1;
        f(t + h, &self.y_new, &mut self.k[last]);
    }

    fn fill_scale(&mut self, y: &[S]) {
        let (rtol, atol) = (self.opts.rtol, self.opts.atol);
        for i in 0..y.len() {
            let m = y[i].norm_sqr().max(self.y_new[i].norm_sqr()).sqrt();
            self.scale[i] = atol + m * rtol;
        }
    }
}

/// Convenience wrapper: integrate once and collect the state at every output time.
pub fn solve<S, F>(f: F, t0: f64, y0: &[S], t_out: &[f64], opts: OdeOptions) -> Result<(Vec<Vec<S>>, OdeStats)>
where
    S: OdeScalar,
    F: FnMut(f64, &[S], &mut [S]),
{
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(t_out.len());
    let mut integ = Integrator::new(y.len(), opts);
    let stats = integ.integrate(f, t0, &mut y, t_out, |_, _, y| {
        out.push(y.to_vec());
        Ok(())
    })?;
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn dop853_harmonic_oscillator() {
        let ts: Vec<f64> = (1..=20).map(|k| k as f64).collect();
        let (ys, stats) = solve(harmonic, 0.0, &[1.0, 0.0], &ts, OdeOptions::default()).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-9, "t={t}");
            assert!((y[1] + t.sin()).abs() < 1e-9);
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn rk45_harmonic_oscillator() {
        let opts = OdeOptions::default().with_method(Method::Rk45).with_tol(1e-9, 1e-12);
        let (ys, _) = solve(harmonic, 0.0, &[1.0, 0.0], &[10.0], opts).unwrap();
        assert!((ys[0][0] - 10f64.cos()).abs() < 1e-7);
    }

    #[test]
    fn complex_rotation_keeps_modulus() {
        let w = 3.7;
        let f = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = Complex64::new(0.0, -w) * y[0];
        };
        let ts: Vec<f64> = (0..50).map(|k| 0.7 * k as f64).collect();
        let (ys, _) = solve(f, 0.0, &[Complex64::new(1.0, 0.0)], &ts, OdeOptions::default()).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            let exact = Complex64::from_polar(1.0, -w * t);
            assert!((y[0] - exact).norm() < 1e-8);
        }
    }

    #[test]
    fn exponential_decay_with_time_dependence() {
        // y' = -2t y  →  y = exp(-t²)
        let f = |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -2.0 * t * y[0];
        let (ys, _) = solve(f, 0.0, &[1.0], &[0.5, 1.0, 2.0], OdeOptions::default()).unwrap();
        for (t, y) in [0.5f64, 1.0, 2.0].iter().zip(&ys) {
            assert!((y[0] - (-t * t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn output_at_start_time() {
        let (ys, _) = solve(harmonic, 0.0, &[1.0, 0.0], &[0.0, 1.0], OdeOptions::default()).unwrap();
        assert_eq!(ys[0], vec![1.0, 0.0]);
    }

    #[test]
    fn rejects_backward_outputs() {
        let r = solve(harmonic, 0.0, &[1.0, 0.0], &[1.0, 0.5], OdeOptions::default());
        assert!(r.is_err());
    }
}
