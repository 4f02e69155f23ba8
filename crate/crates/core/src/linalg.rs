//! Small dense/sparse helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);
pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Compressed-row complex matrix for the hot right-hand sides.
#[derive(Clone, Debug, Default)]
pub struct Sparse {
    pub dim: usize,
    /// Row-major triplets, sorted by row then column, duplicates merged.
    pub entries: Vec<(usize, usize, C64)>,
}

impl Sparse {
    pub fn from_dense(m: &DMatrix<C64>) -> Sparse {
        let mut entries = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != ZERO {
                    entries.push((i, j, v));
                }
            }
        }
        Sparse {
            dim: m.nrows(),
            entries,
        }
    }

    pub fn scaled(&self, c: C64) -> Sparse {
        Sparse {
            dim: self.dim,
            entries: self.entries.iter().map(|&(i, j, v)| (i, j, v * c)).collect(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// y += c · A x
    #[inline]
    pub fn mul_vec_acc(&self, c: C64, x: &[C64], y: &mut [C64]) {
        for &(i, j, v) in &self.entries {
            y[i] += c * v * x[j];
        }
    }

    /// Y += c · A X for a row-major d×d block X.
    #[inline]
    pub fn left_mul_acc(&self, c: C64, x: &[C64], y: &mut [C64]) {
        let d = self.dim;
        for &(i, k, v) in &self.entries {
            let cv = c * v;
            let (src, dst) = (&x[k * d..(k + 1) * d], &mut y[i * d..(i + 1) * d]);
            for (o, &s) in dst.iter_mut().zip(src) {
                *o += cv * s;
            }
        }
    }

    /// Y += c · X A for a row-major d×d block X.
    #[inline]
    pub fn right_mul_acc(&self, c: C64, x: &[C64], y: &mut [C64]) {
        let d = self.dim;
        for &(k, j, v) in &self.entries {
            let cv = c * v;
            for r in 0..d {
                y[r * d + j] += cv * x[r * d + k];
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }
}

/// Complex matrix product through four real gemms (matrixmultiply backend).
pub fn cmatmul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    assert_eq!(a.ncols(), b.nrows());
    if a.nrows() * a.ncols() * b.ncols() < 32 * 32 * 32 {
        return a * b;
    }
    let ar = a.map(|z| z.re);
    let ai = a.map(|z| z.im);
    let br = b.map(|z| z.re);
    let bi = b.map(|z| z.im);
    let mut re = &ar * &br;
    re -= &ai * &bi;
    let mut im = &ar * &bi;
    im += &ai * &br;
    DMatrix::from_fn(a.nrows(), b.ncols(), |i, j| C64::new(re[(i, j)], im[(i, j)]))
}

/// Dense matrix–vector product for a propagator applied many times.
pub fn cmatvec(a: &DMatrix<C64>, x: &DVector<C64>) -> DVector<C64> {
    a * x
}

/// a^n by binary powering.
pub fn cmatpow(a: &DMatrix<C64>, mut n: u64) -> DMatrix<C64> {
    let mut result = DMatrix::<C64>::identity(a.nrows(), a.ncols());
    let mut base = a.clone();
    let mut first = true;
    while n > 0 {
        if n & 1 == 1 {
            result = if first { base.clone() } else { cmatmul(&result, &base) };
            first = false;
        }
        n >>= 1;
        if n > 0 {
            base = cmatmul(&base, &base);
        }
    }
    result
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Largest entrywise |A − A†|.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Nearest unitary (polar factor) via SVD: U = W V†.
pub fn unitarize(m: &DMatrix<C64>) -> DMatrix<C64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    cmatmul(&u, &v_t)
}
