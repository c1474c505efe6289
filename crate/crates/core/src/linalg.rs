//! Dense eigendecompositions and spectral-function helpers.
//!
//! All Hamiltonians assembled in this crate are real symmetric in their
//! truncated bases, so the hot path is `sym_eigen`. Complex Hermitian
//! decompositions are needed for momentum operators (imaginary antisymmetric)
//! and for Gram matrices of complex kernels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::C64;

const EIGEN_MAX_ITER: usize = 2000;

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: DMatrix<f64>,
}

/// Eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

fn sort_ascending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// Decompose a real symmetric matrix.
pub fn sym_eigen(m: &DMatrix<f64>) -> Result<SymEigen> {
    debug_assert_eq!(m.nrows(), m.ncols());
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| {
            Error::Numerical(format!(
                "symmetric eigensolver did not converge (dim {}, max|entry| {:.3e})",
                m.nrows(),
                m.amax()
            ))
        })?;
    let order = sort_ascending(eig.eigenvalues.as_slice());
    let n = m.nrows();
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SymEigen { values, vectors })
}

/// Decompose a complex Hermitian matrix.
pub fn herm_eigen(m: &DMatrix<C64>) -> Result<HermEigen> {
    debug_assert_eq!(m.nrows(), m.ncols());
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| {
            Error::Numerical(format!(
                "Hermitian eigensolver did not converge (dim {}, max|entry| {:.3e})",
                m.nrows(),
                m.camax()
            ))
        })?;
    let order = sort_ascending(eig.eigenvalues.as_slice());
    let n = m.nrows();
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermEigen { values, vectors })
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Apply `f(H)` to a complex vector through the spectral decomposition.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64, v: &DVector<C64>) -> DVector<C64> {
        let n = self.dim();
        let mut coeffs = DVector::<C64>::zeros(n);
        for k in 0..n {
            let col = self.vectors.column(k);
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                acc += Complex::from(col[i]) * v[i];
            }
            coeffs[k] = acc * f(self.values[k]);
        }
        let mut out = DVector::<C64>::zeros(n);
        for k in 0..n {
            let col = self.vectors.column(k);
            for i in 0..n {
                out[i] += Complex::from(col[i]) * coeffs[k];
            }
        }
        out
    }

    /// Coefficients of `v` in the eigenbasis.
    pub fn project(&self, v: &DVector<C64>) -> Vec<C64> {
        (0..self.dim())
            .map(|k| {
                let col = self.vectors.column(k);
                (0..self.dim()).map(|i| Complex::from(col[i]) * v[i]).sum()
            })
            .collect()
    }
}

impl HermEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn apply_fn(&self, f: impl Fn(f64) -> C64, v: &DVector<C64>) -> DVector<C64> {
        let n = self.dim();
        let mut out = DVector::<C64>::zeros(n);
        for k in 0..n {
            let col = self.vectors.column(k);
            let mut amp = C64::new(0.0, 0.0);
            for i in 0..n {
                amp += col[i].conj() * v[i];
            }
            let amp = amp * f(self.values[k]);
            for i in 0..n {
                out[i] += col[i] * amp;
            }
        }
        out
    }
}

/// Max absolute deviation from Hermiticity, `max |m - m^H|`.
pub fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..m.nrows() {
        for k in j..m.ncols() {
            let d = (m[(j, k)] - m[(k, j)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Max absolute deviation from symmetry for a real matrix.
pub fn symmetry_error(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..m.nrows() {
        for k in j..m.ncols() {
            worst = worst.max((m[(j, k)] - m[(k, j)]).abs());
        }
    }
    worst
}

/// Complex inner product `<a|b>` with the left argument conjugated.
pub fn inner(a: &DVector<C64>, b: &DVector<C64>) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    (0..a.len()).map(|i| a[i].conj() * b[i]).sum()
}

/// Promote a real matrix to complex entries.
pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| Complex::from(m[(i, j)]))
}
