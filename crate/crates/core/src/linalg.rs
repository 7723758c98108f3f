//! Dense symmetric matrix helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phf::MonomialBasis;

/// A symmetric matrix whose rows and columns are indexed by a monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrixView {
    basis: MonomialBasis,
    entries: DMatrix<f64>,
}

impl SymMatrixView {
    /// Symmetrizes `entries`; fails if the size does not match the basis or
    /// the asymmetry exceeds 1e-10 relative.
    pub fn new(basis: MonomialBasis, entries: DMatrix<f64>) -> Result<Self> {
        let s = basis.len();
        if entries.nrows() != s || entries.ncols() != s {
            return Err(Error::DimensionMismatch { expected: s, got: entries.nrows() });
        }
        let scale = entries.amax().max(1.0);
        let asym = (&entries - entries.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(Error::InvalidInput(format!("matrix is not symmetric (deviation {asym:e})")));
        }
        Ok(SymMatrixView { basis, entries: symmetrize(&entries) })
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigen(&self.entries).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.entries)
    }

    /// Spectral norm.
    pub fn norm2(&self) -> f64 {
        spectral_norm(&self.entries)
    }

    /// Smallest eigenvalue ≥ −1e-8·‖M‖₂.
    pub fn is_psd(&self) -> bool {
        is_psd(&self.entries)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.entries)
    }
}

/// Serializable form: the basis exponents and the row-major entries.
#[derive(Clone, Debug, Serialize)]
pub struct MatrixRecord {
    pub basis: Vec<Vec<u32>>,
    pub rows: Vec<Vec<f64>>,
}

impl From<&SymMatrixView> for MatrixRecord {
    fn from(m: &SymMatrixView) -> Self {
        MatrixRecord {
            basis: m.basis.monomials().iter().map(|e| e.as_slice().to_vec()).collect(),
            rows: m.to_rows(),
        }
    }
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues ascending, with matching eigenvector columns.
pub fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(symmetrize(m)).eigenvalues.min()
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(m)).eigenvalues.amax()
}

pub fn is_psd(m: &DMatrix<f64>) -> bool {
    min_eigenvalue(m) >= -1e-8 * spectral_norm(m)
}

/// log det of a positive definite matrix, or None when Cholesky fails.
pub fn log_det_pd(m: &DMatrix<f64>) -> Option<f64> {
    let ch = m.clone().cholesky()?;
    let l = ch.l_dirty();
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        let d = l[(i, i)];
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        acc += 2.0 * d.ln();
    }
    Some(acc)
}

/// Inverse of a positive definite matrix via Cholesky.
pub fn inverse_pd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    Some(symmetrize(&m.clone().cholesky()?.inverse()))
}

/// Symmetric-matrix vectorization: diagonal entries as is, off-diagonal
/// entries scaled by √2, so that ⟨A, B⟩ = svec(A)·svec(B).
pub fn svec(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in j..n {
            out.push(if i == j { m[(i, j)] } else { std::f64::consts::SQRT_2 * m[(i, j)] });
        }
    }
    out
}

pub fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            if i == j {
                m[(i, j)] = v[k];
            } else {
                let x = v[k] / std::f64::consts::SQRT_2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    m
}

/// Nonnegative least squares min ‖A x − b‖, x ≥ 0 (Lawson–Hanson active set).
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (m, n) = a.shape();
    debug_assert_eq!(b.len(), m);
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.amax().max(1.0) * b.amax().max(1.0) * (m.max(n) as f64);
    for _outer in 0..3 * n + 10 {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        for _inner in 0..3 * n + 10 {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = a.select_columns(&idx);
            let z_sub = match sub.clone().svd(true, true).solve(b, 1e-14) {
                Ok(z) => z,
                Err(_) => break,
            };
            if z_sub.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z_sub[k];
                }
                for j in 0..n {
                    if !passive[j] {
                        x[j] = 0.0;
                    }
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if z_sub[k] <= 0.0 {
                    let denom = x[j] - z_sub[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = alpha.min(0.0);
                    }
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z_sub[k] - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x
}
