//! Small dense linear-algebra helpers shared by the rest of the crate.
//!
//! Inverses are never formed explicitly: every `A⁻¹ B` goes through a
//! Cholesky solve.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative tolerance for symmetry and matrix-identity checks.
pub const RTOL: f64 = 1e-9;
/// Relative tolerance for positive definiteness: `λ_min > PD_TOL · λ_max`.
pub const PD_TOL: f64 = 1e-10;
/// Absolute tolerance for comparing rates, in nats.
pub const RATE_ATOL: f64 = 1e-9;
/// Largest condition number accepted when whitening.
pub const MAX_CONDITION: f64 = 1e12;

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
///
/// Column `i` of the returned matrix is the eigenvector for `values[i]`.
/// Ties keep the order produced by the solver (stable sort).
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues of a symmetric matrix, descending.
pub fn sym_eigenvalues_desc(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues_desc(m).last().copied().unwrap_or(0.0)
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues_desc(m)
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `max |M[i][j] − M[j][i]|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `max |A − B|` scaled by `max(1, spectral_norm(B))`.
pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_abs(&(a - b)) / spectral_norm(b).max(1.0)
}

pub fn cholesky(m: &DMatrix<f64>, name: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(symmetrize(m)).ok_or_else(|| {
        let ev = sym_eigenvalues_desc(m);
        Error::NotPositiveDefinite {
            name: name.to_string(),
            min_eigenvalue: ev.last().copied().unwrap_or(f64::NAN),
            max_eigenvalue: ev.first().copied().unwrap_or(f64::NAN),
        }
    })
}

/// `A⁻¹ B` for SPD `A`.
pub fn spd_solve(a: &DMatrix<f64>, b: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    Ok(cholesky(a, name)?.solve(b))
}

/// `log det A` for SPD `A`.
pub fn log_det_spd(a: &DMatrix<f64>, name: &str) -> Result<f64> {
    let l = cholesky(a, name)?.l();
    Ok(2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Frobenius norm of `AB − BA`.
pub fn commutator_norm(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a * b - b * a).norm()
}

/// Inverse of a lower-triangular factor applied from the left: `L⁻¹ B`.
pub fn lower_solve(l: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    l.solve_lower_triangular(b)
        .expect("Cholesky factor has a positive diagonal")
}

/// Rows of `m` selected by `rows`, in order.
pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// Sub-block `m[rows, cols]`.
pub fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Convert a row-major nested vector into a matrix.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::DimensionMismatch("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
