//! Simultaneous diagonalization of an SPD pair and Loewner-order utilities.
//!
//! For SPD `Σ₁`, `Σ₂` a congruence `S` gives `S Σ₁ Sᵀ = I` and
//! `S Σ₂ Sᵀ = Γ` (diagonal). With `Σ₁ = Uᵀ Λ U` the joint diagonalizer
//! `V = Λ^{1/2} S` satisfies `V Σ₁ Vᵀ = Λ` and `V Σ₂ Vᵀ = Λ' = Λ Γ`.
//!
//! `S` is built as `Qᵀ L⁻¹` from the Cholesky factor `Σ₁ = L Lᵀ` and the
//! eigendecomposition `L⁻¹ Σ₂ L⁻ᵀ = Q diag(γ) Qᵀ`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, MAX_CONDITION, RTOL};
use crate::model::{SpdMatrix, SymMatrix};

/// How the rows of `S` (the generalized eigenvalues `γ`) are paired with
/// the eigenvalues `λ` of `Σ₁` (always descending).
///
/// Every pairing yields a valid diagonalizer. The upper rate bound does not
/// depend on the pairing; the lower bound does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    /// [`Pairing::Aligned`] when `Σ₁` and `Σ₂` commute, otherwise [`Pairing::Descending`].
    #[default]
    Auto,
    /// `γ` descending, so `λ'ᵢ = λᵢ γᵢ` is descending too.
    Descending,
    /// `γ` ascending against descending `λ`.
    Reversed,
    /// Row `i` of `S` is the one most parallel to the `i`-th eigenvector of `Σ₁`.
    /// For commuting pairs the rows of `V` are then orthogonal and `λ'` is
    /// the spectrum of `Σ₂`.
    Aligned,
}

/// Output of [`whiten_diagonalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointDiagonalization {
    /// Congruence with `S Σ₁ Sᵀ = I`, `S Σ₂ Sᵀ = diag(gamma)`.
    pub s: DMatrix<f64>,
    /// Orthogonal; rows are eigenvectors of `Σ₁`, so `Uᵀ diag(lambda) U = Σ₁`.
    pub u: DMatrix<f64>,
    /// Joint diagonalizer `diag(lambda)^{1/2} S`.
    pub v: DMatrix<f64>,
    /// Eigenvalues of `Σ₁`, descending.
    pub lambda: DVector<f64>,
    /// `lambda[i] * gamma[i]`, the diagonal of `V Σ₂ Vᵀ`.
    pub lambda_prime: DVector<f64>,
    /// Generalized eigenvalues of `(Σ₂, Σ₁)` in the order fixed by the pairing.
    pub gamma: DVector<f64>,
    /// The pairing used; never [`Pairing::Auto`].
    pub pairing: Pairing,
}

impl JointDiagonalization {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// Worst relative residual over the six defining identities.
    pub fn identity_residual(&self, sigma1: &DMatrix<f64>, sigma2: &DMatrix<f64>) -> f64 {
        let n = self.dim();
        let scale = |d: &DVector<f64>| d.amax().max(f64::MIN_POSITIVE);
        let r = [
            linalg::max_abs(&(&self.s * sigma1 * self.s.transpose() - DMatrix::identity(n, n))),
            linalg::max_abs(&(&self.s * sigma2 * self.s.transpose() - DMatrix::from_diagonal(&self.gamma)))
                / scale(&self.gamma),
            linalg::max_abs(&(&self.v * sigma1 * self.v.transpose() - DMatrix::from_diagonal(&self.lambda)))
                / scale(&self.lambda),
            linalg::max_abs(
                &(&self.v * sigma2 * self.v.transpose() - DMatrix::from_diagonal(&self.lambda_prime)),
            ) / scale(&self.lambda_prime),
            (0..n)
                .map(|i| (self.lambda_prime[i] - self.lambda[i] * self.gamma[i]).abs())
                .fold(0.0, f64::max)
                / scale(&self.lambda_prime),
            linalg::max_abs(&(self.u.transpose() * DMatrix::from_diagonal(&self.lambda) * &self.u - sigma1))
                / linalg::spectral_norm(sigma1),
        ];
        r.into_iter().fold(0.0, f64::max)
    }
}

/// Simultaneously diagonalize `(Σ₁, Σ₂)` with the default pairing.
pub fn whiten_diagonalize(sigma1: &SpdMatrix, sigma2: &SpdMatrix) -> Result<JointDiagonalization> {
    whiten_diagonalize_paired(sigma1, sigma2, Pairing::Auto)
}

/// `‖Σ₁Σ₂ − Σ₂Σ₁‖ ≤ RTOL ‖Σ₁‖ ‖Σ₂‖`.
pub fn commute(sigma1: &DMatrix<f64>, sigma2: &DMatrix<f64>) -> bool {
    linalg::commutator_norm(sigma1, sigma2) <= RTOL * linalg::spectral_norm(sigma1) * linalg::spectral_norm(sigma2)
}

/// Permutation `p` with `p[i]` the column of `q` assigned to row `i` of `u`,
/// chosen greedily by largest `|cos|` between `uᵢ` and the rows of `S = Qᵀ L⁻¹`.
fn aligned_order(u: &DMatrix<f64>, s: &DMatrix<f64>) -> Vec<usize> {
    let n = u.nrows();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for j in 0..n {
        let row = s.row(j);
        let norm = row.norm();
        for i in 0..n {
            pairs.push(((u.row(i).dot(&row) / norm).abs(), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut order = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (_, i, j) in pairs {
        if order[i] == usize::MAX && !taken[j] {
            order[i] = j;
            taken[j] = true;
        }
    }
    order
}

pub fn whiten_diagonalize_paired(
    sigma1: &SpdMatrix,
    sigma2: &SpdMatrix,
    pairing: Pairing,
) -> Result<JointDiagonalization> {
    let n = sigma1.dim();
    if sigma2.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "sigma1 is {n}x{n}, sigma2 is {0}x{0}",
            sigma2.dim()
        )));
    }

    let (lambda, eigvecs) = linalg::sym_eigen_desc(sigma1);
    let condition = lambda[0] / lambda[n - 1];
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned {
            name: "sigma1".into(),
            condition,
        });
    }

    let l = linalg::cholesky(sigma1, "sigma1")?.l();
    let l_inv_s2 = linalg::lower_solve(&l, sigma2);
    let whitened = linalg::lower_solve(&l, &l_inv_s2.transpose());
    let (mut gamma, mut q) = linalg::sym_eigen_desc(&whitened);
    let u = eigvecs.transpose();
    let pairing = match pairing {
        Pairing::Auto if commute(sigma1, sigma2) => Pairing::Aligned,
        Pairing::Auto => Pairing::Descending,
        p => p,
    };
    let order: Vec<usize> = match pairing {
        Pairing::Reversed => (0..n).rev().collect(),
        Pairing::Aligned => {
            let s = l.transpose().solve_upper_triangular(&q).expect("nonsingular factor").transpose();
            aligned_order(&u, &s)
        }
        _ => (0..n).collect(),
    };
    gamma = DVector::from_iterator(n, order.iter().map(|&j| gamma[j]));
    q = DMatrix::from_fn(n, n, |i, j| q[(i, order[j])]);
    if gamma[gamma.argmin().0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            name: "sigma2".into(),
            min_eigenvalue: gamma.min(),
            max_eigenvalue: gamma.max(),
        });
    }

    // S = Qᵀ L⁻¹, i.e. Sᵀ = L⁻ᵀ Q.
    let s = l.transpose().solve_upper_triangular(&q).expect("nonsingular factor").transpose();
    let sqrt_lambda = lambda.map(f64::sqrt);
    let v = DMatrix::from_diagonal(&sqrt_lambda) * &s;
    let lambda_prime = lambda.component_mul(&gamma);

    Ok(JointDiagonalization {
        s,
        u,
        v,
        lambda,
        lambda_prime,
        gamma,
        pairing,
    })
}

/// `A ⪯ B`: the smallest eigenvalue of `B − A` is at least `−tol · ‖B‖₂`.
pub fn loewner_leq(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare {0}x{0} with {1}x{1}",
            a.dim(),
            b.dim()
        )));
    }
    let gap = linalg::min_eigenvalue(&(b.matrix() - a.matrix()));
    Ok(gap >= -tol * linalg::spectral_norm(b))
}

/// Whether the sorted eigenvalues of `q1` dominate those of `q2` position by position.
///
/// Both arguments are expected to be positive semidefinite.
pub fn eigen_order_dominates(q1: &SymMatrix, q2: &SymMatrix) -> Result<bool> {
    if q1.dim() != q2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare {0}x{0} with {1}x{1}",
            q1.dim(),
            q2.dim()
        )));
    }
    let e1 = q1.eigenvalues();
    let e2 = q2.eigenvalues();
    let tol = RTOL * e1[0].abs().max(e2[0].abs()).max(1.0);
    Ok(e1.iter().zip(&e2).all(|(a, b)| *a >= *b - tol))
}
