//! Joint Gaussian model of the source `x`, the encoder observation `y` and
//! the decoder side information `z`, plus the conditional statistics that
//! every rate computation consumes.
//!
//! Writing the source as a linear estimate from the other variables,
//!
//! ```text
//! x = C y + G z + n₂,   cov(n₂) = Σ_{x|yz}
//! y = Γ z + n₃,         cov(n₃) = Σ_{y|z}
//! ```
//!
//! gives the identity `C Σ_{y|z} Cᵀ = Σ_{x|z} − Σ_{x|yz}` which
//! [`derive_stats`] checks on every call.

use std::ops::{Deref, Range};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, PD_TOL, RTOL};

/// Diagonal loading used by [`random_instance`].
pub const RANDOM_INSTANCE_EPS: f64 = 0.1;

/// A real symmetric matrix.
///
/// Construction rejects matrices whose asymmetry exceeds `RTOL` relative to
/// the spectral norm; the stored value is the exact symmetrization.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>, name: &str) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "`{name}` must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let asym = linalg::asymmetry(&m);
        let scale = linalg::spectral_norm(&m).max(f64::MIN_POSITIVE);
        if asym > RTOL * scale {
            return Err(Error::NotSymmetric {
                name: name.to_string(),
                asymmetry: asym,
            });
        }
        Ok(Self(linalg::symmetrize(&m)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::sym_eigenvalues_desc(&self.0)
    }
}

impl Deref for SymMatrix {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// A symmetric, strictly positive-definite matrix: `λ_min > PD_TOL · λ_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    pub fn new(m: DMatrix<f64>, name: &str) -> Result<Self> {
        let sym = SymMatrix::new(m, name)?;
        let ev = sym.eigenvalues();
        let (max, min) = (ev[0], ev[ev.len() - 1]);
        if !(max > 0.0) || !(min > PD_TOL * max) {
            return Err(Error::NotPositiveDefinite {
                name: name.to_string(),
                min_eigenvalue: min,
                max_eigenvalue: max,
            });
        }
        Ok(Self(sym.0))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Wrap without validation; callers guarantee symmetry and definiteness.
    #[cfg(test)]
    pub(crate) fn from_unchecked(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::sym_eigenvalues_desc(&self.0)
    }

    pub fn as_sym(&self) -> SymMatrix {
        SymMatrix(self.0.clone())
    }
}

impl Deref for SpdMatrix {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Joint covariance of `(x, y, z)` stored block-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    sigma_x: SpdMatrix,
    sigma_y: SpdMatrix,
    sigma_z: SpdMatrix,
    sigma_xy: DMatrix<f64>,
    sigma_xz: DMatrix<f64>,
    sigma_yz: DMatrix<f64>,
    joint: SpdMatrix,
}

impl JointModel {
    /// Assemble a model from its six blocks; the full joint covariance must be SPD.
    pub fn new(
        sigma_x: DMatrix<f64>,
        sigma_y: DMatrix<f64>,
        sigma_z: DMatrix<f64>,
        sigma_xy: DMatrix<f64>,
        sigma_xz: DMatrix<f64>,
        sigma_yz: DMatrix<f64>,
    ) -> Result<Self> {
        let (nx, ny, nz) = (sigma_x.nrows(), sigma_y.nrows(), sigma_z.nrows());
        let expect = |m: &DMatrix<f64>, r: usize, c: usize, name: &str| {
            if m.nrows() != r || m.ncols() != c {
                Err(Error::DimensionMismatch(format!(
                    "`{name}` should be {r}x{c}, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )))
            } else {
                Ok(())
            }
        };
        expect(&sigma_xy, nx, ny, "sigma_xy")?;
        expect(&sigma_xz, nx, nz, "sigma_xz")?;
        expect(&sigma_yz, ny, nz, "sigma_yz")?;

        let sigma_x = SpdMatrix::new(sigma_x, "sigma_x")?;
        let sigma_y = SpdMatrix::new(sigma_y, "sigma_y")?;
        let sigma_z = SpdMatrix::new(sigma_z, "sigma_z")?;

        let n = nx + ny + nz;
        let mut joint = DMatrix::zeros(n, n);
        joint.view_mut((0, 0), (nx, nx)).copy_from(sigma_x.matrix());
        joint.view_mut((nx, nx), (ny, ny)).copy_from(sigma_y.matrix());
        joint.view_mut((nx + ny, nx + ny), (nz, nz)).copy_from(sigma_z.matrix());
        joint.view_mut((0, nx), (nx, ny)).copy_from(&sigma_xy);
        joint.view_mut((nx, 0), (ny, nx)).copy_from(&sigma_xy.transpose());
        joint.view_mut((0, nx + ny), (nx, nz)).copy_from(&sigma_xz);
        joint.view_mut((nx + ny, 0), (nz, nx)).copy_from(&sigma_xz.transpose());
        joint.view_mut((nx, nx + ny), (ny, nz)).copy_from(&sigma_yz);
        joint.view_mut((nx + ny, nx), (nz, ny)).copy_from(&sigma_yz.transpose());
        let joint = SpdMatrix::new(joint, "joint covariance")?;

        Ok(Self {
            sigma_x,
            sigma_y,
            sigma_z,
            sigma_xy,
            sigma_xz,
            sigma_yz,
            joint,
        })
    }

    /// Build a model from an already assembled `(n_x + n_y + n_z)`-dimensional covariance.
    pub fn from_joint(joint: DMatrix<f64>, n_x: usize, n_y: usize, n_z: usize) -> Result<Self> {
        if joint.nrows() != n_x + n_y + n_z || joint.ncols() != joint.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "joint covariance is {}x{}, dims sum to {}",
                joint.nrows(),
                joint.ncols(),
                n_x + n_y + n_z
            )));
        }
        let block = |r: usize, c: usize, h: usize, w: usize| joint.view((r, c), (h, w)).into_owned();
        Self::new(
            block(0, 0, n_x, n_x),
            block(n_x, n_x, n_y, n_y),
            block(n_x + n_y, n_x + n_y, n_z, n_z),
            block(0, n_x, n_x, n_y),
            block(0, n_x + n_y, n_x, n_z),
            block(n_x, n_x + n_y, n_y, n_z),
        )
    }

    pub fn n_x(&self) -> usize {
        self.sigma_x.dim()
    }
    pub fn n_y(&self) -> usize {
        self.sigma_y.dim()
    }
    pub fn n_z(&self) -> usize {
        self.sigma_z.dim()
    }
    pub fn sigma_x(&self) -> &SpdMatrix {
        &self.sigma_x
    }
    pub fn sigma_y(&self) -> &SpdMatrix {
        &self.sigma_y
    }
    pub fn sigma_z(&self) -> &SpdMatrix {
        &self.sigma_z
    }
    pub fn sigma_xy(&self) -> &DMatrix<f64> {
        &self.sigma_xy
    }
    pub fn sigma_xz(&self) -> &DMatrix<f64> {
        &self.sigma_xz
    }
    pub fn sigma_yz(&self) -> &DMatrix<f64> {
        &self.sigma_yz
    }

    /// The assembled joint covariance, ordered `(x, y, z)`.
    pub fn joint(&self) -> &SpdMatrix {
        &self.joint
    }

    pub fn x_range(&self) -> Range<usize> {
        0..self.n_x()
    }
    pub fn y_range(&self) -> Range<usize> {
        self.n_x()..self.n_x() + self.n_y()
    }
    pub fn z_range(&self) -> Range<usize> {
        self.n_x() + self.n_y()..self.joint.dim()
    }
}

/// Conditional covariances and regression coefficients of a [`JointModel`].
///
/// Produced by [`derive_stats`]; the fields are public for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalStats {
    pub sigma_x_given_z: SpdMatrix,
    pub sigma_x_given_yz: SpdMatrix,
    pub sigma_y_given_z: SpdMatrix,
    /// Coefficient of `y` in the regression of `x` on `(y, z)`, `n_x × n_y`.
    pub c: DMatrix<f64>,
    /// Coefficient of `z` in the regression of `x` on `(y, z)`, `n_x × n_z`.
    pub g: DMatrix<f64>,
    /// Regression of `y` on `z`, `n_y × n_z`.
    pub gamma_yz: DMatrix<f64>,
}

impl ConditionalStats {
    pub fn n_x(&self) -> usize {
        self.sigma_x_given_z.dim()
    }

    pub fn n_y(&self) -> usize {
        self.sigma_y_given_z.dim()
    }

    /// `Σ_{x|z} − Σ_{x|yz}`, the part of the source error removable by describing `y`.
    pub fn informative_cov(&self) -> DMatrix<f64> {
        self.sigma_x_given_z.matrix() - self.sigma_x_given_yz.matrix()
    }

    /// Residual of `C Σ_{y|z} Cᵀ = Σ_{x|z} − Σ_{x|yz}` relative to the spectral norm of `Σ_{x|z}`.
    pub fn regression_identity_residual(&self) -> f64 {
        let lhs = &self.c * self.sigma_y_given_z.matrix() * self.c.transpose();
        linalg::max_abs(&(lhs - self.informative_cov()))
            / linalg::spectral_norm(self.sigma_x_given_z.matrix())
    }
}

/// Conditional covariance `Σ_tt − Σ_tg Σ_gg⁻¹ Σ_gt` of the `target` block given the `given` block.
///
/// An empty `given` set returns the marginal `Σ_tt`.
pub fn schur_conditional(joint: &SpdMatrix, target: &[usize], given: &[usize]) -> Result<SpdMatrix> {
    let n = joint.dim();
    if target.is_empty() {
        return Err(Error::IndexError("target index set is empty".into()));
    }
    let mut seen = vec![false; n];
    for &i in target.iter().chain(given) {
        if i >= n {
            return Err(Error::IndexError(format!("index {i} out of range for dimension {n}")));
        }
        if seen[i] {
            return Err(Error::IndexError(format!("index {i} repeated or shared between sets")));
        }
        seen[i] = true;
    }

    let s_tt = linalg::select(joint, target, target);
    if given.is_empty() {
        return SpdMatrix::new(s_tt, "conditional covariance");
    }
    let s_gg = linalg::select(joint, given, given);
    let ev = linalg::sym_eigenvalues_desc(&s_gg);
    if !(ev[ev.len() - 1] > PD_TOL * ev[0]) {
        return Err(Error::SingularBlock(format!(
            "conditioning block has eigenvalue range [{:.3e}, {:.3e}]",
            ev[ev.len() - 1],
            ev[0]
        )));
    }
    let s_gt = linalg::select(joint, given, target);
    let reduced = linalg::spd_solve(&s_gg, &s_gt, "conditioning block")?;
    let cond = s_tt - s_gt.transpose() * reduced;
    SpdMatrix::new(linalg::symmetrize(&cond), "conditional covariance")
}

/// Conditional covariances and regression coefficients of `model`.
pub fn derive_stats(model: &JointModel) -> Result<ConditionalStats> {
    let x: Vec<usize> = model.x_range().collect();
    let y: Vec<usize> = model.y_range().collect();
    let z: Vec<usize> = model.z_range().collect();
    let yz: Vec<usize> = y.iter().chain(&z).copied().collect();
    let joint = model.joint();

    let sigma_x_given_z = schur_conditional(joint, &x, &z)?;
    let sigma_x_given_yz = schur_conditional(joint, &x, &yz)?;
    let sigma_y_given_z = schur_conditional(joint, &y, &z)?;

    // [C G]ᵀ = Σ_{(yz)(yz)}⁻¹ Σ_{(yz)x}
    let s_yz_yz = linalg::select(joint, &yz, &yz);
    let s_yz_x = linalg::select(joint, &yz, &x);
    let coef = linalg::spd_solve(&s_yz_yz, &s_yz_x, "cov(y, z)")
        .map_err(|e| Error::SingularBlock(e.to_string()))?
        .transpose();
    let c = coef.columns(0, y.len()).into_owned();
    let g = coef.columns(y.len(), z.len()).into_owned();

    let gamma_yz = linalg::spd_solve(model.sigma_z(), &model.sigma_yz().transpose(), "sigma_z")
        .map_err(|e| Error::SingularBlock(e.to_string()))?
        .transpose();

    let stats = ConditionalStats {
        sigma_x_given_z,
        sigma_x_given_yz,
        sigma_y_given_z,
        c,
        g,
        gamma_yz,
    };
    let residual = stats.regression_identity_residual();
    if residual > RTOL {
        return Err(Error::NumericalFailure(format!(
            "regression identity residual {residual:.3e} exceeds {RTOL:.0e}"
        )));
    }
    Ok(stats)
}

/// Deterministic random model with joint covariance `A Aᵀ + 0.1 I`, `A` standard normal.
pub fn random_instance(n_x: usize, n_y: usize, n_z: usize, seed: u64) -> JointModel {
    assert!(n_x >= 1 && n_y >= 1 && n_z >= 1, "dimensions must be positive");
    let n = n_x + n_y + n_z;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let joint = &a * a.transpose() + DMatrix::identity(n, n) * RANDOM_INSTANCE_EPS;
    JointModel::from_joint(linalg::symmetrize(&joint), n_x, n_y, n_z)
        .expect("factor-form covariance is positive definite")
}

/// Model for `y = H x + n₁`, `z = K x + n₂` with `x`, `n₁`, `n₂` mutually independent.
pub fn noisy_observation_instance(
    sigma_x: &SpdMatrix,
    h: &DMatrix<f64>,
    sigma_n1: &SpdMatrix,
    k: &DMatrix<f64>,
    sigma_n2: &SpdMatrix,
) -> Result<JointModel> {
    let nx = sigma_x.dim();
    if h.ncols() != nx || k.ncols() != nx {
        return Err(Error::DimensionMismatch(format!(
            "H is {}x{}, K is {}x{}, source dimension {nx}",
            h.nrows(),
            h.ncols(),
            k.nrows(),
            k.ncols()
        )));
    }
    if sigma_n1.dim() != h.nrows() || sigma_n2.dim() != k.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "noise covariances are {}x{} and {}x{}, observations have {} and {} rows",
            sigma_n1.dim(),
            sigma_n1.dim(),
            sigma_n2.dim(),
            sigma_n2.dim(),
            h.nrows(),
            k.nrows()
        )));
    }
    let sx = sigma_x.matrix();
    JointModel::new(
        sx.clone(),
        h * sx * h.transpose() + sigma_n1.matrix(),
        k * sx * k.transpose() + sigma_n2.matrix(),
        sx * h.transpose(),
        sx * k.transpose(),
        h * sx * k.transpose(),
    )
}

/// `y = x + n₁`, `z = x + n₂` with white noises of variance `var_n1` and `var_n2`.
pub fn white_noise_instance(sigma_x: &SpdMatrix, var_n1: f64, var_n2: f64) -> Result<JointModel> {
    let n = sigma_x.dim();
    let eye = DMatrix::identity(n, n);
    noisy_observation_instance(
        sigma_x,
        &eye,
        &SpdMatrix::new(&eye * var_n1, "sigma_n1")?,
        &eye,
        &SpdMatrix::new(&eye * var_n2, "sigma_n2")?,
    )
}
