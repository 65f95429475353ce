//! Closed-form special cases and the constrained minimizations that
//! reproduce them from the exact matrix rate.
//!
//! * [`scalar_rdf`]: one-dimensional source, observation and side information.
//! * [`mse_rdf`]: trace (MSE) constraint, solved by reverse water-filling.
//! * [`rate_rate`]: constraint `I(x; u | z) ≥ R_I` instead of a distortion.
//! * [`minimize_exact_over_trace_set`] and [`minimize_exact_over_detinfo_set`]
//!   minimize the exact rate `½ log |Σ₁| / |D − Σ_{x|yz}|` numerically over
//!   commuting distortion matrices, which must land on the two closed forms.

mod barrier;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, PD_TOL, RTOL};
use crate::model::{ConditionalStats, SpdMatrix};
use crate::rdf;

use self::barrier::SeparableObjective;

/// Absolute tolerance on bisection residuals.
pub const BISECTION_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;
/// Upper end of the bracket for the rate–rate water parameter.
pub const GAMMA_BRACKET_MAX: f64 = 1.0 - 1e-15;

/// Reverse water-filling solution under a trace constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillResult {
    pub rate: f64,
    /// Common water level.
    pub level: f64,
    /// `min(level, λᵢ)` per mode, same order as `lambda`.
    pub allocations: Vec<f64>,
    /// `n_x · D − tr Σ_{x|yz}`.
    pub budget: f64,
    /// Eigenvalues of `C Σ_{y|z} Cᵀ`, descending.
    pub lambda: Vec<f64>,
}

/// Solution of the rate–rate problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRateResult {
    /// `+∞` when `r_i` sits exactly on the upper edge of the regime.
    pub rate: f64,
    pub gamma: f64,
    /// Descending, each in `(0, 1)`.
    pub mu: Vec<f64>,
    pub r_i: f64,
}

/// Minimizer of the exact rate over a constrained family of distortion matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedMinimum {
    pub distortion: SpdMatrix,
    pub rate: f64,
    /// Eigenvalues of `D − Σ_{x|yz}` in the parameterizing basis.
    pub allocations: Vec<f64>,
}

/// Scalar rate `½ log((Σ_{x|z} − Σ_{x|yz}) / (D − Σ_{x|yz}))`, zero above `Σ_{x|z}`.
pub fn scalar_rdf(sigma_x_given_z: f64, sigma_x_given_yz: f64, d: f64) -> Result<f64> {
    if !(sigma_x_given_yz > 0.0 && sigma_x_given_yz < sigma_x_given_z) {
        return Err(Error::DegenerateObservation {
            min_eigenvalue: sigma_x_given_z - sigma_x_given_yz,
        });
    }
    if !(d > sigma_x_given_yz) {
        return Err(Error::InfeasibleDistortion {
            min_eigenvalue: d - sigma_x_given_yz,
        });
    }
    if d >= sigma_x_given_z {
        return Ok(0.0);
    }
    Ok(0.5 * ((sigma_x_given_z - sigma_x_given_yz) / (d - sigma_x_given_yz)).ln())
}

fn trace_budget(stats: &ConditionalStats, d_scalar: f64) -> Result<f64> {
    let n = stats.n_x() as f64;
    let lo = stats.sigma_x_given_yz.trace();
    let hi = stats.sigma_x_given_z.trace();
    let target = n * d_scalar;
    if !(target > lo) || target > hi * (1.0 + RTOL) {
        return Err(Error::RegimeViolation(format!(
            "need tr(Sigma_x|yz) < n_x D <= tr(Sigma_x|z), got tr(Sigma_x|yz) = {lo:.6e}, n_x D = {target:.6e}, tr(Sigma_x|z) = {hi:.6e}"
        )));
    }
    Ok(target - lo)
}

/// Water level `θ` with `Σ min(θ, λᵢ) = budget`, found by bisection on `[0, max λ]`.
///
/// A budget at or above `Σ λᵢ` returns `max λ`, the smallest valid level.
pub fn water_level(lambda: &[f64], budget: f64) -> Result<f64> {
    let top = lambda.iter().copied().fold(0.0_f64, f64::max);
    let fill = |level: f64| lambda.iter().map(|&l| l.min(level)).sum::<f64>() - budget;
    if !(budget > 0.0) || lambda.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::RegimeViolation(format!(
            "water-filling needs a positive budget and spectrum, got budget {budget:.6e}"
        )));
    }
    if fill(top) <= BISECTION_TOL {
        return Ok(top);
    }
    let level = bisect(&fill, 0.0, top);
    let r = fill(level);
    if r.abs() <= BISECTION_TOL {
        Ok(level)
    } else {
        Err(Error::NumericalFailure(format!("water level residual {r:.3e} exceeds {BISECTION_TOL:.0e}")))
    }
}

/// Root of a monotone `f` on `[lo, hi]` with `f(lo) ≤ 0 ≤ f(hi)` or the reverse,
/// bisected until the bracket stops shrinking.
fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let rising = f(lo) <= f(hi);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let r = f(mid);
        if r == 0.0 || mid <= lo || mid >= hi {
            return mid;
        }
        if (r < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Rate under the trace constraint `tr E[(x − x̂)(x − x̂)ᵀ] ≤ n_x D`.
pub fn mse_rdf(stats: &ConditionalStats, d_scalar: f64) -> Result<WaterfillResult> {
    let budget = trace_budget(stats, d_scalar)?;
    let signal = &stats.c * stats.sigma_y_given_z.matrix() * stats.c.transpose();
    let lambda = linalg::sym_eigenvalues_desc(&signal);
    if !(lambda[lambda.len() - 1] > PD_TOL * lambda[0]) {
        return Err(Error::DegenerateObservation {
            min_eigenvalue: lambda[lambda.len() - 1],
        });
    }
    let level = water_level(&lambda, budget)?;
    let allocations: Vec<f64> = lambda.iter().map(|&l| l.min(level)).collect();
    let rate = lambda.iter().map(|&l| 0.5 * (l / level).max(1.0).ln()).sum();
    Ok(WaterfillResult {
        rate,
        level,
        allocations,
        budget,
        lambda,
    })
}

/// Eigenvalues of `Σ_{x|z}^{-1/2} C Σ_{y|z} Cᵀ Σ_{x|z}^{-1/2}`, descending.
///
/// These are the nonzero eigenvalues of `Σ_{y|z}^{1/2} Cᵀ Σ_{x|z}⁻¹ C Σ_{y|z}^{1/2}`.
pub fn rate_rate_spectrum(stats: &ConditionalStats) -> Result<Vec<f64>> {
    let l = linalg::cholesky(&stats.sigma_x_given_z, "sigma_x_given_z")?.l();
    let signal = &stats.c * stats.sigma_y_given_z.matrix() * stats.c.transpose();
    let half = linalg::lower_solve(&l, &signal);
    let whitened = linalg::lower_solve(&l, &half.transpose());
    let mu = linalg::sym_eigenvalues_desc(&whitened);
    if !(mu[mu.len() - 1] > PD_TOL * mu[0]) {
        return Err(Error::DegenerateObservation {
            min_eigenvalue: mu[mu.len() - 1],
        });
    }
    Ok(mu)
}

/// Information delivered, `−½ Σ log min((1 − μᵢ)/(1 − γ), 1)`.
pub fn delivered_information(mu: &[f64], gamma: f64) -> f64 {
    -0.5 * mu.iter().map(|&m| ((1.0 - m) / (1.0 - gamma)).min(1.0).ln()).sum::<f64>()
}

/// Water parameter `γ ∈ [0, 1)` solving `delivered_information(μ, γ) = R_I` by bisection.
pub fn solve_gamma(mu: &[f64], r_i: f64) -> Result<f64> {
    let r_max = delivered_information(mu, 0.0);
    if !(r_i >= 0.0) || r_i > r_max {
        return Err(Error::RegimeViolation(format!(
            "need 0 <= R_I <= {r_max:.6e}, got {r_i:.6e}"
        )));
    }
    let top = mu.iter().copied().fold(0.0_f64, f64::max);
    if r_i == 0.0 {
        return Ok(top);
    }
    if r_i == r_max {
        return Ok(0.0);
    }
    let resid = |g: f64| delivered_information(mu, g) - r_i;
    if !(resid(0.0) >= 0.0 && resid(GAMMA_BRACKET_MAX) <= 0.0) {
        return Err(Error::NumericalFailure("gamma bisection does not bracket".into()));
    }
    let gamma = bisect(&resid, 0.0, GAMMA_BRACKET_MAX);
    let r = resid(gamma);
    if r.abs() <= BISECTION_TOL {
        Ok(gamma)
    } else {
        Err(Error::NumericalFailure(format!("gamma residual {r:.3e} exceeds {BISECTION_TOL:.0e}")))
    }
}

/// Minimum rate subject to delivering at least `r_i` nats about `x`.
pub fn rate_rate(stats: &ConditionalStats, r_i: f64) -> Result<RateRateResult> {
    let mu = rate_rate_spectrum(stats)?;
    let gamma = solve_gamma(&mu, r_i)?;
    let rate = if gamma == 0.0 && r_i > 0.0 {
        f64::INFINITY
    } else {
        0.5 * mu
            .iter()
            .map(|&m| (m / (((1.0 - m) / (1.0 - gamma)).min(1.0) - (1.0 - m))).ln())
            .sum::<f64>()
    };
    Ok(RateRateResult {
        rate: rate.max(0.0),
        gamma,
        mu,
        r_i,
    })
}

/// `−½ log d` per mode.
struct NegHalfLog;

impl SeparableObjective for NegHalfLog {
    fn grad(&self, _: usize, x: f64) -> f64 {
        -0.5 / x
    }
    fn hess(&self, _: usize, x: f64) -> f64 {
        0.5 / (x * x)
    }
    fn delta(&self, _: usize, x: f64, h: f64) -> f64 {
        -0.5 * (h / x).ln_1p()
    }
}

/// `−½ log(eˢ − aᵢ)` per mode, in log-distortion coordinates `s = log δ`.
struct NegHalfLogExcess(Vec<f64>);

impl SeparableObjective for NegHalfLogExcess {
    fn grad(&self, i: usize, s: f64) -> f64 {
        let r = self.0[i] * (-s).exp();
        -0.5 / (1.0 - r)
    }
    fn hess(&self, i: usize, s: f64) -> f64 {
        let r = self.0[i] * (-s).exp();
        0.5 * r / ((1.0 - r) * (1.0 - r))
    }
    fn delta(&self, i: usize, s: f64, h: f64) -> f64 {
        let r = self.0[i] * (-s).exp();
        -0.5 * (h.exp_m1() / (1.0 - r)).ln_1p()
    }
}

fn rebuild(basis: &DMatrix<f64>, offset: &DMatrix<f64>, diag: &[f64]) -> Result<SpdMatrix> {
    let d = offset + basis * DMatrix::from_diagonal(&DVector::from_column_slice(diag)) * basis.transpose();
    SpdMatrix::new(linalg::symmetrize(&d), "D*")
}

/// Minimize the exact rate over `D` commuting with `Σ₁` (so that `Σ₂ = D − Σ_{x|yz}`
/// is diagonal in `Σ₁`'s eigenbasis), `Σ_{x|yz} ≺ D ⪯ Σ_{x|z}`, `tr D ≤ n_x D_scalar`.
pub fn minimize_exact_over_trace_set(stats: &ConditionalStats, d_scalar: f64) -> Result<ConstrainedMinimum> {
    let budget = trace_budget(stats, d_scalar)?;
    let (lambda, basis) = linalg::sym_eigen_desc(&stats.informative_cov());
    let n = lambda.len();
    if !(lambda[n - 1] > PD_TOL * lambda[0]) {
        return Err(Error::DegenerateObservation {
            min_eigenvalue: lambda[n - 1],
        });
    }
    let upper: Vec<f64> = lambda.iter().copied().collect();
    let alloc = barrier::minimize(&NegHalfLog, &vec![0.0; n], &upper, budget)?;
    let distortion = rebuild(&basis, stats.sigma_x_given_yz.matrix(), &alloc)?;
    let rate = rdf::exact_rdf(stats, &distortion)?;
    Ok(ConstrainedMinimum {
        distortion,
        rate,
        allocations: alloc,
    })
}

/// Minimize the exact rate over `D` commuting with `Σ_{x|yz}`, `Σ_{x|yz} ≺ D ⪯ Σ_{x|z}`,
/// `|D| ≤ e^{−2 R_I} |Σ_{x|z}|`.
///
/// Requires `Σ_{x|z}` and `Σ_{x|yz}` to commute, as they do when `y` and `z`
/// are the source in independent white noise.
pub fn minimize_exact_over_detinfo_set(stats: &ConditionalStats, r_i: f64) -> Result<ConstrainedMinimum> {
    let sxz = stats.sigma_x_given_z.matrix();
    let sxyz = stats.sigma_x_given_yz.matrix();
    let scale = linalg::spectral_norm(sxz) * linalg::spectral_norm(sxyz);
    let comm = linalg::commutator_norm(sxz, sxyz);
    if comm > RTOL * scale {
        return Err(Error::StructureViolation(format!(
            "Sigma_x|z and Sigma_x|yz do not commute (commutator norm {comm:.3e})"
        )));
    }
    let (a, basis) = linalg::sym_eigen_desc(sxyz);
    let rotated = basis.transpose() * sxz * &basis;
    let off = linalg::max_abs(&(&rotated - DMatrix::from_diagonal(&rotated.diagonal())));
    if off > RTOL * linalg::spectral_norm(sxz) {
        return Err(Error::StructureViolation(format!(
            "Sigma_x|z is not diagonal in the eigenbasis of Sigma_x|yz (off-diagonal {off:.3e})"
        )));
    }
    let b = rotated.diagonal();
    let n = a.len();
    if (0..n).any(|i| !(b[i] - a[i] > PD_TOL * b[i])) {
        return Err(Error::DegenerateObservation {
            min_eigenvalue: (0..n).map(|i| b[i] - a[i]).fold(f64::INFINITY, f64::min),
        });
    }
    let log_a: Vec<f64> = a.iter().map(|v| v.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|v| v.ln()).collect();
    let r_max = 0.5 * (log_b.iter().sum::<f64>() - log_a.iter().sum::<f64>());
    if !(r_i >= 0.0) || !(r_i < r_max) {
        return Err(Error::RegimeViolation(format!(
            "need 0 <= R_I < {r_max:.6e}, got {r_i:.6e}"
        )));
    }
    let log_budget = log_b.iter().sum::<f64>() - 2.0 * r_i;
    let s = barrier::minimize(&NegHalfLogExcess(a.iter().copied().collect()), &log_a, &log_b, log_budget)?;
    let delta: Vec<f64> = s.iter().map(|v| v.exp()).collect();
    let distortion = rebuild(&basis, &DMatrix::zeros(n, n), &delta)?;
    let rate = rdf::exact_rdf(stats, &distortion)?;
    let allocations = (0..n).map(|i| delta[i] - a[i]).collect();
    Ok(ConstrainedMinimum {
        distortion,
        rate,
        allocations,
    })
}
