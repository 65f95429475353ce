//! Rate bounds, the exact rate in the tight regime, and the test channel
//! that achieves the upper bound.
//!
//! With `Σ₁ = Σ_{x|z} − Σ_{x|yz}` and `Σ₂ = D − Σ_{x|yz}` jointly
//! diagonalized to spectra `λ` and `λ'`:
//!
//! ```text
//! lower = ½ Σ log⁺(λ₍ᵢ₎ / λ'₍ᵢ₎)     both spectra sorted independently
//! upper = ½ Σ log⁺(λᵢ / λ'ᵢ)        diagonalizer pairing
//! ```
//!
//! where `log⁺(r) = log max(r, 1)`. When `Σ_{x|yz} ≺ D ⪯ Σ_{x|z}` both
//! collapse to `½ log |Σ₁| / |Σ₂|`. All rates are in nats.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, PD_TOL, RATE_ATOL};
use crate::model::{ConditionalStats, SpdMatrix, SymMatrix};
use crate::simdiag::{self, JointDiagonalization, Pairing};

/// A mode is active (carries encoder output) when `λ'ᵢ < λᵢ (1 − ACTIVE_RTOL)`.
pub const ACTIVE_RTOL: f64 = 1e-12;
/// Largest path parameter used by [`sweep_curve`].
pub const SWEEP_T_MAX: f64 = 2.0;
/// Smallest path parameter (exclusive) used by [`sweep_curve`].
pub const SWEEP_T_MIN: f64 = 0.01;

/// Lower and upper bounds on the rate, with their per-mode terms.
#[derive(Debug, Clone, PartialEq)]
pub struct RateBounds {
    pub lower: f64,
    pub upper: f64,
    pub per_mode_lower: Vec<f64>,
    pub per_mode_upper: Vec<f64>,
    /// `|upper − lower| ≤ RATE_ATOL`.
    pub coincide: bool,
    pub diagonalization: JointDiagonalization,
}

impl RateBounds {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Forward channel `u = F y + ν` realizing the upper bound.
///
/// The channel is stored in the coordinates of the joint diagonalizer, where
/// the coding noise is diagonal: `F` holds the active rows of `V C` and
/// `noise_cov = diag{λᵢ λ'ᵢ / (λᵢ − λ'ᵢ)}` over the active modes. A mode
/// with `λ'ᵢ ≥ λᵢ` would need infinite noise, so it is dropped instead.
/// [`TestChannel::canonical_form`] maps back to `u = U C y + ν` when every
/// mode is active.
#[derive(Debug, Clone, PartialEq)]
pub struct TestChannel {
    /// `k × n_y`, one row per active mode.
    pub encoder: DMatrix<f64>,
    /// `k × k` diagonal, positive definite (empty when `k = 0`).
    pub noise_cov: DMatrix<f64>,
    /// Length `n_x`.
    pub active: Vec<bool>,
    pub basis: JointDiagonalization,
    /// The target distortion the channel was built for.
    pub distortion: SpdMatrix,
}

impl TestChannel {
    pub fn n_active(&self) -> usize {
        self.encoder.nrows()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&i| self.active[i]).collect()
    }

    /// `(U C, Σ_ν)` in the original coordinates, available only when every
    /// mode is active (otherwise `Σ_ν` has infinite directions).
    pub fn canonical_form(&self, stats: &ConditionalStats) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        if !self.active.iter().all(|&a| a) {
            return None;
        }
        let u = &self.basis.u;
        let encoder = u * &stats.c;
        // U V⁻¹ diag(d) V⁻ᵀ Uᵀ
        let inner = congruence_by_inverse(&self.basis.v, &self.noise_cov);
        let noise = u * inner * u.transpose();
        Some((encoder, linalg::symmetrize(&noise)))
    }
}

/// One point of a rate–distortion curve along `D(t) = Σ_{x|yz} + t Σ₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    /// Present when `t ≤ 1`, i.e. inside the tight regime.
    pub exact: Option<f64>,
}

/// `V⁻¹ M V⁻ᵀ` for symmetric `M`, via LU solves.
fn congruence_by_inverse(v: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = v.nrows();
    let mut full = DMatrix::zeros(n, n);
    if m.nrows() == n {
        full.copy_from(m);
    }
    let lu = v.clone().lu();
    let left = lu.solve(&full).expect("joint diagonalizer is nonsingular");
    let both = lu.solve(&left.transpose()).expect("joint diagonalizer is nonsingular");
    linalg::symmetrize(&both)
}

fn check_dim(stats: &ConditionalStats, d: &SpdMatrix) -> Result<()> {
    if d.dim() != stats.n_x() {
        return Err(Error::DimensionMismatch(format!(
            "distortion is {0}x{0}, source dimension is {1}",
            d.dim(),
            stats.n_x()
        )));
    }
    Ok(())
}

/// `(Σ₁, Σ₂) = (Σ_{x|z} − Σ_{x|yz}, D − Σ_{x|yz})`.
pub fn sigma1_sigma2(stats: &ConditionalStats, d: &SpdMatrix) -> Result<(SpdMatrix, SpdMatrix)> {
    check_dim(stats, d)?;
    let s2 = d.matrix() - stats.sigma_x_given_yz.matrix();
    let min2 = linalg::min_eigenvalue(&s2);
    if !(min2 > PD_TOL * linalg::spectral_norm(d)) {
        return Err(Error::InfeasibleDistortion { min_eigenvalue: min2 });
    }
    let s1 = stats.informative_cov();
    let min1 = linalg::min_eigenvalue(&s1);
    if !(min1 > PD_TOL * linalg::spectral_norm(&stats.sigma_x_given_z)) {
        return Err(Error::DegenerateObservation { min_eigenvalue: min1 });
    }
    Ok((SpdMatrix::new(s1, "sigma1")?, SpdMatrix::new(s2, "sigma2")?))
}

fn half_log_plus(num: f64, den: f64) -> f64 {
    0.5 * (num / den).max(1.0).ln()
}

/// Lower and upper rate bounds with the default diagonalizer pairing.
pub fn rate_bounds(stats: &ConditionalStats, d: &SpdMatrix) -> Result<RateBounds> {
    rate_bounds_paired(stats, d, Pairing::Auto)
}

pub fn rate_bounds_paired(stats: &ConditionalStats, d: &SpdMatrix, pairing: Pairing) -> Result<RateBounds> {
    let (s1, s2) = sigma1_sigma2(stats, d)?;
    let jd = simdiag::whiten_diagonalize_paired(&s1, &s2, pairing)?;
    Ok(bounds_from_diagonalization(jd))
}

fn sorted_desc(v: &DVector<f64>) -> Vec<f64> {
    let mut out: Vec<f64> = v.iter().copied().collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

fn bounds_from_diagonalization(jd: JointDiagonalization) -> RateBounds {
    let per_mode_upper: Vec<f64> = jd
        .lambda
        .iter()
        .zip(jd.lambda_prime.iter())
        .map(|(&l, &lp)| half_log_plus(l, lp))
        .collect();
    let per_mode_lower: Vec<f64> = sorted_desc(&jd.lambda)
        .into_iter()
        .zip(sorted_desc(&jd.lambda_prime))
        .map(|(l, lp)| half_log_plus(l, lp))
        .collect();
    let lower: f64 = per_mode_lower.iter().sum();
    let upper: f64 = per_mode_upper.iter().sum();
    RateBounds {
        lower,
        upper,
        per_mode_lower,
        per_mode_upper,
        coincide: (upper - lower).abs() <= RATE_ATOL,
        diagonalization: jd,
    }
}

/// Exact rate `½ log |Σ_{x|z} − Σ_{x|yz}| / |D − Σ_{x|yz}|`, valid for `Σ_{x|yz} ≺ D ⪯ Σ_{x|z}`.
pub fn exact_rdf(stats: &ConditionalStats, d: &SpdMatrix) -> Result<f64> {
    let (s1, s2) = sigma1_sigma2(stats, d)?;
    if !simdiag::loewner_leq(&d.as_sym(), &stats.sigma_x_given_z.as_sym(), PD_TOL)? {
        let slack = linalg::min_eigenvalue(&(stats.sigma_x_given_z.matrix() - d.matrix()));
        return Err(Error::RegimeViolation(format!(
            "D must satisfy D <= Sigma_x|z; min eigenvalue of Sigma_x|z - D is {slack:.6e}"
        )));
    }
    // |Σ₁| / |Σ₂| = 1 / |L⁻¹ Σ₂ L⁻ᵀ|; the whitened matrix is far better
    // conditioned than Σ₂ when Σ₁ has small eigenvalues.
    let l = linalg::cholesky(&s1, "sigma1")?.l();
    let half = linalg::lower_solve(&l, &s2);
    let whitened = linalg::symmetrize(&linalg::lower_solve(&l, &half.transpose()));
    let rate = -0.5 * linalg::log_det_spd(&whitened, "whitened sigma2")?;
    Ok(rate.max(0.0))
}

/// Build the channel that achieves the upper bound for target `D`.
pub fn build_test_channel(stats: &ConditionalStats, d: &SpdMatrix) -> Result<TestChannel> {
    let (s1, s2) = sigma1_sigma2(stats, d)?;
    let basis = simdiag::whiten_diagonalize(&s1, &s2)?;
    let n = basis.dim();
    let active: Vec<bool> = (0..n)
        .map(|i| basis.lambda_prime[i] < basis.lambda[i] * (1.0 - ACTIVE_RTOL))
        .collect();
    let idx: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
    let full_encoder = &basis.v * &stats.c;
    let encoder = linalg::select_rows(&full_encoder, &idx);
    let noise = DVector::from_iterator(
        idx.len(),
        idx.iter().map(|&i| {
            let (l, lp) = (basis.lambda[i], basis.lambda_prime[i]);
            l * lp / (l - lp)
        }),
    );
    Ok(TestChannel {
        encoder,
        noise_cov: DMatrix::from_diagonal(&noise),
        active,
        basis,
        distortion: d.clone(),
    })
}

fn check_channel(channel: &TestChannel, stats: &ConditionalStats) -> Result<()> {
    let k = channel.n_active();
    if channel.encoder.ncols() != stats.n_y()
        || channel.noise_cov.nrows() != k
        || channel.noise_cov.ncols() != k
        || channel.active.len() != stats.n_x()
    {
        return Err(Error::DimensionMismatch(format!(
            "channel encoder {}x{}, noise {}x{}, mask {} do not fit n_x={}, n_y={}",
            channel.encoder.nrows(),
            channel.encoder.ncols(),
            channel.noise_cov.nrows(),
            channel.noise_cov.ncols(),
            channel.active.len(),
            stats.n_x(),
            stats.n_y()
        )));
    }
    Ok(())
}

/// `I(y; u | z) = ½ log |F Σ_{y|z} Fᵀ + Σ_ν| / |Σ_ν|`, evaluated from the channel matrices.
pub fn channel_rate(channel: &TestChannel, stats: &ConditionalStats) -> Result<f64> {
    check_channel(channel, stats)?;
    if channel.n_active() == 0 {
        return Ok(0.0);
    }
    let f = &channel.encoder;
    let signal = f * stats.sigma_y_given_z.matrix() * f.transpose();
    let total = signal + &channel.noise_cov;
    Ok(0.5
        * (linalg::log_det_spd(&total, "cov(u | z)")? - linalg::log_det_spd(&channel.noise_cov, "noise_cov")?))
}

/// Error covariance of the MMSE reconstruction `E[x | u, z]`.
///
/// Computed by Gaussian conditioning,
/// `Σ_{x|z} − Σ_{xu|z} Σ_{u|z}⁻¹ Σ_{xu|z}ᵀ` with `Σ_{xu|z} = C Σ_{y|z} Fᵀ`.
pub fn achieved_distortion(channel: &TestChannel, stats: &ConditionalStats) -> Result<SymMatrix> {
    check_channel(channel, stats)?;
    let sxz = stats.sigma_x_given_z.matrix();
    if channel.n_active() == 0 {
        return SymMatrix::new(sxz.clone(), "achieved distortion");
    }
    let f = &channel.encoder;
    let syz = stats.sigma_y_given_z.matrix();
    let cross = &stats.c * syz * f.transpose();
    let u_cov = f * syz * f.transpose() + &channel.noise_cov;
    let reduced = linalg::spd_solve(&u_cov, &cross.transpose(), "cov(u | z)")?;
    let err = sxz - &cross * reduced;
    SymMatrix::new(linalg::symmetrize(&err), "achieved distortion")
}

/// Closed form `Σ_{x|yz} + V⁻¹ diag{min(λᵢ, λ'ᵢ)} V⁻ᵀ` of the achieved distortion.
pub fn achieved_distortion_closed_form(channel: &TestChannel, stats: &ConditionalStats) -> SymMatrix {
    let b = &channel.basis;
    let mins = DVector::from_iterator(
        b.dim(),
        b.lambda.iter().zip(b.lambda_prime.iter()).map(|(&l, &lp)| l.min(lp)),
    );
    let m = stats.sigma_x_given_yz.matrix() + congruence_by_inverse(&b.v, &DMatrix::from_diagonal(&mins));
    SymMatrix::new(linalg::symmetrize(&m), "achieved distortion").expect("symmetric by construction")
}

/// `D(t) = Σ_{x|yz} + t (Σ_{x|z} − Σ_{x|yz})`.
pub fn distortion_on_path(stats: &ConditionalStats, t: f64) -> Result<SpdMatrix> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InfeasibleDistortion {
            min_eigenvalue: t * linalg::min_eigenvalue(&stats.informative_cov()),
        });
    }
    let m = stats.sigma_x_given_yz.matrix() + stats.informative_cov() * t;
    SpdMatrix::new(linalg::symmetrize(&m), "D(t)")
}

/// `k` log-spaced path parameters in `(SWEEP_T_MIN, t_max]`.
pub fn sweep_grid(k: usize, t_max: f64) -> Vec<f64> {
    (1..=k)
        .map(|j| SWEEP_T_MIN * (t_max / SWEEP_T_MIN).powf(j as f64 / k as f64))
        .collect()
}

/// Rate–distortion curve on `k` log-spaced points of the path up to [`SWEEP_T_MAX`].
pub fn sweep_curve(stats: &ConditionalStats, k: usize) -> Result<Vec<SweepPoint>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("sweep needs at least 2 points, got {k}")));
    }
    sweep_at(stats, &sweep_grid(k, SWEEP_T_MAX))
}

/// Rate–distortion curve at the given path parameters, in order.
pub fn sweep_at(stats: &ConditionalStats, ts: &[f64]) -> Result<Vec<SweepPoint>> {
    ts.par_iter()
        .map(|&t| {
            let d = distortion_on_path(stats, t)?;
            let b = rate_bounds(stats, &d)?;
            let exact = if t <= 1.0 { Some(exact_rdf(stats, &d)?) } else { None };
            Ok(SweepPoint {
                t,
                lower: b.lower,
                upper: b.upper,
                exact,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_stats, noisy_observation_instance, random_instance};

    fn scalar_stats() -> ConditionalStats {
        let one = |v: f64| DMatrix::from_element(1, 1, v);
        let m = noisy_observation_instance(
            &SpdMatrix::new(one(1.0), "sx").unwrap(),
            &one(1.0),
            &SpdMatrix::new(one(0.5), "n1").unwrap(),
            &one(1.0),
            &SpdMatrix::new(one(1.0), "n2").unwrap(),
        )
        .unwrap();
        derive_stats(&m).unwrap()
    }

    fn scalar_d(v: f64) -> SpdMatrix {
        SpdMatrix::new(DMatrix::from_element(1, 1, v), "D").unwrap()
    }

    fn stats_332(seed: u64) -> ConditionalStats {
        derive_stats(&random_instance(3, 3, 2, seed)).unwrap()
    }

    #[test]
    fn sigma_pair_on_the_path() {
        let s = stats_332(1);
        let (s1, s2) = sigma1_sigma2(&s, &s.sigma_x_given_z).unwrap();
        assert!(linalg::max_abs(&(s1.matrix() - s2.matrix())) < 1e-14);
        let d = distortion_on_path(&s, 0.5).unwrap();
        let (s1, s2) = sigma1_sigma2(&s, &d).unwrap();
        assert!(linalg::max_abs(&(s1.matrix() * 0.5 - s2.matrix())) < 1e-14);
    }

    #[test]
    fn negative_slack_is_infeasible() {
        let s = stats_332(2);
        let (vals, vecs) = linalg::sym_eigen_desc(s.sigma_x_given_yz.matrix());
        let mut shifted = vals.map(|v| v + 0.2);
        shifted[0] = vals[0] - 0.01;
        let d = &vecs * DMatrix::from_diagonal(&shifted) * vecs.transpose();
        let d = SpdMatrix::new(linalg::symmetrize(&d), "D").unwrap();
        match sigma1_sigma2(&s, &d) {
            Err(Error::InfeasibleDistortion { min_eigenvalue }) => {
                assert!((min_eigenvalue + 0.01).abs() < 1e-10)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_rate_above_sigma_x_given_z() {
        let s = stats_332(3);
        let d = SpdMatrix::new(s.sigma_x_given_z.matrix() * 2.0, "D").unwrap();
        let b = rate_bounds(&s, &d).unwrap();
        assert_eq!(b.lower, 0.0);
        assert_eq!(b.upper, 0.0);
        let ch = build_test_channel(&s, &d).unwrap();
        assert_eq!(ch.n_active(), 0);
        assert_eq!(channel_rate(&ch, &s).unwrap(), 0.0);
        let e = achieved_distortion(&ch, &s).unwrap();
        assert_eq!(e.matrix(), s.sigma_x_given_z.matrix());
    }

    #[test]
    fn scalar_rate_is_half_log_five() {
        let s = scalar_stats();
        let b = rate_bounds(&s, &scalar_d(0.3)).unwrap();
        let want = 0.5 * ((0.5_f64 - 0.25) / (0.3 - 0.25)).ln();
        assert!((want - 0.5 * 5.0_f64.ln()).abs() < 1e-15);
        assert!((b.lower - want).abs() < 1e-12 && (b.upper - want).abs() < 1e-12);
        assert!(b.coincide);
        assert!((exact_rdf(&s, &scalar_d(0.3)).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn exact_rdf_halfway_is_half_nx_ln2() {
        let s = stats_332(4);
        let d = distortion_on_path(&s, 0.5).unwrap();
        // det(0.5 Σ₁) = 0.5ⁿ det Σ₁, determinant via LU as an independent route.
        let s1 = s.informative_cov();
        let s2 = d.matrix() - s.sigma_x_given_yz.matrix();
        let oracle = 0.5 * (s1.clone().lu().determinant() / s2.lu().determinant()).ln();
        let r = exact_rdf(&s, &d).unwrap();
        assert!((r - oracle).abs() < 1e-10);
        assert!((r - 1.5 * std::f64::consts::LN_2).abs() < 1e-10);
        assert!(exact_rdf(&s, &s.sigma_x_given_z).unwrap().abs() < 1e-12);
    }

    #[test]
    fn exact_rdf_regime_violation() {
        let s = stats_332(5);
        let d = distortion_on_path(&s, 1.5).unwrap();
        assert!(matches!(exact_rdf(&s, &d), Err(Error::RegimeViolation(_))));
    }

    #[test]
    fn tight_regime_noise_matches_closed_form() {
        let s = stats_332(6);
        let d = distortion_on_path(&s, 0.3).unwrap();
        let ch = build_test_channel(&s, &d).unwrap();
        let (enc, noise) = ch.canonical_form(&s).expect("all modes active");
        let u = &ch.basis.u;
        assert!(linalg::max_abs(&(enc - u * &s.c)) < 1e-12);
        let s1 = s.informative_cov();
        let gap = s.sigma_x_given_z.matrix() - d.matrix();
        let s2 = d.matrix() - s.sigma_x_given_yz.matrix();
        let want = u * &s1 * gap.lu().solve(&s2).unwrap() * u.transpose();
        assert!(linalg::rel_diff(&noise, &want) < 1e-8, "{}", linalg::rel_diff(&noise, &want));
    }

    #[test]
    fn channel_rate_matches_upper_and_distortion_matches_closed_form() {
        let mut inactive_seen = 0;
        for seed in 0..30 {
            let s = stats_332(seed);
            // Mixed regime: scale D anisotropically around Σ_{x|z}.
            let (vals, vecs) = linalg::sym_eigen_desc(&s.informative_cov());
            let scales = DVector::from_vec(vec![0.3, 1.7, 0.9]);
            let s2 = &vecs * DMatrix::from_diagonal(&vals.component_mul(&scales)) * vecs.transpose();
            let d = SpdMatrix::new(linalg::symmetrize(&(s.sigma_x_given_yz.matrix() + s2)), "D").unwrap();
            let b = rate_bounds(&s, &d).unwrap();
            let ch = build_test_channel(&s, &d).unwrap();
            inactive_seen += ch.active.iter().filter(|a| !**a).count();
            assert!((channel_rate(&ch, &s).unwrap() - b.upper).abs() < 1e-9);
            let e = achieved_distortion(&ch, &s).unwrap();
            let closed = achieved_distortion_closed_form(&ch, &s);
            assert!(linalg::rel_diff(e.matrix(), closed.matrix()) < 1e-9);
            assert!(simdiag::loewner_leq(&e, &d.as_sym(), 1e-8).unwrap());
        }
        assert!(inactive_seen > 0);
    }

    #[test]
    fn scalar_channel_noise_and_rate() {
        let s = scalar_stats();
        let ch = build_test_channel(&s, &scalar_d(0.3)).unwrap();
        let (l, lp) = (ch.basis.lambda[0], ch.basis.lambda_prime[0]);
        assert!((ch.noise_cov[(0, 0)] - l * lp / (l - lp)).abs() < 1e-15);
        let r = channel_rate(&ch, &s).unwrap();
        assert!((r - 0.5 * (l / lp).ln()).abs() < 1e-12);
    }

    #[test]
    fn sweep_is_monotone_and_hits_known_points() {
        let s = stats_332(7);
        let pts = sweep_curve(&s, 25).unwrap();
        assert_eq!(pts.len(), 25);
        assert!((pts[24].t - SWEEP_T_MAX).abs() < 1e-12 && pts[0].t > SWEEP_T_MIN);
        for w in pts.windows(2) {
            assert!(w[1].upper <= w[0].upper + 1e-12);
            assert!(w[1].lower <= w[0].lower + 1e-12);
        }
        for p in &pts {
            match p.exact {
                Some(e) => assert!(p.t <= 1.0 && (e - p.upper).abs() < 1e-9),
                None => assert!(p.t > 1.0 && p.upper == 0.0),
            }
        }
        let at = sweep_at(&s, &[0.5, 1.0]).unwrap();
        assert!((at[0].exact.unwrap() - 1.5 * std::f64::consts::LN_2).abs() < 1e-10);
        assert!(at[1].exact.unwrap().abs() < 1e-12 && at[1].upper.abs() < 1e-12);
        assert!(sweep_curve(&s, 1).is_err());
    }
}
