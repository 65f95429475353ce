//! Monte Carlo check of the test channel.
//!
//! Samples `(x, y, z)` from the joint model, passes `y` through
//! `u = F y + ν`, reconstructs `x̂ = E[x | u, z]` with exact Gaussian
//! conditioning and compares the empirical error covariance with
//! [`rdf::achieved_distortion`].
//!
//! Sampling is split into fixed-size chunks. Chunk `i` draws from a
//! ChaCha8 generator seeded with `seed` on stream `i`, and the per-chunk
//! sums are reduced in chunk order, so results do not depend on the number
//! of threads.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{derive_stats, JointModel, SpdMatrix, SymMatrix};
use crate::rdf::{self, TestChannel};

pub const MIN_SAMPLES: usize = 1000;
pub const DEFAULT_CHUNK: usize = 8192;
/// Multiplier on CLT standard errors used for every reported tolerance.
pub const CLT_MULTIPLIER: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Samples per random stream.
    pub chunk: usize,
}

impl SimConfig {
    pub fn new(n_samples: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            n_samples,
            seed,
            chunk: DEFAULT_CHUNK,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_chunk(mut self, chunk: usize) -> Result<Self> {
        self.chunk = chunk;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_SAMPLES} samples, got {}",
                self.n_samples
            )));
        }
        if self.chunk == 0 {
            return Err(Error::InvalidArgument("chunk size must be positive".into()));
        }
        Ok(())
    }

    fn n_chunks(&self) -> usize {
        self.n_samples.div_ceil(self.chunk)
    }

    fn chunk_len(&self, i: usize) -> usize {
        self.chunk.min(self.n_samples - i * self.chunk)
    }

    fn rng(&self, i: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        rng
    }
}

/// Samples stored column-wise: column `k` of `x`, `y`, `z` is draw `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBlock {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub z: DMatrix<f64>,
}

impl SampleBlock {
    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(1/n) Σ sₖ sₖᵀ` of the stacked `(x, y, z)`, using the known zero mean.
    pub fn empirical_covariance(&self) -> DMatrix<f64> {
        let s = stack(&[&self.x, &self.y, &self.z]);
        let n = s.ncols() as f64;
        linalg::symmetrize(&(&s * s.transpose() / n))
    }
}

fn stack(parts: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let cols = parts[0].ncols();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        out.view_mut((r, 0), (p.nrows(), cols)).copy_from(p);
        r += p.nrows();
    }
    out
}

/// Lower Cholesky factor as a dense row-major array, for tight sampling loops.
struct Factor {
    n: usize,
    l: Vec<f64>,
}

impl Factor {
    fn new(m: &DMatrix<f64>, name: &str) -> Result<Self> {
        let n = m.nrows();
        let l = if n == 0 {
            DMatrix::zeros(0, 0)
        } else {
            linalg::cholesky(m, name)?.l()
        };
        Ok(Self {
            n,
            l: (0..n * n).map(|k| l[(k / n, k % n)]).collect(),
        })
    }

    /// `out = L w` for `w` standard normal drawn from `rng`.
    fn draw(&self, rng: &mut ChaCha8Rng, w: &mut [f64], out: &mut [f64]) {
        for v in w.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        for i in 0..self.n {
            let row = &self.l[i * self.n..i * self.n + i + 1];
            out[i] = row.iter().zip(&w[..=i]).map(|(a, b)| a * b).sum();
        }
    }
}

/// `n_samples` i.i.d. draws of `(x, y, z)`.
pub fn sample_joint(model: &JointModel, cfg: &SimConfig) -> Result<SampleBlock> {
    cfg.validate()?;
    let factor = Factor::new(model.joint(), "joint covariance")?;
    let m = factor.n;
    let chunks: Vec<Vec<f64>> = (0..cfg.n_chunks())
        .into_par_iter()
        .map(|c| {
            let mut rng = cfg.rng(c);
            let len = cfg.chunk_len(c);
            let mut w = vec![0.0; m];
            let mut out = vec![0.0; m * len];
            for k in 0..len {
                factor.draw(&mut rng, &mut w, &mut out[k * m..(k + 1) * m]);
            }
            out
        })
        .collect();
    let all = DMatrix::from_iterator(m, cfg.n_samples, chunks.into_iter().flatten());
    let (xr, yr, zr) = (model.x_range(), model.y_range(), model.z_range());
    Ok(SampleBlock {
        x: all.rows(xr.start, xr.len()).into_owned(),
        y: all.rows(yr.start, yr.len()).into_owned(),
        z: all.rows(zr.start, zr.len()).into_owned(),
    })
}

/// Comparison of empirical and analytic reconstruction error.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub empirical_error_cov: SymMatrix,
    pub analytic_error_cov: SymMatrix,
    /// Largest entrywise `|empirical − analytic|`.
    pub max_entry_dev: f64,
    /// `CLT_MULTIPLIER · √(v / n)` with `v = 2 maxᵢ Aᵢᵢ²` bounding the
    /// variance of an entry of `e eᵀ`.
    pub entry_tolerance: f64,
    /// Smallest eigenvalue of `D − empirical_error_cov`.
    pub loewner_margin: f64,
    /// `CLT_MULTIPLIER · ‖D‖₂ / √n`.
    pub loewner_tolerance: f64,
    /// Largest empirical correlation between an error entry and an entry of `(u, z)`.
    pub orthogonality_dev: f64,
    /// `CLT_MULTIPLIER / √n`.
    pub orthogonality_tolerance: f64,
    pub n_samples: usize,
}

/// Per-chunk sums.
#[derive(Clone)]
struct Moments {
    err: Vec<f64>,
    cross: Vec<f64>,
}

impl Moments {
    fn zeros(n_x: usize, n_w: usize) -> Self {
        Self {
            err: vec![0.0; n_x * n_x],
            cross: vec![0.0; n_x * n_w],
        }
    }

    fn add(mut self, other: &Moments) -> Self {
        for (a, b) in self.err.iter_mut().zip(&other.err) {
            *a += b;
        }
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            *a += b;
        }
        self
    }
}

/// Linear reconstruction `x̂ = B_u u + B_z z` and the channel pieces needed to sample `u`.
struct Pipeline {
    joint: Factor,
    noise: Factor,
    n_x: usize,
    n_y: usize,
    encoder: Vec<f64>,
    /// `n_x × (k + n_z)`, row-major.
    estimator: Vec<f64>,
    /// Covariance of `(u, z)`.
    w_cov: DMatrix<f64>,
}

impl Pipeline {
    fn new(model: &JointModel, channel: &TestChannel) -> Result<Self> {
        let (n_x, n_y, n_z) = (model.n_x(), model.n_y(), model.n_z());
        let f = &channel.encoder;
        let k = f.nrows();
        if f.ncols() != n_y || channel.noise_cov.nrows() != k || channel.active.len() != n_x {
            return Err(Error::DimensionMismatch(format!(
                "channel encoder is {k}x{}, model has n_x={n_x}, n_y={n_y}",
                f.ncols()
            )));
        }
        // w = (u, z):  Σ_ww and Σ_xw.
        let mut w_cov = DMatrix::zeros(k + n_z, k + n_z);
        w_cov
            .view_mut((0, 0), (k, k))
            .copy_from(&(f * model.sigma_y().matrix() * f.transpose() + &channel.noise_cov));
        let uz = f * model.sigma_yz();
        w_cov.view_mut((0, k), (k, n_z)).copy_from(&uz);
        w_cov.view_mut((k, 0), (n_z, k)).copy_from(&uz.transpose());
        w_cov.view_mut((k, k), (n_z, n_z)).copy_from(model.sigma_z().matrix());
        let mut xw = DMatrix::zeros(n_x, k + n_z);
        xw.view_mut((0, 0), (n_x, k)).copy_from(&(model.sigma_xy() * f.transpose()));
        xw.view_mut((0, k), (n_x, n_z)).copy_from(model.sigma_xz());
        let w_cov = linalg::symmetrize(&w_cov);
        let b = linalg::spd_solve(&w_cov, &xw.transpose(), "cov(u, z)")?.transpose();

        let row_major = |m: &DMatrix<f64>| -> Vec<f64> {
            (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect()
        };
        Ok(Self {
            joint: Factor::new(model.joint(), "joint covariance")?,
            noise: Factor::new(&channel.noise_cov, "noise_cov")?,
            n_x,
            n_y,
            encoder: row_major(f),
            estimator: row_major(&b),
            w_cov,
        })
    }

    fn n_w(&self) -> usize {
        self.w_cov.nrows()
    }

    fn run_chunk(&self, cfg: &SimConfig, c: usize) -> Moments {
        let (n_x, n_y, k, n_w) = (self.n_x, self.n_y, self.noise.n, self.n_w());
        let m = self.joint.n;
        let mut rng = cfg.rng(c);
        let mut w = vec![0.0; m];
        let mut s = vec![0.0; m];
        let mut xi = vec![0.0; k];
        let mut nu = vec![0.0; k];
        let mut obs = vec![0.0; n_w];
        let mut e = vec![0.0; n_x];
        let mut acc = Moments::zeros(n_x, n_w);
        for _ in 0..cfg.chunk_len(c) {
            self.joint.draw(&mut rng, &mut w, &mut s);
            self.noise.draw(&mut rng, &mut xi, &mut nu);
            let (x, rest) = s.split_at(n_x);
            let (y, z) = rest.split_at(n_y);
            for i in 0..k {
                let row = &self.encoder[i * n_y..(i + 1) * n_y];
                obs[i] = row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() + nu[i];
            }
            obs[k..].copy_from_slice(z);
            for i in 0..n_x {
                let row = &self.estimator[i * n_w..(i + 1) * n_w];
                e[i] = x[i] - row.iter().zip(&obs).map(|(a, b)| a * b).sum::<f64>();
            }
            for i in 0..n_x {
                for j in 0..n_x {
                    acc.err[i * n_x + j] += e[i] * e[j];
                }
                for j in 0..n_w {
                    acc.cross[i * n_w + j] += e[i] * obs[j];
                }
            }
        }
        acc
    }

    fn run(&self, cfg: &SimConfig, parallel: bool) -> Moments {
        let parts: Vec<Moments> = if parallel {
            (0..cfg.n_chunks())
                .into_par_iter()
                .map(|c| self.run_chunk(cfg, c))
                .collect()
        } else {
            (0..cfg.n_chunks()).map(|c| self.run_chunk(cfg, c)).collect()
        };
        parts
            .iter()
            .fold(Moments::zeros(self.n_x, self.n_w()), |a, b| a.add(b))
    }
}

/// Simulate the channel and compare against the analytic error covariance.
pub fn run_test_channel(model: &JointModel, channel: &TestChannel, cfg: &SimConfig) -> Result<SimReport> {
    run_with(model, channel, cfg, true)
}

fn run_with(model: &JointModel, channel: &TestChannel, cfg: &SimConfig, parallel: bool) -> Result<SimReport> {
    cfg.validate()?;
    let stats = derive_stats(model)?;
    let analytic = rdf::achieved_distortion(channel, &stats)?;
    let pipe = Pipeline::new(model, channel)?;
    let sums = pipe.run(cfg, parallel);

    let n = cfg.n_samples as f64;
    let n_x = pipe.n_x;
    let n_w = pipe.n_w();
    let emp = DMatrix::from_row_slice(n_x, n_x, &sums.err) / n;
    let emp = SymMatrix::new(linalg::symmetrize(&emp), "empirical error covariance")?;
    let a = analytic.matrix();
    let max_entry_dev = linalg::max_abs(&(emp.matrix() - a));
    let max_diag = (0..n_x).map(|i| a[(i, i)]).fold(0.0, f64::max);
    let entry_tolerance = CLT_MULTIPLIER * (2.0 * max_diag * max_diag / n).sqrt();

    let d = channel.distortion.matrix();
    let loewner_margin = linalg::min_eigenvalue(&(d - emp.matrix()));
    let loewner_tolerance = CLT_MULTIPLIER * linalg::spectral_norm(d) / n.sqrt();

    let mut orthogonality_dev: f64 = 0.0;
    for i in 0..n_x {
        for j in 0..n_w {
            let scale = (a[(i, i)] * pipe.w_cov[(j, j)]).sqrt();
            orthogonality_dev = orthogonality_dev.max((sums.cross[i * n_w + j] / n).abs() / scale);
        }
    }

    Ok(SimReport {
        empirical_error_cov: emp,
        analytic_error_cov: analytic,
        max_entry_dev,
        entry_tolerance,
        loewner_margin,
        loewner_tolerance,
        orthogonality_dev,
        orthogonality_tolerance: CLT_MULTIPLIER / n.sqrt(),
        n_samples: cfg.n_samples,
    })
}

/// Smallest eigenvalue of `D − empirical_error_cov`.
pub fn loewner_slack(report: &SimReport, d: &SpdMatrix) -> Result<f64> {
    let emp = report.empirical_error_cov.matrix();
    if d.dim() != emp.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "distortion is {0}x{0}, error covariance is {1}x{1}",
            d.dim(),
            emp.nrows()
        )));
    }
    Ok(linalg::min_eigenvalue(&(d.matrix() - emp)))
}
