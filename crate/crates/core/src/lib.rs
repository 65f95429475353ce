//! Rate–distortion bounds for remote vector Gaussian source coding with
//! side information at the decoder and a covariance-matrix distortion
//! constraint.
//!
//! The encoder sees a noisy observation `y` of a Gaussian source `x`, the
//! decoder has side information `z`, and the reconstruction error
//! covariance must satisfy `E[(x − x̂)(x − x̂)ᵀ] ⪯ D`.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`model`] | joint model, conditional covariances, instance generators |
//! | [`simdiag`] | simultaneous diagonalization, Loewner-order checks |
//! | [`rdf`] | lower/upper bounds, exact rate, achieving test channel, curves |
//! | [`special`] | scalar case, MSE water-filling, rate–rate function, constrained minimizations |
//! | [`sim`] | Monte Carlo check of the test channel |
//! | [`cli`] | file formats and commands behind the `rdx` binary |
//!
//! ```
//! use rdx_gauss::{model, rdf};
//!
//! let m = model::random_instance(2, 3, 2, 11);
//! let stats = model::derive_stats(&m).unwrap();
//! let d = rdf::distortion_on_path(&stats, 0.5).unwrap();
//! let b = rdf::rate_bounds(&stats, &d).unwrap();
//! assert!((b.upper - std::f64::consts::LN_2).abs() < 1e-9);
//! ```

pub mod cli;
pub mod error;
pub mod linalg;
pub mod model;
pub mod rdf;
pub mod sim;
pub mod simdiag;
pub mod special;

pub use error::{Error, Result};
pub use model::{ConditionalStats, JointModel, SpdMatrix, SymMatrix};
pub use rdf::{RateBounds, TestChannel};
pub use simdiag::JointDiagonalization;

/// Convert nats to bits.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}
