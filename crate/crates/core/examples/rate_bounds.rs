//! Lower and upper rate bounds against the exact rate on the proportional path.
//!
//! `cargo run --example rate_bounds`

use nalgebra::DMatrix;
use rdx_gauss::model::{derive_stats, random_instance};
use rdx_gauss::rdf;
use rdx_gauss::simdiag::Pairing;
use rdx_gauss::SpdMatrix;

fn main() -> rdx_gauss::Result<()> {
    let s = derive_stats(&random_instance(3, 4, 2, 21))?;

    println!("{:>6} {:>10} {:>10} {:>10}", "t", "lower", "upper", "exact");
    for t in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let d = rdf::distortion_on_path(&s, t)?;
        let b = rdf::rate_bounds(&s, &d)?;
        let e = rdf::exact_rdf(&s, &d)?;
        println!("{t:>6} {:>10.6} {:>10.6} {:>10.6}", b.lower, b.upper, e);
    }

    // Anisotropic excess around the geometric mean of the spectrum of C Sigma_y|z C^T:
    // generalized eigenvalues fall on both sides of one, so the pairing matters.
    let n = s.n_x();
    let lambda = s.informative_cov().symmetric_eigen().eigenvalues;
    let c = (lambda.max() * lambda.min()).sqrt();
    let d = SpdMatrix::new(s.sigma_x_given_yz.matrix() + DMatrix::from_fn(n, n, |i, j| if i == j { c * 4f64.powi(i as i32 - 1) } else { 0.0 }), "D")?;
    for p in [Pairing::Descending, Pairing::Reversed] {
        let b = rdf::rate_bounds_paired(&s, &d, p)?;
        println!("{p:?}: lower {:.6}, upper {:.6}, gap {:.2e}", b.lower, b.upper, b.gap());
    }
    Ok(())
}
