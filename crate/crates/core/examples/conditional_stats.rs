//! Conditional covariances of a noisy-observation model.
//!
//! `cargo run --example conditional_stats`

use nalgebra::{dmatrix, DMatrix};
use rdx_gauss::model::{derive_stats, noisy_observation_instance};
use rdx_gauss::SpdMatrix;

fn main() -> rdx_gauss::Result<()> {
    let sigma_x = SpdMatrix::new(dmatrix![2.0, 0.5; 0.5, 1.0], "sigma_x")?;
    let h = dmatrix![1.0, 0.0; 0.3, 1.0; 0.0, 0.7];
    let k = dmatrix![0.5, 0.5];
    let m = noisy_observation_instance(
        &sigma_x,
        &h,
        &SpdMatrix::new(DMatrix::identity(3, 3) * 0.2, "sigma_n1")?,
        &k,
        &SpdMatrix::new(dmatrix![0.4], "sigma_n2")?,
    )?;
    let s = derive_stats(&m)?;

    println!("Sigma_x|z  = {}", s.sigma_x_given_z.matrix());
    println!("Sigma_x|yz = {}", s.sigma_x_given_yz.matrix());
    println!("C Sigma_y|z C^T = {}", s.informative_cov());
    println!("regression identity residual {:.2e}", s.regression_identity_residual());
    Ok(())
}
