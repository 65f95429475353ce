//! Joint diagonalization of two covariance matrices and the pairing choices.
//!
//! `cargo run --example simultaneous_diagonalization`

use nalgebra::dmatrix;
use rdx_gauss::simdiag::{whiten_diagonalize_paired, Pairing};
use rdx_gauss::SpdMatrix;

fn main() -> rdx_gauss::Result<()> {
    let s1 = SpdMatrix::new(dmatrix![3.0, 1.0; 1.0, 2.0], "sigma1")?;
    let s2 = SpdMatrix::new(dmatrix![0.5, -0.2; -0.2, 1.5], "sigma2")?;

    for p in [Pairing::Auto, Pairing::Descending, Pairing::Reversed, Pairing::Aligned] {
        let jd = whiten_diagonalize_paired(&s1, &s2, p)?;
        println!(
            "{p:?} -> {:?}: lambda {:?}, gamma {:?}, lambda' {:?}, residual {:.1e}",
            jd.pairing,
            jd.lambda.as_slice(),
            jd.gamma.as_slice(),
            jd.lambda_prime.as_slice(),
            jd.identity_residual(&s1, &s2),
        );
    }

    // Commuting pair: lambda' reproduces the spectrum of sigma2.
    let a = SpdMatrix::new(dmatrix![2.0, 0.0; 0.0, 1.0], "a")?;
    let b = SpdMatrix::new(dmatrix![0.2, 0.0; 0.0, 0.9], "b")?;
    let jd = whiten_diagonalize_paired(&a, &b, Pairing::Auto)?;
    println!("commuting: {:?}, lambda' {:?}", jd.pairing, jd.lambda_prime.as_slice());
    Ok(())
}
