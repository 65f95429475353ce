//! Rate needed to deliver a given amount of information about the source.
//!
//! `cargo run --example rate_rate`

use rdx_gauss::model::{derive_stats, white_noise_instance};
use rdx_gauss::{special, SpdMatrix};
use nalgebra::dmatrix;

fn main() -> rdx_gauss::Result<()> {
    let sigma_x = SpdMatrix::new(dmatrix![1.5, 0.3; 0.3, 0.8], "sigma_x")?;
    let s = derive_stats(&white_noise_instance(&sigma_x, 0.4, 0.9)?)?;
    let mu = special::rate_rate_spectrum(&s)?;
    let r_max = special::delivered_information(&mu, 0.0);
    println!("mu = {mu:?}, largest deliverable information {r_max:.6} nats");

    for f in [0.0, 0.25, 0.5, 0.75, 0.95] {
        let r = special::rate_rate(&s, f * r_max)?;
        println!("R_I = {:.5}: rate {:.6}, gamma {:.6}", r.r_i, r.rate, r.gamma);
    }
    println!("at the edge: {}", special::rate_rate(&s, r_max)?.rate);
    Ok(())
}
