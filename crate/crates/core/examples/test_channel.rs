//! Build the achieving test channel and check its rate and distortion.
//!
//! `cargo run --example test_channel`

use rdx_gauss::model::{derive_stats, random_instance};
use rdx_gauss::{linalg, rdf};

fn main() -> rdx_gauss::Result<()> {
    let s = derive_stats(&random_instance(2, 3, 2, 5))?;
    let d = rdf::distortion_on_path(&s, 0.4)?;
    let ch = rdf::build_test_channel(&s, &d)?;

    println!("active modes {:?}", ch.active_indices());
    println!("encoder {}", ch.encoder);
    println!("noise covariance {}", ch.noise_cov);

    let rate = rdf::channel_rate(&ch, &s)?;
    let bound = rdf::rate_bounds(&s, &d)?.upper;
    println!("I(y; u | z) = {rate:.9}, upper bound = {bound:.9}");

    let achieved = rdf::achieved_distortion(&ch, &s)?;
    println!("max |achieved - D| = {:.2e}", linalg::max_abs(&(achieved.matrix() - d.matrix())));
    Ok(())
}
