//! Monte Carlo check of the test channel's error covariance.
//!
//! `cargo run --release --example monte_carlo`

use rdx_gauss::model::{derive_stats, random_instance};
use rdx_gauss::rdf;
use rdx_gauss::sim::{loewner_slack, run_test_channel, SimConfig};

fn main() -> rdx_gauss::Result<()> {
    let m = random_instance(2, 3, 2, 13);
    let s = derive_stats(&m)?;
    let d = rdf::distortion_on_path(&s, 0.5)?;
    let ch = rdf::build_test_channel(&s, &d)?;

    for n in [10_000, 100_000, 1_000_000] {
        let r = run_test_channel(&m, &ch, &SimConfig::new(n, 42)?)?;
        println!(
            "n = {n:>8}: max entry dev {:.2e} (tol {:.2e}), orthogonality {:.2e} (tol {:.2e}), Loewner margin {:.2e} (tol -{:.2e})",
            r.max_entry_dev,
            r.entry_tolerance,
            r.orthogonality_dev,
            r.orthogonality_tolerance,
            loewner_slack(&r, &d)?,
            r.loewner_tolerance,
        );
    }
    Ok(())
}
