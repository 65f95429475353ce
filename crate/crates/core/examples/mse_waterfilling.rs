//! Reverse water-filling under a mean squared error constraint.
//!
//! `cargo run --example mse_waterfilling`

use rdx_gauss::model::{derive_stats, random_instance};
use rdx_gauss::special;

fn main() -> rdx_gauss::Result<()> {
    let s = derive_stats(&random_instance(3, 3, 2, 8))?;
    let n = s.n_x() as f64;
    let lo = s.sigma_x_given_yz.matrix().trace() / n;
    let hi = s.sigma_x_given_z.matrix().trace() / n;
    println!("feasible per-component MSE window ({lo:.4}, {hi:.4}]");

    for f in [0.1, 0.3, 0.6, 0.9, 1.0] {
        let d = lo + f * (hi - lo);
        let w = special::mse_rdf(&s, d)?;
        let check = special::minimize_exact_over_trace_set(&s, d)?;
        println!(
            "D = {d:.4}: rate {:.6} (barrier {:.6}), level {:.4}, allocations {:?}",
            w.rate,
            check.rate,
            w.level,
            w.allocations.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>()
        );
    }

    println!("scalar: {:.6}", special::scalar_rdf(2.0, 0.5, 1.0)?);
    Ok(())
}
