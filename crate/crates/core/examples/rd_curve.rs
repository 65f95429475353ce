//! Rate–distortion curve along `D(t) = Σ_{x|yz} + t C Σ_{y|z} Cᵀ`, as CSV.
//!
//! `cargo run --example rd_curve > curve.csv`

use rdx_gauss::model::{derive_stats, random_instance};
use rdx_gauss::{nats_to_bits, rdf};

fn main() -> rdx_gauss::Result<()> {
    let s = derive_stats(&random_instance(3, 4, 3, 99))?;
    println!("t,lower_bits,upper_bits,exact_bits");
    for p in rdf::sweep_curve(&s, 25)? {
        let exact = p.exact.map(|e| nats_to_bits(e).to_string()).unwrap_or_default();
        println!("{},{},{},{exact}", p.t, nats_to_bits(p.lower), nats_to_bits(p.upper));
    }
    Ok(())
}
