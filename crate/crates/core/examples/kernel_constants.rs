//! Derived constants of the built-in kernel profiles, next to a numeric
//! grid estimate of the same quantities.
//!
//! cargo run --example kernel_constants

use liplearn::kernel::{numeric_constants, KernelProfile};

fn main() -> liplearn::Result<()> {
    println!("{:<18} {:>10} {:>10} {:>10}   numeric tau", "kernel", "sigma_eta", "t_zero", "tau_eta");
    for name in ["constant", "exponential:0.5", "exponential:2", "power:0.5", "power:1"] {
        let k: KernelProfile = name.parse()?;
        let (_, _, tau) = numeric_constants(|t| k.evaluate(t).unwrap_or(f64::INFINITY), 1e-5)?;
        println!("{name:<18} {:>10.6} {:>10.6} {:>10.6}   {tau:.6}", k.sigma_eta(), k.t_zero(), k.tau_eta());
    }
    // the singular kernel makes edge length equal Euclidean length
    let k = KernelProfile::power(1.0)?;
    for r in [0.01, 0.05, 0.1] {
        println!("power:1, h = 0.1, r = {r}: edge length {}", k.edge_length(0.1, r)?);
    }
    Ok(())
}
