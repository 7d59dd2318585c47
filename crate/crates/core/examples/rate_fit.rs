//! Fits log-log rates to a results CSV written by a convergence study.
//!
//! cargo run --example rate_fit -- results.csv

use std::path::PathBuf;

use liplearn::experiments::{fit_rate, fit_rate_against_resolution, read_records};

fn main() -> liplearn::Result<()> {
    let path: PathBuf = std::env::args().nth(1).expect("usage: rate_fit <results.csv>").into();
    let records = read_records(&path)?;
    let by_n = fit_rate(&records)?;
    let by_delta = fit_rate_against_resolution(&records)?;
    println!("error ~ n^{:.3}      (r2 {:.3})", by_n.slope, by_n.r_squared);
    println!("error ~ delta^{:.3}  (r2 {:.3})", by_delta.slope, by_delta.r_squared);
    Ok(())
}
