//! Builds geometric graphs for several kernels on one cloud and prints the
//! degree statistics and weight ranges.
//!
//! cargo run --example build_graph -- [n] [h]

use liplearn::geometry::{sample_uniform, Domain};
use liplearn::graph::build_graph;
use liplearn::kernel::KernelProfile;

fn main() -> liplearn::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(10_000, |s| s.parse().expect("n"));
    let h: f64 = args.next().map_or(0.05, |s| s.parse().expect("h"));
    let cloud = sample_uniform(&Domain::unit_cube(2), n, 1)?;
    println!("n = {n}, h = {h}, interior degree ~ {:.1}", n as f64 * std::f64::consts::PI * h * h);
    for name in ["constant", "exponential:0.5", "power:1"] {
        let kernel: KernelProfile = name.parse()?;
        let graph = build_graph(&cloud, &kernel, h)?;
        let (min, mean, max) = graph.degree_stats();
        let (lo, hi) = graph.edges().fold((f64::INFINITY, 0.0f64), |(a, b), (_, _, w)| (a.min(w), b.max(w)));
        println!("{name:<16} edges {:>8}  degree {min}/{mean:.1}/{max}  weights [{lo:.3}, {hi:.3e}]", graph.edge_count() / 2);
    }
    Ok(())
}
