//! Geodesic distances on the non-convex star through the auxiliary lattice
//! graph, with certified bands.
//!
//! cargo run --release --example geodesic_oracle

use liplearn::geometry::{Domain, GeodesicOracle, OracleParams};

fn main() -> liplearn::Result<()> {
    let oracle = GeodesicOracle::new(&Domain::lp_star(), OracleParams::default())?;
    println!("auxiliary graph: {} points, resolution {:.4}", oracle.auxiliary_size(), oracle.auxiliary_resolution());
    for (x, y) in [([1.0, 0.0], [0.0, 1.0]), ([0.5, 0.0], [0.0, 0.5]), ([0.9, 0.0], [-0.9, 0.0])] {
        let d = oracle.distance(&x, &y)?;
        let e = (x[0] - y[0]).hypot(x[1] - y[1]);
        println!(
            "{x:?} -> {y:?}: geodesic {:.4} in [{:.4}, {:.4}] (certified: {}), Euclidean {e:.4}",
            d.value, d.lower, d.upper, d.certified
        );
    }
    Ok(())
}
