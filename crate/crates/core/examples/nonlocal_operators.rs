//! Sup/inf ball operators and the nonlocal infinity Laplacian of the
//! Aronsson function, which is infinity-harmonic away from the axes.
//!
//! cargo run --release --example nonlocal_operators

use liplearn::experiments::aronsson;
use liplearn::geometry::{Domain, GeodesicOracle, OracleParams};
use liplearn::nonlocal::nonlocal_operators;

fn main() -> liplearn::Result<()> {
    let domain = Domain::unit_cube(2);
    let oracle = GeodesicOracle::new(&domain, OracleParams::default())?;
    let f = |p: &[f64]| aronsson(p);
    let x = [0.5, 0.6];
    // the grid sup is off by at most L * spacing * sqrt(2), L ~ 1.6 near x
    println!("{:>6} {:>10} {:>10} {:>10} {:>12}", "eps", "S+", "S-", "laplacian", "slope error");
    for eps in [0.2, 0.1, 0.05, 0.025] {
        let spacing = eps / 400.0;
        let v = nonlocal_operators(&f, &x, eps, spacing, &oracle)?;
        let bound = 1.6 * spacing * 2f64.sqrt() / eps;
        println!("{eps:>6} {:>10.5} {:>10.5} {:>10.5} {bound:>12.1e}", v.s_plus, v.s_minus, v.laplacian);
    }
    Ok(())
}
