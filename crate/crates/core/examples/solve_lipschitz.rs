//! Lipschitz learning on the star: four labeled tips, the singular kernel
//! and the error against the Aronsson function.
//!
//! cargo run --release --example solve_lipschitz -- [n]

use liplearn::amle::{comparison_with_cones_check, solve_amle};
use liplearn::experiments::{aronsson, star_labels};
use liplearn::geometry::{build_constraint_set, estimate_resolution, sample_uniform, ConstraintMode, Domain};
use liplearn::graph::build_graph;
use liplearn::kernel::KernelProfile;
use liplearn::shortest_path::lipschitz_constant;

fn main() -> liplearn::Result<()> {
    env_logger::init();
    let n: usize = std::env::args().nth(1).map_or(4096, |s| s.parse().expect("n"));
    let domain = Domain::lp_star();
    let cloud = sample_uniform(&domain, n, 0)?;
    let labels = build_constraint_set(&cloud, &star_labels(), ConstraintMode::ClosestPoint, 0.0, None)?;
    // h = 2 delta^(2/3), the scaling used by the convergence study
    let delta = estimate_resolution(&cloud, &domain, 0.005, None)?;
    let h = 2.0 * delta.powf(2.0 / 3.0);
    let graph = build_graph(&cloud, &KernelProfile::power(1.0)?, h)?;
    let (u, report) = solve_amle(&graph, &labels, 1e-10, 100_000)?;
    println!(
        "n = {n}, h = {h:.3}: {} sweeps, residual {:.1e}, {:.2}s",
        report.iterations, report.final_residual, report.wall_time
    );
    let err = (0..n).map(|i| (u[i] - aronsson(cloud.point(i))).abs()).fold(0.0, f64::max);
    println!("sup error against the Aronsson function: {err:.4}");
    let all: Vec<usize> = (0..n).collect();
    println!(
        "Lipschitz constant: all vertices {:.6}, labels only {:.6}",
        lipschitz_constant(&graph, &u, &all)?,
        lipschitz_constant(&graph, &u, &labels.indices)?
    );
    let cmp = comparison_with_cones_check(&graph, &u, &labels, 20, 1)?;
    println!("comparison with cones: max violation {:.1e} over {} subsets", cmp.max_violation, cmp.evaluated);
    Ok(())
}
