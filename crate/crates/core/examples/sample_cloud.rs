//! Samples the star domain, attaches the four tip labels and reports the
//! resolution of the cloud.
//!
//! cargo run --example sample_cloud -- [n] [seed]

use liplearn::experiments::star_labels;
use liplearn::geometry::{
    build_constraint_set, estimate_resolution, sample_uniform, ConstraintMode, Domain, LabelPairing,
};

fn main() -> liplearn::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(4096, |s| s.parse().expect("n"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));

    let domain = Domain::lp_star();
    let cloud = sample_uniform(&domain, n, seed)?;
    let labels = build_constraint_set(&cloud, &star_labels(), ConstraintMode::ClosestPoint, 0.0, None)?;
    let continuum: Vec<Vec<f64>> = star_labels().into_iter().map(|(x, _)| x).collect();

    let spacing = 0.005;
    let plain = estimate_resolution(&cloud, &domain, spacing, None)?;
    let paired = estimate_resolution(
        &cloud,
        &domain,
        spacing,
        Some(LabelPairing { continuum: &continuum, vertices: &labels.indices }),
    )?;
    println!("{n} points on the star (seed {seed})");
    for (i, v) in labels.iter() {
        println!("  label at vertex {i} {:?} = {v:.4}", cloud.point(i));
    }
    println!("resolution {plain:.4}, with label pairing {paired:.4}");
    Ok(())
}
