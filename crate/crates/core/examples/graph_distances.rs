//! Graph distance from one vertex, its eikonal residual and how it compares
//! with the Euclidean distance.
//!
//! cargo run --example graph_distances

use liplearn::geometry::{sample_uniform, Domain};
use liplearn::graph::build_graph;
use liplearn::kernel::KernelProfile;
use liplearn::shortest_path::{eikonal_residual, graph_distance_from};

fn main() -> liplearn::Result<()> {
    let cloud = sample_uniform(&Domain::unit_cube(2), 5000, 3)?;
    let source = 0;
    for name in ["constant", "power:1"] {
        let kernel: KernelProfile = name.parse()?;
        let graph = build_graph(&cloud, &kernel, 0.1)?;
        let d = graph_distance_from(&graph, source)?;
        let z = cloud.point(source);
        let stretch = (0..cloud.len())
            .filter(|&x| x != source)
            .map(|x| {
                let p = cloud.point(x);
                d[x] / ((p[0] - z[0]).hypot(p[1] - z[1]))
            })
            .fold((f64::INFINITY, 0.0f64), |(a, b), s| (a.min(s), b.max(s)));
        println!(
            "{name:<9} eikonal residual {:.1e}, graph/Euclidean ratio in [{:.4}, {:.4}]",
            eikonal_residual(&graph, &d, source)?,
            stretch.0,
            stretch.1
        );
    }
    Ok(())
}
