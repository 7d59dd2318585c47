//! Graph distance functions (graph cones) with edge lengths `1 / w`.

use std::collections::BinaryHeap;
use std::ops::{Deref, DerefMut, Index, IndexMut};

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::HeapEntry;
use crate::graph::GeometricGraph;

/// One real value per vertex. Distance functions use `+inf` for
/// unreachable vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction {
    pub values: Vec<f64>,
}

impl GraphFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { values: vec![c; n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Self {
        Self { values: (0..n).map(f).collect() }
    }

    pub fn graph_n(&self) -> usize {
        self.values.len()
    }

    /// `max_i |self_i - other_i|`.
    pub fn sup_distance(&self, other: &GraphFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub(crate) fn check_aligned(&self, graph: &GeometricGraph) -> Result<()> {
        if self.values.len() != graph.len() {
            return Err(invalid(format!(
                "function has {} values, graph has {} vertices",
                self.values.len(),
                graph.len()
            )));
        }
        Ok(())
    }
}

impl Deref for GraphFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl DerefMut for GraphFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

impl Index<usize> for GraphFunction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl IndexMut<usize> for GraphFunction {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

/// Multi-source Dijkstra. Returns distances and, for each reached vertex, the
/// position in `sources` of the source it is closest to (lowest position on
/// ties). Stops early once every vertex in `targets` is settled.
pub(crate) fn dijkstra(
    graph: &GeometricGraph,
    sources: &[usize],
    targets: Option<&[usize]>,
) -> (Vec<f64>, Vec<usize>) {
    let n = graph.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut origin = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for (k, &s) in sources.iter().enumerate() {
        if dist[s] > 0.0 {
            dist[s] = 0.0;
            origin[s] = k;
            heap.push(HeapEntry { dist: 0.0, vertex: s });
        }
    }
    let mut pending = targets.map(|t| {
        let mut want = vec![false; n];
        let mut count = 0;
        for &v in t {
            if !want[v] {
                want[v] = true;
                count += 1;
            }
        }
        (want, count)
    });
    while let Some(HeapEntry { dist: du, vertex: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if let Some((want, count)) = pending.as_mut() {
            if want[u] {
                *count -= 1;
                if *count == 0 {
                    break;
                }
            }
        }
        for (v, w) in graph.row(u) {
            if done[v] {
                continue;
            }
            let nd = du + 1.0 / w;
            if nd < dist[v] || (nd == dist[v] && origin[u] < origin[v]) {
                dist[v] = nd;
                origin[v] = origin[u];
                heap.push(HeapEntry { dist: nd, vertex: v });
            }
        }
    }
    (dist, origin)
}

/// `d(., source)`: shortest-path distance with edge lengths `1 / w`.
pub fn graph_distance_from(graph: &GeometricGraph, source: usize) -> Result<GraphFunction> {
    if source >= graph.len() {
        return Err(invalid(format!("source {source} out of range")));
    }
    Ok(GraphFunction::new(dijkstra(graph, &[source], None).0))
}

/// `min_s d(., s)` over `sources`, in a single pass.
pub fn graph_distance_from_set(graph: &GeometricGraph, sources: &[usize]) -> Result<GraphFunction> {
    Ok(GraphFunction::new(nearest_source(graph, sources)?.0))
}

/// Distance to the closest source and which source (position in `sources`)
/// that is; `usize::MAX` for unreachable vertices.
pub fn nearest_source(graph: &GeometricGraph, sources: &[usize]) -> Result<(Vec<f64>, Vec<usize>)> {
    if sources.is_empty() {
        return Err(Error::Empty("source set".into()));
    }
    if let Some(&s) = sources.iter().find(|&&s| s >= graph.len()) {
        return Err(invalid(format!("source {s} out of range")));
    }
    Ok(dijkstra(graph, sources, None))
}

/// `max_{x != z, u(x) finite} | max_y w_xy (u(x) - u(y)) - 1 |`.
///
/// Zero exactly when `u` solves the graph eikonal equation away from `z`;
/// distance functions from `z` satisfy it up to rounding.
pub fn eikonal_residual(graph: &GeometricGraph, u: &GraphFunction, z: usize) -> Result<f64> {
    u.check_aligned(graph)?;
    if z >= graph.len() {
        return Err(invalid(format!("apex {z} out of range")));
    }
    let residual = (0..graph.len())
        .into_par_iter()
        .filter(|&x| x != z && u[x].is_finite() && graph.degree(x) > 0)
        .map(|x| {
            let slope = graph.row(x).map(|(y, w)| w * (u[x] - u[y])).fold(f64::NEG_INFINITY, f64::max);
            (slope - 1.0).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(residual)
}

/// `max_{x != y in subset} |u(x) - u(y)| / d(x, y)`, with full-graph distances.
pub fn lipschitz_constant(graph: &GeometricGraph, u: &GraphFunction, subset: &[usize]) -> Result<f64> {
    u.check_aligned(graph)?;
    let mut members = subset.to_vec();
    members.sort_unstable();
    members.dedup();
    if members.len() < 2 {
        return Err(invalid("Lipschitz constant needs at least two vertices"));
    }
    if let Some(&s) = members.iter().find(|&&s| s >= graph.len()) {
        return Err(invalid(format!("vertex {s} out of range")));
    }
    let per_source: Result<Vec<f64>> = members
        .par_iter()
        .map(|&s| {
            let (dist, _) = dijkstra(graph, &[s], Some(&members));
            let mut best: f64 = 0.0;
            for &t in &members {
                if t == s {
                    continue;
                }
                if !dist[t].is_finite() {
                    return Err(Error::Disconnected { vertex: t, target: "every vertex of the subset" });
                }
                best = best.max((u[s] - u[t]).abs() / dist[t]);
            }
            Ok(best)
        })
        .collect();
    Ok(per_source?.into_iter().fold(0.0, f64::max))
}
