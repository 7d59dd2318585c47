//! Symmetric weighted graphs in compressed sparse row form.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::PointCloud;
use crate::kernel::KernelProfile;
use crate::spatial::{dist2, CellGrid};

/// Symmetric adjacency with positive weights. Rows are sorted by neighbor
/// index and carry no self-loops.
///
/// Geometric graphs remember the bandwidth and kernel they were built with;
/// graphs assembled from an edge list do not.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricGraph {
    n: usize,
    h: Option<f64>,
    kernel: Option<KernelProfile>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
}

impl GeometricGraph {
    /// Builds a graph from undirected edges `(i, j, w)`. Each pair may appear
    /// once (in either orientation); weights must be positive and finite.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(invalid(format!("edge ({i}, {j}) out of range for {n} vertices")));
            }
            if i == j {
                return Err(invalid(format!("self-loop at vertex {i}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(invalid(format!("edge ({i}, {j}) has non-positive weight {w}")));
            }
            rows[i].push((j, w));
            rows[j].push((i, w));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(invalid(format!("duplicate edge ({i}, {})", w[0].0)));
            }
        }
        Ok(Self::from_rows(n, None, None, rows))
    }

    fn from_rows(n: usize, h: Option<f64>, kernel: Option<KernelProfile>, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let total: usize = rows.iter().map(Vec::len).sum();
        let mut neighbors = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for row in rows {
            for (j, w) in row {
                neighbors.push(j);
                weights.push(w);
            }
            offsets.push(neighbors.len());
        }
        Self { n, h, kernel, offsets, neighbors, weights }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidth(&self) -> Option<f64> {
        self.h
    }

    pub fn kernel(&self) -> Option<&KernelProfile> {
        self.kernel.as_ref()
    }

    /// Attaches bandwidth and kernel metadata, e.g. after reading an edge list.
    pub fn with_metadata(mut self, h: f64, kernel: KernelProfile) -> Self {
        self.h = Some(h);
        self.kernel = Some(kernel);
        self
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn weights(&self, i: usize) -> &[f64] {
        &self.weights[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.neighbors(i).iter().copied().zip(self.weights(i).iter().copied())
    }

    /// Weight of edge `(i, j)`, zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match self.neighbors(i).binary_search(&j) {
            Ok(k) => self.weights(i)[k],
            Err(_) => 0.0,
        }
    }

    /// Undirected edges `(i, j, w)` with `i < j`, ordered by `(i, j)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).filter(move |&(j, _)| i < j).map(move |(j, w)| (i, j, w)))
    }

    /// `(min, mean, max)` vertex degree; all zero for an empty graph.
    pub fn degree_stats(&self) -> (usize, f64, usize) {
        if self.n == 0 {
            return (0, 0.0, 0);
        }
        let degrees = (0..self.n).map(|i| self.degree(i));
        let min = degrees.clone().min().unwrap_or(0);
        let max = degrees.max().unwrap_or(0);
        (min, self.neighbors.len() as f64 / self.n as f64, max)
    }
}

/// Connects every pair of cloud points at Euclidean distance in `(0, h]`
/// with weight [`KernelProfile::edge_weight`].
///
/// Points are bucketed into cells of side `h`, so each point is only compared
/// against its `3^d` surrounding cells. Coincident points get no edge.
pub fn build_graph(cloud: &PointCloud, kernel: &KernelProfile, h: f64) -> Result<GeometricGraph> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("bandwidth must be positive, got {h}")));
    }
    if cloud.is_empty() {
        return Err(invalid("cannot build a graph on an empty cloud"));
    }
    let dim = cloud.dim();
    let coords = cloud.coords();
    let grid = CellGrid::new(coords, dim, h);
    let rows: Vec<Vec<(usize, f64)>> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let x = cloud.point(i);
            let mut row = Vec::new();
            grid.for_each_within(coords, x, h, |j, d2| {
                if j != i && d2 > 0.0 {
                    row.push((j, d2));
                }
            });
            row.sort_unstable_by_key(|&(j, _)| j);
            row.into_iter()
                .map(|(j, d2)| {
                    let w = kernel.edge_weight(h, d2.sqrt()).expect("0 < r <= h");
                    (j, w)
                })
                .collect()
        })
        .collect();
    Ok(GeometricGraph::from_rows(cloud.len(), Some(h), Some(*kernel), rows))
}

/// O(n^2) reference construction, used to check [`build_graph`].
pub fn build_graph_brute_force(cloud: &PointCloud, kernel: &KernelProfile, h: f64) -> Result<GeometricGraph> {
    let mut edges = Vec::new();
    for i in 0..cloud.len() {
        for j in i + 1..cloud.len() {
            let d2 = dist2(cloud.point(i), cloud.point(j));
            if d2 > 0.0 && d2 <= h * h {
                edges.push((i, j, kernel.edge_weight(h, d2.sqrt())?));
            }
        }
    }
    Ok(GeometricGraph::from_edges(cloud.len(), &edges)?.with_metadata(h, *kernel))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_examples() {
        let k = KernelProfile::constant();
        let near = PointCloud::from_points(&[[0.0, 0.0], [0.05, 0.0]]).unwrap();
        let g = build_graph(&near, &k, 0.1).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!((g.weight(0, 1) - 10.0).abs() < 1e-12);
        assert_eq!(g.weight(0, 1), g.weight(1, 0));
        let far = PointCloud::from_points(&[[0.0, 0.0], [0.15, 0.0]]).unwrap();
        assert_eq!(build_graph(&far, &k, 0.1).unwrap().edge_count(), 0);
    }

    #[test]
    fn closed_ball_and_duplicates() {
        let k = KernelProfile::constant();
        let cloud = PointCloud::from_points(&[[0.0], [0.5], [0.5], [1.5]]).unwrap();
        let g = build_graph(&cloud, &k, 1.0).unwrap();
        // 0-1, 0-2, 1-3, 2-3; coincident 1,2 share no edge
        assert_eq!(g.edges().map(|(i, j, _)| (i, j)).collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert!(build_graph(&cloud, &k, 0.0).is_err());
    }

    #[test]
    fn degree_stats_examples() {
        let empty = GeometricGraph::from_edges(3, &[]).unwrap();
        assert_eq!(empty.degree_stats(), (0, 0.0, 0));
        let mut k4 = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                k4.push((i, j, 1.0));
            }
        }
        assert_eq!(GeometricGraph::from_edges(4, &k4).unwrap().degree_stats(), (3, 3.0, 3));
        assert_eq!(GeometricGraph::from_edges(0, &[]).unwrap().degree_stats(), (0, 0.0, 0));
    }

    #[test]
    fn from_edges_validation() {
        assert!(GeometricGraph::from_edges(2, &[(0, 2, 1.0)]).is_err());
        assert!(GeometricGraph::from_edges(2, &[(1, 1, 1.0)]).is_err());
        assert!(GeometricGraph::from_edges(2, &[(0, 1, 0.0)]).is_err());
        assert!(GeometricGraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 1.0)]).is_err());
    }
}
