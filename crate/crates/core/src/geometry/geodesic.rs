//! Geodesic distances inside a domain.
//!
//! Convex domains use the Euclidean distance. For the star domain the
//! geodesic distance is approximated by the singular-kernel graph distance on
//! a dense auxiliary cloud, whose edge lengths equal Euclidean lengths. The
//! two-sided cone bounds then bracket the true geodesic distance `d`:
//!
//! ```text
//! (1 - phi(h)/h) d  <=  d_hat  <=  (1 + 4 delta/h + 2 phi(delta)/h) d
//! ```
//!
//! the right inequality only when `delta/h <= 1 / (2 (2 + phi(delta)/delta))`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::Serialize;

use super::cloud::{estimate_resolution, resolution_grid_error, PointCloud};
use super::domain::{star_gauge, Shape};
use super::Domain;
use crate::error::{invalid, Error, Result};
use crate::spatial::{dist, CellGrid};

/// Parameters of the auxiliary cloud used on non-convex domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleParams {
    /// Target number of interior lattice points.
    pub n_oracle: usize,
    /// Bandwidth of the auxiliary singular-kernel graph.
    pub h_oracle: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self { n_oracle: 200_000, h_oracle: 0.02 }
    }
}

/// An approximate geodesic distance with the interval certified to contain
/// the true one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Whether the resolution condition behind `lower` held.
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct GeodesicOracle {
    domain: Domain,
    graph: Option<AuxiliaryGraph>,
}

#[derive(Debug, Clone)]
struct AuxiliaryGraph {
    cloud: PointCloud,
    grid: CellGrid,
    h: f64,
    delta: f64,
    lower_factor: f64,
    upper_factor: Option<f64>,
}

impl GeodesicOracle {
    /// Convex domains need no auxiliary graph; `params` is ignored for them.
    pub fn new(domain: &Domain, params: OracleParams) -> Result<Self> {
        if domain.is_convex() {
            return Ok(Self { domain: domain.clone(), graph: None });
        }
        Ok(Self { domain: domain.clone(), graph: Some(AuxiliaryGraph::build(domain, params)?) })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_euclidean(&self) -> bool {
        self.graph.is_none()
    }

    /// Resolution of the auxiliary cloud (zero for convex domains).
    pub fn auxiliary_resolution(&self) -> f64 {
        self.graph.as_ref().map_or(0.0, |g| g.delta)
    }

    pub fn auxiliary_size(&self) -> usize {
        self.graph.as_ref().map_or(0, |g| g.cloud.len())
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<GeodesicEstimate> {
        self.check_inside(x)?;
        self.check_inside(y)?;
        let euclid = dist(x, y);
        let Some(g) = &self.graph else {
            return Ok(GeodesicEstimate { value: euclid, lower: euclid, upper: euclid, certified: true });
        };
        if x == y {
            return Ok(GeodesicEstimate { value: 0.0, lower: 0.0, upper: 0.0, certified: true });
        }
        let d = g.distances(x, y, f64::INFINITY)?[0];
        if !d.is_finite() {
            return Err(Error::Disconnected { vertex: 1, target: "the query source in the oracle graph" });
        }
        Ok(g.bracket(d, euclid))
    }

    /// Approximate geodesic distances from `x` to each point of `targets`
    /// (flat coordinates). Entries beyond `cutoff` may be reported as
    /// infinity.
    pub fn distances_from(&self, x: &[f64], targets: &[f64], cutoff: f64) -> Result<Vec<f64>> {
        self.check_inside(x)?;
        let dim = self.domain.dim();
        if targets.len() % dim != 0 {
            return Err(invalid("target coordinates do not match the domain dimension"));
        }
        match &self.graph {
            None => Ok(targets.chunks_exact(dim).map(|t| dist(x, t)).collect()),
            Some(g) => g.distances(x, targets, cutoff),
        }
    }

    fn check_inside(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.domain.dim() {
            return Err(invalid("query point has the wrong dimension"));
        }
        if !self.domain.contains(x) {
            return Err(invalid(format!("point {x:?} lies outside the domain")));
        }
        Ok(())
    }
}

impl AuxiliaryGraph {
    fn build(domain: &Domain, params: OracleParams) -> Result<Self> {
        if !matches!(domain.shape(), Shape::LpStar) {
            return Err(invalid("auxiliary geodesic graphs are only built for the star domain"));
        }
        if params.n_oracle < 16 || !(params.h_oracle > 0.0) {
            return Err(invalid("oracle needs n_oracle >= 16 and h_oracle > 0"));
        }
        // lattice with about n_oracle points inside, plus the boundary curve
        // (cos^3, sin^3) at half the lattice spacing so the cusps are covered
        let area = 3.0 * PI / 8.0;
        let spacing = (area / params.n_oracle as f64).sqrt();
        let steps = (2.0 / spacing).ceil() as usize;
        let mut coords = Vec::new();
        for i in 0..=steps {
            for j in 0..=steps {
                let p = [-1.0 + 2.0 * i as f64 / steps as f64, -1.0 + 2.0 * j as f64 / steps as f64];
                if domain.contains(&p) {
                    coords.extend_from_slice(&p);
                }
            }
        }
        // |d/dtheta (cos^3, sin^3)| <= 3/2
        let m = (1.5 * 2.0 * PI / (0.5 * spacing)).ceil() as usize;
        for k in 0..m {
            let theta = 2.0 * PI * k as f64 / m as f64;
            let mut p = [theta.cos().powi(3), theta.sin().powi(3)];
            while star_gauge(&p) > 1.0 {
                p = [p[0] * (1.0 - 1e-12), p[1] * (1.0 - 1e-12)];
            }
            coords.extend_from_slice(&p);
        }
        let cloud = PointCloud::new(2, coords)?;
        let h = params.h_oracle;
        let reference = spacing / 2.0;
        let delta = estimate_resolution(&cloud, domain, reference, None)? + resolution_grid_error(reference, 2);
        let modulus = domain.modulus();
        let lower_factor = 1.0 - modulus.phi(h) / h;
        // singular kernel: t0 = 1, tau = 0
        let phi_delta = modulus.phi(delta);
        let upper_ok = delta / h <= 1.0 / (2.0 * (2.0 + phi_delta / delta)) && h <= domain.r_omega();
        let upper_factor = upper_ok.then(|| 1.0 + 4.0 * delta / h + 2.0 * phi_delta / h);
        log::debug!(
            "geodesic oracle: {} points, h = {h}, delta = {delta:.3e}, factors ({lower_factor:.3}, {upper_factor:?})",
            cloud.len()
        );
        let grid = CellGrid::new(cloud.coords(), 2, h);
        Ok(Self { cloud, grid, h, delta, lower_factor, upper_factor })
    }

    fn bracket(&self, d: f64, euclid: f64) -> GeodesicEstimate {
        let upper = if self.lower_factor > 0.0 { d / self.lower_factor } else { f64::INFINITY };
        let lower = match self.upper_factor {
            Some(f) => (d / f).max(euclid),
            None => euclid,
        };
        GeodesicEstimate { value: d, lower, upper, certified: self.upper_factor.is_some() }
    }

    /// Dijkstra on the auxiliary cloud plus `source` and `targets`, with
    /// edges between any two of these points closer than `h` and edge length
    /// equal to the Euclidean length.
    fn distances(&self, source: &[f64], targets: &[f64], cutoff: f64) -> Result<Vec<f64>> {
        if targets.is_empty() {
            return Ok(Vec::new());
        }
        let aux_n = self.cloud.len();
        let mut extra = Vec::with_capacity(source.len() + targets.len());
        extra.extend_from_slice(source);
        extra.extend_from_slice(targets);
        let extra_n = extra.len() / 2;
        let extra_grid = CellGrid::new(&extra, 2, self.h);
        let total = aux_n + extra_n;
        let coord = |v: usize| -> &[f64] {
            if v < aux_n {
                self.cloud.point(v)
            } else {
                &extra[(v - aux_n) * 2..(v - aux_n) * 2 + 2]
            }
        };

        let mut dist_to = vec![f64::INFINITY; total];
        let mut done = vec![false; total];
        let mut remaining = extra_n - 1;
        let mut heap = BinaryHeap::new();
        dist_to[aux_n] = 0.0;
        heap.push(HeapEntry { dist: 0.0, vertex: aux_n });
        while let Some(HeapEntry { dist: du, vertex: u }) = heap.pop() {
            if done[u] {
                continue;
            }
            if du > cutoff {
                break;
            }
            done[u] = true;
            if u > aux_n {
                remaining -= 1;
                if remaining == 0 {
                    break;
                }
            }
            let p = coord(u);
            let mut relax = |v: usize, d2: f64| {
                if v == u || d2 == 0.0 || done[v] {
                    return;
                }
                let nd = du + d2.sqrt();
                if nd < dist_to[v] {
                    dist_to[v] = nd;
                    heap.push(HeapEntry { dist: nd, vertex: v });
                }
            };
            self.grid.for_each_within(self.cloud.coords(), p, self.h, |v, d2| relax(v, d2));
            extra_grid.for_each_within(&extra, p, self.h, |v, d2| relax(aux_n + v, d2));
        }
        Ok((1..extra_n)
            .map(|k| {
                let d = dist_to[aux_n + k];
                if d <= cutoff {
                    d
                } else {
                    f64::INFINITY
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct HeapEntry {
    pub dist: f64,
    pub vertex: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    // min-heap on (dist, vertex)
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
