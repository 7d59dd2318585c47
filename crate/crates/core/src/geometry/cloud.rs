use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Domain;
use crate::error::{invalid, Error, Result};
use crate::spatial::{dist, CellGrid};

/// Sampled vertices in `dim` dimensions, stored row-major.
#[derive(Debug, Clone)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    /// Sorted, distinct labeled vertex indices.
    pub label_indices: Vec<usize>,
    pub seed: u64,
    pub resolution_estimate: Option<f64>,
    index: OnceLock<CellGrid>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(invalid(format!("{} coordinates do not split into {dim}-vectors", coords.len())));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point coordinates must be finite"));
        }
        Ok(Self { dim, coords, label_indices: Vec::new(), seed: 0, resolution_estimate: None, index: OnceLock::new() })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points.first().map(|p| p.as_ref().len()).unwrap_or(0);
        if points.iter().any(|p| p.as_ref().len() != dim) {
            return Err(invalid("points have differing dimensions"));
        }
        Self::new(dim, points.iter().flat_map(|p| p.as_ref().iter().copied()).collect())
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Keeps only the first `n` points (labels beyond the cut are dropped).
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.len());
        let mut out = Self::new(self.dim, self.coords[..n * self.dim].to_vec()).expect("prefix of a valid cloud");
        out.seed = self.seed;
        out.label_indices = self.label_indices.iter().copied().filter(|&i| i < n).collect();
        out
    }

    pub fn with_labels(mut self, labels: &LabelSet) -> Result<Self> {
        if labels.indices.iter().any(|&i| i >= self.len()) {
            return Err(invalid("label index out of range"));
        }
        let mut idx = labels.indices.clone();
        idx.sort_unstable();
        self.label_indices = idx;
        Ok(self)
    }

    /// Nearest-neighbor index with roughly one point per cell.
    pub fn spatial_index(&self) -> &CellGrid {
        self.index.get_or_init(|| {
            let mut vol = 1.0;
            let (mut lo, mut hi) = (vec![f64::INFINITY; self.dim], vec![f64::NEG_INFINITY; self.dim]);
            for p in self.points() {
                for k in 0..self.dim {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
            for k in 0..self.dim {
                vol *= (hi[k] - lo[k]).max(1e-12);
            }
            let side = (vol / self.len().max(1) as f64).powf(1.0 / self.dim as f64).max(1e-9);
            CellGrid::new(&self.coords, self.dim, side)
        })
    }

    /// Index of the closest cloud point to `x`; ties go to the lowest index.
    pub fn closest_point_projection(&self, x: &[f64]) -> Result<usize> {
        self.check_query(x)?;
        self.spatial_index()
            .nearest(&self.coords, x)
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Empty("point cloud".into()))
    }

    /// Distance from `x` to the closest cloud point.
    pub fn distance_to_cloud(&self, x: &[f64]) -> Result<f64> {
        self.check_query(x)?;
        self.spatial_index()
            .nearest(&self.coords, x)
            .map(|(_, d)| d)
            .ok_or_else(|| Error::Empty("point cloud".into()))
    }

    /// Indices of cloud points within closed Euclidean distance `radius`, ascending.
    pub fn within(&self, x: &[f64], radius: f64) -> Vec<usize> {
        self.spatial_index().within(&self.coords, x, radius)
    }

    fn check_query(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(invalid(format!("query has dimension {}, cloud has {}", x.len(), self.dim)));
        }
        Ok(())
    }
}

/// Labeled vertices and their values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSet {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl LabelSet {
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(invalid("label indices and values differ in length"));
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("label indices must be distinct"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("label values must be finite"));
        }
        Ok(Self { indices, values })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Same vertices, values mapped through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { indices: self.indices.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn value_range(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Proposals after which a vanishing acceptance rate is treated as fatal.
const MIN_ATTEMPTS_BEFORE_REJECT: usize = 10_000;
const MIN_ACCEPTANCE: f64 = 1e-3;

/// Draws `n` i.i.d. uniform points by rejection from the bounding box.
///
/// Uses ChaCha8 seeded with `seed` on stream 0; every proposal consumes
/// `dim` uniforms in coordinate order, so a cloud of size `n` is a prefix of
/// the cloud of size `n + 1` for the same seed.
pub fn sample_uniform(domain: &Domain, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let dim = domain.dim();
    let (lo, hi) = domain.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(n * dim);
    let mut proposal = vec![0.0; dim];
    let (mut accepted, mut attempts) = (0usize, 0usize);
    while accepted < n {
        for k in 0..dim {
            proposal[k] = lo[k] + (hi[k] - lo[k]) * rng.gen::<f64>();
        }
        attempts += 1;
        if domain.contains(&proposal) {
            coords.extend_from_slice(&proposal);
            accepted += 1;
        }
        if attempts >= MIN_ATTEMPTS_BEFORE_REJECT && (accepted as f64) < MIN_ACCEPTANCE * attempts as f64 {
            return Err(Error::DegenerateDomain { accepted, attempts });
        }
    }
    let mut cloud = PointCloud::new(dim, coords)?;
    cloud.seed = seed;
    Ok(cloud)
}

/// Largest underestimate of the resolution caused by probing a grid of the
/// given spacing instead of the whole domain.
pub fn resolution_grid_error(reference_spacing: f64, dim: usize) -> f64 {
    reference_spacing * (dim as f64).sqrt() / 2.0
}

/// Regular grid covering the bounding box, spacing at most `spacing` per axis,
/// restricted to the domain. Row-major flat coordinates.
pub fn reference_grid(domain: &Domain, spacing: f64) -> Result<Vec<f64>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(invalid(format!("reference spacing must be positive, got {spacing}")));
    }
    let dim = domain.dim();
    let (lo, hi) = domain.bounding_box();
    let counts: Vec<usize> = (0..dim).map(|k| ((hi[k] - lo[k]) / spacing).ceil().max(1.0) as usize).collect();
    let steps: Vec<f64> = (0..dim).map(|k| (hi[k] - lo[k]) / counts[k] as f64).collect();
    let mut out = Vec::new();
    let mut cur = vec![0usize; dim];
    let mut p = vec![0.0; dim];
    'outer: loop {
        for k in 0..dim {
            // hit the upper corner exactly
            p[k] = if cur[k] == counts[k] { hi[k] } else { lo[k] + cur[k] as f64 * steps[k] };
        }
        if domain.contains(&p) {
            out.extend_from_slice(&p);
        }
        for k in 0..dim {
            if cur[k] < counts[k] {
                cur[k] += 1;
                continue 'outer;
            }
            cur[k] = 0;
        }
        break;
    }
    Ok(out)
}

/// Continuum label set paired with the discrete labeled vertices, for the
/// label part of the resolution.
pub struct LabelPairing<'a> {
    pub continuum: &'a [Vec<f64>],
    pub vertices: &'a [usize],
}

/// Estimates the resolution `max_x min_i |x - x_i|` over a reference grid of
/// the domain, joined with the Hausdorff distance between labeled vertices
/// and the continuum label set when given.
///
/// The grid misses at most [`resolution_grid_error`] of the true value.
pub fn estimate_resolution(
    cloud: &PointCloud,
    domain: &Domain,
    reference_spacing: f64,
    labels: Option<LabelPairing<'_>>,
) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::Empty("point cloud".into()));
    }
    if cloud.dim() != domain.dim() {
        return Err(invalid("cloud and domain dimensions differ"));
    }
    let grid = reference_grid(domain, reference_spacing)?;
    if grid.is_empty() {
        return Err(Error::Empty("reference grid inside the domain".into()));
    }
    let index = cloud.spatial_index();
    let coords = cloud.coords();
    let cover = grid
        .par_chunks(domain.dim())
        .map(|p| index.nearest(coords, p).map(|(_, d)| d).unwrap_or(f64::INFINITY))
        .reduce(|| 0.0, f64::max);

    let label_part = match labels {
        None => 0.0,
        Some(pair) => label_hausdorff(cloud, pair)?,
    };
    Ok(cover.max(label_part))
}

fn label_hausdorff(cloud: &PointCloud, pair: LabelPairing<'_>) -> Result<f64> {
    if pair.continuum.is_empty() || pair.vertices.is_empty() {
        return Err(Error::Empty("label set".into()));
    }
    let discrete: Vec<&[f64]> = pair.vertices.iter().map(|&i| cloud.point(i)).collect();
    let continuum: Vec<&[f64]> = pair.continuum.iter().map(Vec::as_slice).collect();
    let directed = |from: &[&[f64]], to: &[&[f64]]| {
        from.iter()
            .map(|x| to.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(&discrete, &continuum).max(directed(&continuum, &discrete)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintMode {
    /// Closest cloud vertex to each continuum label point.
    #[serde(rename = "cp")]
    ClosestPoint,
    /// Every vertex within a radius of the continuum label set.
    #[serde(rename = "dil")]
    Dilated,
}

impl std::str::FromStr for ConstraintMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cp" => Ok(ConstraintMode::ClosestPoint),
            "dil" => Ok(ConstraintMode::Dilated),
            other => Err(invalid(format!("unknown constraint mode `{other}`"))),
        }
    }
}

/// Builds the discrete constraint set from continuum label points.
///
/// `ClosestPoint` labels the projection of each continuum point (first label
/// point wins when two share a vertex). `Dilated` labels every vertex within
/// `radius` of a label point with `label_fn(vertex)`, or with the value of the
/// nearest label point when no function is given.
pub fn build_constraint_set(
    cloud: &PointCloud,
    continuum_labels: &[(Vec<f64>, f64)],
    mode: ConstraintMode,
    radius: f64,
    label_fn: Option<&dyn Fn(&[f64]) -> f64>,
) -> Result<LabelSet> {
    if continuum_labels.is_empty() {
        return Err(invalid("continuum label set is empty"));
    }
    let mut pairs: Vec<(usize, f64)> = Vec::new();
    match mode {
        ConstraintMode::ClosestPoint => {
            for (x, v) in continuum_labels {
                let i = cloud.closest_point_projection(x)?;
                if !pairs.iter().any(|&(j, _)| j == i) {
                    pairs.push((i, *v));
                }
            }
        }
        ConstraintMode::Dilated => {
            if !(radius > 0.0) {
                return Err(invalid(format!("dilated constraint set needs radius > 0, got {radius}")));
            }
            let mut hit = vec![false; cloud.len()];
            for (x, _) in continuum_labels {
                for i in cloud.within(x, radius) {
                    hit[i] = true;
                }
            }
            for (i, _) in hit.iter().enumerate().filter(|(_, &h)| h) {
                let p = cloud.point(i);
                let value = match label_fn {
                    Some(f) => f(p),
                    None => {
                        let mut best = (f64::INFINITY, 0.0);
                        for (y, v) in continuum_labels {
                            let d = dist(p, y);
                            if d < best.0 {
                                best = (d, *v);
                            }
                        }
                        best.1
                    }
                };
                pairs.push((i, value));
            }
            if pairs.is_empty() {
                return Err(Error::Empty(format!("no vertex within {radius} of the label set")));
            }
        }
    }
    pairs.sort_by_key(|&(i, _)| i);
    LabelSet::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
}
