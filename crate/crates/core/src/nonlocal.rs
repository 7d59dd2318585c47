//! Continuum-side operators: extensions of graph functions off the cloud and
//! the nonlocal sup/inf operators on geodesic balls.
//!
//! Balls are discretized by a regular grid centered at the evaluation point,
//! so the center itself is always sampled and `T_eps u <= u <= T^eps u`
//! holds exactly there.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{check_scaling_assumption, reference_grid, GeodesicOracle, PointCloud};
use crate::graph::GeometricGraph;
use crate::shortest_path::GraphFunction;
use crate::spatial::dist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Extremum {
    Sup,
    Inf,
}

impl Extremum {
    fn identity(self) -> f64 {
        match self {
            Extremum::Sup => f64::NEG_INFINITY,
            Extremum::Inf => f64::INFINITY,
        }
    }

    fn pick(self, a: f64, b: f64) -> f64 {
        match self {
            Extremum::Sup => a.max(b),
            Extremum::Inf => a.min(b),
        }
    }
}

/// How ball membership is decided.
#[derive(Debug, Clone, Copy)]
pub enum BallMetric<'a> {
    /// Plain Euclidean balls; only meaningful on convex domains.
    Euclidean,
    /// Geodesic balls through the oracle (Euclidean when the oracle's domain
    /// is convex).
    Geodesic(&'a GeodesicOracle),
}

fn check_cloud_function(cloud: &PointCloud, u: &GraphFunction) -> Result<()> {
    if cloud.is_empty() {
        return Err(Error::Empty("point cloud".into()));
    }
    if u.len() != cloud.len() {
        return Err(invalid(format!("function has {} values, cloud has {} points", u.len(), cloud.len())));
    }
    Ok(())
}

/// Value of `u` at the closest cloud point to `x`.
pub fn extend_piecewise_constant(cloud: &PointCloud, u: &GraphFunction, x: &[f64]) -> Result<f64> {
    check_cloud_function(cloud, u)?;
    Ok(u[cloud.closest_point_projection(x)?])
}

/// Sup or inf of `u` over the cloud points within distance `eps` of `x`.
pub fn ball_extension(
    cloud: &PointCloud,
    u: &GraphFunction,
    x: &[f64],
    eps: f64,
    mode: Extremum,
    metric: BallMetric<'_>,
) -> Result<f64> {
    check_cloud_function(cloud, u)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    if x.len() != cloud.dim() {
        return Err(invalid("query point has the wrong dimension"));
    }
    let candidates = cloud.within(x, eps);
    let members: Vec<usize> = match metric {
        BallMetric::Geodesic(oracle) if !oracle.is_euclidean() => {
            let flat: Vec<f64> = candidates.iter().flat_map(|&i| cloud.point(i).iter().copied()).collect();
            let d = oracle.distances_from(x, &flat, eps)?;
            candidates.iter().zip(d).filter(|(_, d)| *d <= eps).map(|(&i, _)| i).collect()
        }
        _ => candidates,
    };
    if members.is_empty() {
        return Err(Error::Empty(format!("no cloud point within {eps} of {x:?}; eps is below the resolution")));
    }
    Ok(members.iter().fold(mode.identity(), |acc, &i| mode.pick(acc, u[i])))
}

/// The nonlocal quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonlocalValues {
    /// Sup of the field over the ball.
    pub t_sup: f64,
    /// Inf of the field over the ball.
    pub t_inf: f64,
    /// `(t_sup - u(x)) / eps`.
    pub s_plus: f64,
    /// `(u(x) - t_inf) / eps`.
    pub s_minus: f64,
    /// `(s_plus - s_minus) / eps`.
    pub laplacian: f64,
}

/// Grid points of spacing `spacing` centered at `x` that lie in the domain
/// and in the closed ball of radius `eps` around `x`.
pub fn ball_grid(x: &[f64], eps: f64, spacing: f64, oracle: &GeodesicOracle) -> Result<Vec<Vec<f64>>> {
    let domain = oracle.domain();
    let dim = domain.dim();
    if x.len() != dim {
        return Err(invalid("query point has the wrong dimension"));
    }
    let m = (eps / spacing).floor() as i64;
    let mut offsets = vec![-m; dim];
    let mut points = Vec::new();
    'outer: loop {
        let p: Vec<f64> = (0..dim).map(|k| x[k] + offsets[k] as f64 * spacing).collect();
        if dist(&p, x) <= eps && domain.contains(&p) {
            points.push(p);
        }
        for k in 0..dim {
            if offsets[k] < m {
                offsets[k] += 1;
                continue 'outer;
            }
            offsets[k] = -m;
        }
        break;
    }
    if !oracle.is_euclidean() && !points.is_empty() {
        let flat: Vec<f64> = points.iter().flatten().copied().collect();
        let d = oracle.distances_from(x, &flat, eps)?;
        points = points.into_iter().zip(d).filter(|(_, d)| *d <= eps).map(|(p, _)| p).collect();
    }
    Ok(points)
}

/// Sup and inf of `field` over the discretized ball, with the slopes and the
/// nonlocal infinity Laplacian derived from them.
///
/// For a field with Lipschitz constant `L` the sup and inf are off by at most
/// `L * spacing * sqrt(d)`.
pub fn nonlocal_operators(
    field: &(dyn Fn(&[f64]) -> f64 + Sync),
    x: &[f64],
    eps: f64,
    spacing: f64,
    oracle: &GeodesicOracle,
) -> Result<NonlocalValues> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    if !(spacing > 0.0 && spacing <= eps / 10.0) {
        return Err(invalid(format!("ball grid spacing must lie in (0, eps/10], got {spacing}")));
    }
    if !oracle.domain().contains(x) {
        return Err(invalid(format!("point {x:?} lies outside the domain")));
    }
    let points = ball_grid(x, eps, spacing, oracle)?;
    if points.is_empty() {
        return Err(Error::Empty("ball grid".into()));
    }
    let values: Vec<f64> = points.par_iter().map(|p| field(p)).collect();
    let t_sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t_inf = values.iter().copied().fold(f64::INFINITY, f64::min);
    let center = field(x);
    let s_plus = (t_sup - center) / eps;
    let s_minus = (center - t_inf) / eps;
    Ok(NonlocalValues { t_sup, t_inf, s_plus, s_minus, laplacian: (s_plus - s_minus) / eps })
}

/// Raw output of [`max_ball_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxBallReport {
    /// Largest positive part of `-laplacian` applied to the sup extension.
    pub max_superviolation: f64,
    /// Largest positive part of `laplacian` applied to the inf extension.
    pub max_subviolation: f64,
    /// `delta/(h eps) + h/eps^2 + phi(h)/(h eps)`.
    pub predicted_rate: f64,
    pub super_ratio: f64,
    pub sub_ratio: f64,
    /// Number of evaluation points far enough from the labels.
    pub points: usize,
}

/// Evaluates the nonlocal infinity Laplacian of the sup and inf extensions of
/// a solved graph function at grid points whose distance to the continuum
/// labels exceeds `2 eps + 3 delta`.
///
/// The graph's bandwidth and kernel enter the precondition on
/// `(delta, h, eps)` and the predicted rate; no constant is asserted.
#[allow(clippy::too_many_arguments)]
pub fn max_ball_check(
    u: &GraphFunction,
    cloud: &PointCloud,
    graph: &GeometricGraph,
    oracle: &GeodesicOracle,
    eps: f64,
    delta: f64,
    labels_continuum: &[Vec<f64>],
    grid_spacing: f64,
) -> Result<MaxBallReport> {
    check_cloud_function(cloud, u)?;
    let (Some(h), Some(kernel)) = (graph.bandwidth(), graph.kernel()) else {
        return Err(invalid("graph carries no bandwidth or kernel"));
    };
    let domain = oracle.domain();
    let scaling = check_scaling_assumption(delta, h, eps, kernel, domain)?;
    if !scaling.passed {
        return Err(Error::Precondition(format!(
            "delta = {delta}, h = {h}, eps = {eps} violate the scaling assumption ({scaling:?})"
        )));
    }
    let margin = 2.0 * eps + 3.0 * delta;
    let grid = reference_grid(domain, grid_spacing)?;
    let admissible: Vec<&[f64]> = grid
        .chunks_exact(domain.dim())
        .filter(|p| labels_continuum.iter().all(|l| dist(p, l) > margin))
        .collect();
    if admissible.is_empty() {
        return Err(Error::Empty(format!("grid points farther than {margin} from the labels")));
    }

    let metric = BallMetric::Geodesic(oracle);
    let ball_spacing = eps / 10.0;
    let sup_ext = |y: &[f64]| ball_extension(cloud, u, y, eps, Extremum::Sup, metric);
    let inf_ext = |y: &[f64]| ball_extension(cloud, u, y, eps, Extremum::Inf, metric);

    let per_point: Vec<(f64, f64)> = admissible
        .par_iter()
        .map(|&z| -> Result<(f64, f64)> {
            let ball = ball_grid(z, eps, ball_spacing, oracle)?;
            // sup extension v: T^eps v(z) is the sup over the doubled ball
            let v_z = sup_ext(z)?;
            let v_up = ball_extension(cloud, u, z, 2.0 * eps, Extremum::Sup, metric)?;
            let mut v_down = f64::INFINITY;
            for y in &ball {
                v_down = v_down.min(sup_ext(y)?);
            }
            let lap_v = (v_up + v_down - 2.0 * v_z) / (eps * eps);

            let w_z = inf_ext(z)?;
            let w_down = ball_extension(cloud, u, z, 2.0 * eps, Extremum::Inf, metric)?;
            let mut w_up = f64::NEG_INFINITY;
            for y in &ball {
                w_up = w_up.max(inf_ext(y)?);
            }
            let lap_w = (w_up + w_down - 2.0 * w_z) / (eps * eps);
            Ok(((-lap_v).max(0.0), lap_w.max(0.0)))
        })
        .collect::<Result<_>>()?;

    let max_superviolation = per_point.iter().map(|p| p.0).fold(0.0, f64::max);
    let max_subviolation = per_point.iter().map(|p| p.1).fold(0.0, f64::max);
    let phi = domain.modulus().phi(h);
    let predicted_rate = delta / (h * eps) + h / (eps * eps) + phi / (h * eps);
    Ok(MaxBallReport {
        max_superviolation,
        max_subviolation,
        predicted_rate,
        super_ratio: max_superviolation / predicted_rate,
        sub_ratio: max_subviolation / predicted_rate,
        points: admissible.len(),
    })
}
