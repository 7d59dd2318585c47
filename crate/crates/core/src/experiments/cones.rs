use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{
    estimate_resolution, resolution_grid_error, sample_uniform, Domain, GeodesicOracle, OracleParams, PointCloud,
};
use crate::graph::{build_graph, GeometricGraph};
use crate::kernel::KernelProfile;
use crate::shortest_path::graph_distance_from;
use crate::spatial::dist;

/// What to do when the resolution is too coarse for the upper bound's
/// hypothesis `delta/h <= t0 / (2 (2 + phi(delta)/delta))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PreconditionPolicy {
    /// Refuse to run.
    #[default]
    Enforce,
    /// Run anyway and flag the record.
    Report,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeStudyConfig {
    pub domain: Domain,
    pub kernel: KernelProfile,
    pub n: usize,
    pub h: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub policy: PreconditionPolicy,
    /// Resolution grid spacing; defaults to a quarter of the mean spacing.
    pub reference_spacing: Option<f64>,
    pub oracle: OracleParams,
}

impl ConeStudyConfig {
    pub fn new(domain: Domain, kernel: KernelProfile, n: usize, h: f64) -> Self {
        Self {
            domain,
            kernel,
            n,
            h,
            trials: 1,
            base_seed: 0,
            policy: PreconditionPolicy::Enforce,
            reference_spacing: None,
            oracle: OracleParams::default(),
        }
    }
}

/// Margins are `max over vertices of (bound side - distance side)`, so a
/// bound holds when its margin is at most zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub source: usize,
    pub delta_hat: f64,
    /// `delta_hat` plus the reference-grid error; used in the upper bound.
    pub delta_bound: f64,
    pub h: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub precondition_ok: bool,
}

/// Slack for rounding in summed edge lengths.
fn rounding_slack(d: f64) -> f64 {
    1e-12 * (1.0 + d)
}

/// Compares the graph distance from `source` with the two continuum bounds
/// `d_n >= max(|x - y|, (1 - phi(h)/h) d)` and
/// `d_n <= (1 + 4 delta/(t0 h) + 2 phi(delta)/(t0 h)) d + tau h`,
/// where `d` is the geodesic distance.
pub fn cone_margins(
    cloud: &PointCloud,
    graph: &GeometricGraph,
    oracle: &GeodesicOracle,
    source: usize,
    delta: f64,
) -> Result<(f64, f64, usize, usize)> {
    let (Some(h), Some(kernel)) = (graph.bandwidth(), graph.kernel()) else {
        return Err(invalid("graph carries no bandwidth or kernel"));
    };
    let modulus = oracle.domain().modulus();
    let d_n = graph_distance_from(graph, source)?;
    let x = cloud.point(source);
    let geodesic = oracle.distances_from(x, cloud.coords(), f64::INFINITY)?;
    let lower_factor = 1.0 - modulus.phi(h) / h;
    let t0 = kernel.t_zero();
    let upper_factor = 1.0 + 4.0 * delta / (t0 * h) + 2.0 * modulus.phi(delta) / (t0 * h);
    let tau_h = kernel.tau_eta() * h;

    let (mut lower_margin, mut upper_margin) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (mut lower_violations, mut upper_violations) = (0, 0);
    for y in 0..cloud.len() {
        let lower = dist(x, cloud.point(y)).max(lower_factor * geodesic[y]);
        let upper = upper_factor * geodesic[y] + tau_h;
        let (lm, um) = (lower - d_n[y], d_n[y] - upper);
        lower_margin = lower_margin.max(lm);
        upper_margin = upper_margin.max(um);
        if lm > rounding_slack(d_n[y]) {
            lower_violations += 1;
        }
        if !(um <= rounding_slack(upper)) {
            upper_violations += 1;
        }
    }
    Ok((lower_margin, upper_margin, lower_violations, upper_violations))
}

/// Samples clouds, builds graphs and measures both cone bounds from a
/// random source per trial.
pub fn run_cone_study(config: &ConeStudyConfig) -> Result<Vec<ConeRecord>> {
    if config.trials == 0 || config.n == 0 {
        return Err(invalid("cone study needs n >= 1 and trials >= 1"));
    }
    if !(config.h > 0.0 && config.h.is_finite()) {
        return Err(invalid(format!("bandwidth must be positive, got {}", config.h)));
    }
    let domain = &config.domain;
    let oracle = GeodesicOracle::new(domain, config.oracle)?;
    let t0 = config.kernel.t_zero();
    let mut records = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let seed = config.base_seed + trial as u64;
        let cloud = sample_uniform(domain, config.n, seed)?;
        let spacing = config.reference_spacing.unwrap_or_else(|| {
            let (lo, hi) = domain.bounding_box();
            let volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
            (volume / config.n as f64).powf(1.0 / domain.dim() as f64) / 4.0
        });
        let delta_hat = estimate_resolution(&cloud, domain, spacing, None)?;
        let delta_bound = delta_hat + resolution_grid_error(spacing, domain.dim());
        let phi_ratio = if delta_bound > 0.0 { domain.modulus().phi(delta_bound) / delta_bound } else { 0.0 };
        let precondition_ok = delta_bound / config.h <= t0 / (2.0 * (2.0 + phi_ratio));
        if !precondition_ok {
            let msg = format!(
                "resolution {delta_bound:.4} is too coarse for h = {}: need delta/h <= {:.4}",
                config.h,
                t0 / (2.0 * (2.0 + phi_ratio))
            );
            match config.policy {
                PreconditionPolicy::Enforce => return Err(Error::Precondition(msg)),
                PreconditionPolicy::Report => log::warn!("trial {trial}: {msg}"),
            }
        }
        let graph = build_graph(&cloud, &config.kernel, config.h)?;
        let source = ChaCha8Rng::seed_from_u64(seed).gen_range(0..config.n);
        let (lower_margin, upper_margin, lower_violations, upper_violations) =
            cone_margins(&cloud, &graph, &oracle, source, delta_bound)?;
        records.push(ConeRecord {
            n: config.n,
            trial,
            seed,
            source,
            delta_hat,
            delta_bound,
            h: config.h,
            lower_margin,
            upper_margin,
            lower_violations,
            upper_violations,
            precondition_ok,
        });
    }
    Ok(records)
}

pub fn write_cone_records(path: &Path, records: &[ConeRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
