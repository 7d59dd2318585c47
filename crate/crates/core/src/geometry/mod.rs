//! Continuum domains, point clouds sampled from them, and the geometric
//! quantities relating the two.

mod cloud;
mod domain;
mod geodesic;
mod scaling;

pub use cloud::{
    build_constraint_set, estimate_resolution, reference_grid, resolution_grid_error, sample_uniform,
    ConstraintMode, LabelPairing, LabelSet, PointCloud,
};
pub use domain::{Domain, DomainSpec, Modulus, Shape, STAR_MODULUS_CONSTANT};
pub use geodesic::{GeodesicEstimate, GeodesicOracle, OracleParams};
pub(crate) use geodesic::HeapEntry;
pub use scaling::{check_scaling_assumption, ScalingReport};
