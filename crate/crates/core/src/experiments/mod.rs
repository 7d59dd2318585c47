//! Convergence experiments on the star domain and finite-sample cone bounds.

mod cones;
mod fit;
mod study;

pub use cones::{cone_margins, run_cone_study, write_cone_records, ConeRecord, ConeStudyConfig, PreconditionPolicy};
pub use fit::{fit_rate, fit_rate_against_resolution, least_squares, RateFit};
pub use study::{
    read_records, run_convergence_study, star_labels, write_records, ConvergenceRecord, Scaling, StudyConfig,
};

/// `|x1|^(4/3) - |x2|^(4/3)`, infinity harmonic away from the axes.
pub fn aronsson(x: &[f64]) -> f64 {
    x[0].abs().powf(4.0 / 3.0) - x[1].abs().powf(4.0 / 3.0)
}
