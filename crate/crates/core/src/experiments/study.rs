use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aronsson;
use crate::amle::{solve_amle_with, SolverOptions};
use crate::error::{invalid, Error, Result};
use crate::geometry::{
    build_constraint_set, estimate_resolution, sample_uniform, ConstraintMode, Domain, DomainSpec, LabelPairing,
};
use crate::graph::build_graph;
use crate::kernel::KernelProfile;

/// Bandwidth as a power of the estimated resolution, `h = c * delta^e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scaling {
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "delta_2_3")]
    DeltaTwoThirds,
    #[serde(rename = "delta_1_2")]
    DeltaHalf,
}

impl Scaling {
    pub fn exponent(self) -> f64 {
        match self {
            Scaling::Delta => 1.0,
            Scaling::DeltaTwoThirds => 2.0 / 3.0,
            Scaling::DeltaHalf => 0.5,
        }
    }
}

fn default_c() -> f64 {
    2.0
}

fn default_max_iter() -> usize {
    100_000
}

fn default_timing() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub domain: DomainSpec,
    pub kernel: KernelProfile,
    pub n_list: Vec<usize>,
    pub scaling: Scaling,
    /// Multiplier `c` in `h = c * delta^e`.
    #[serde(default = "default_c")]
    pub c: f64,
    pub constraint_mode: ConstraintMode,
    pub trials: usize,
    pub base_seed: u64,
    pub tol: f64,
    /// Results CSV, written incrementally after each n.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Spacing of the grid used to estimate the resolution. Defaults to a
    /// quarter of the mean point spacing.
    #[serde(default)]
    pub reference_spacing: Option<f64>,
    /// When false, `wall_time_s` is written as 0 so output is reproducible
    /// byte for byte.
    #[serde(default = "default_timing")]
    pub timing: bool,
}

impl StudyConfig {
    /// The star-domain study with closest-point labels and the given kernel.
    pub fn star(kernel: KernelProfile, n_list: Vec<usize>, trials: usize) -> Self {
        Self {
            domain: DomainSpec::Star,
            kernel,
            n_list,
            scaling: Scaling::DeltaTwoThirds,
            c: default_c(),
            constraint_mode: ConstraintMode::ClosestPoint,
            trials,
            base_seed: 0,
            tol: 1e-8,
            output: None,
            max_iter: default_max_iter(),
            reference_spacing: None,
            timing: true,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let config: Self = serde_json::from_reader(File::open(path)?)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n_list must be nonempty and strictly increasing"));
        }
        if self.n_list[0] == 0 {
            return Err(invalid("n_list entries must be positive"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid(format!("scaling multiplier must be positive, got {}", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if let Some(s) = self.reference_spacing {
            if !(s > 0.0) {
                return Err(invalid(format!("reference spacing must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

/// One `(n, trial)` outcome. A trial whose graph left some vertex cut off
/// from the labels has `sup_error = NaN` and is excluded from fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub delta_hat: f64,
    pub h: f64,
    pub sup_error: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
}

impl ConvergenceRecord {
    pub fn is_valid(&self) -> bool {
        self.sup_error.is_finite()
    }
}

/// The four label points `(1,0), (-1,0), (0,1), (0,-1)` with their
/// Aronsson values.
pub fn star_labels() -> Vec<(Vec<f64>, f64)> {
    [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
        .iter()
        .map(|p| (p.to_vec(), aronsson(p)))
        .collect()
}

fn default_reference_spacing(domain: &Domain, n: usize) -> f64 {
    let (lo, hi) = domain.bounding_box();
    let volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    (volume / n as f64).powf(1.0 / domain.dim() as f64) / 4.0
}

fn run_trial(config: &StudyConfig, domain: &Domain, n: usize, trial: usize) -> Result<ConvergenceRecord> {
    let start = Instant::now();
    let seed = config.base_seed + trial as u64;
    let cloud = sample_uniform(domain, n, seed)?;
    let spacing = config.reference_spacing.unwrap_or_else(|| default_reference_spacing(domain, n));
    let continuum = star_labels();
    let points: Vec<Vec<f64>> = continuum.iter().map(|(p, _)| p.clone()).collect();

    let closest = match config.constraint_mode {
        ConstraintMode::ClosestPoint => {
            Some(build_constraint_set(&cloud, &continuum, ConstraintMode::ClosestPoint, 0.0, None)?)
        }
        ConstraintMode::Dilated => None,
    };
    let pairing = closest.as_ref().map(|l| LabelPairing { continuum: &points, vertices: &l.indices });
    let delta_hat = estimate_resolution(&cloud, domain, spacing, pairing)?;
    let h = config.c * delta_hat.powf(config.scaling.exponent());
    let graph = build_graph(&cloud, &config.kernel, h)?;
    let labels = match closest {
        Some(l) => l,
        None => build_constraint_set(&cloud, &continuum, ConstraintMode::Dilated, h, Some(&aronsson))?,
    };

    let options = SolverOptions { tol: config.tol, max_iter: config.max_iter, ..SolverOptions::default() };
    let (sup_error, iterations) = match solve_amle_with(&graph, &labels, &options) {
        Ok((u, report)) => {
            if !report.converged {
                log::warn!(
                    "n = {n}, trial {trial}: stopped after {} sweeps at residual {:.3e}",
                    report.iterations,
                    report.final_residual
                );
            }
            let err = (0..n).map(|i| (aronsson(cloud.point(i)) - u[i]).abs()).fold(0.0, f64::max);
            (err, report.iterations)
        }
        Err(Error::Disconnected { vertex, .. }) => {
            log::warn!("n = {n}, trial {trial}: vertex {vertex} cut off from the labels at h = {h}; flagged");
            (f64::NAN, 0)
        }
        Err(e) => return Err(e),
    };
    let wall_time_s = if config.timing { start.elapsed().as_secs_f64() } else { 0.0 };
    log::info!("n = {n}, trial {trial}: delta_hat = {delta_hat:.4}, h = {h:.4}, sup_error = {sup_error:.4e}");
    Ok(ConvergenceRecord { n, trial, seed, delta_hat, h, sup_error, iterations, wall_time_s })
}

/// Runs every `(n, trial)` pair of the study. Trials of one n run in
/// parallel; records come back ordered by n, then trial, and are appended
/// to `config.output` after each n.
pub fn run_convergence_study(config: &StudyConfig) -> Result<Vec<ConvergenceRecord>> {
    config.validate()?;
    let domain = config.domain.build()?;
    let mut writer = match &config.output {
        Some(path) => Some(csv::Writer::from_path(path)?),
        None => None,
    };
    let mut records = Vec::new();
    for &n in &config.n_list {
        let batch: Vec<ConvergenceRecord> = (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, &domain, n, t))
            .collect::<Result<_>>()?;
        if let Some(w) = writer.as_mut() {
            for r in &batch {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        records.extend(batch);
    }
    Ok(records)
}

pub fn write_records(path: &Path, records: &[ConvergenceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ConvergenceRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let expected = ["n", "trial", "seed", "delta_hat", "h", "sup_error", "iterations", "wall_time_s"];
    let headers = reader.headers()?.clone();
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::Format {
            path: Some(path.to_path_buf()),
            reason: format!("expected columns {}", expected.join(",")),
        });
    }
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut c = StudyConfig::star(KernelProfile::singular(), vec![64, 128], 1);
        assert!(c.validate().is_ok());
        c.n_list = vec![128, 64];
        assert!(c.validate().is_err());
        c.n_list = vec![64];
        c.trials = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let json = r#"{"domain":"star","kernel":"power:1","n_list":[256,512],"scaling":"delta_2_3",
            "c":2.0,"constraint_mode":"cp","trials":2,"base_seed":7,"tol":1e-8}"#;
        let c: StudyConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.kernel, KernelProfile::singular());
        assert_eq!(c.scaling, Scaling::DeltaTwoThirds);
        assert!(c.timing);
        let back: StudyConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn small_study_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = StudyConfig::star(KernelProfile::singular(), vec![300], 2);
        c.timing = false;
        c.output = Some(dir.path().join("a.csv"));
        let a = run_convergence_study(&c).unwrap();
        c.output = Some(dir.path().join("b.csv"));
        run_convergence_study(&c).unwrap();
        let (fa, fb) = (std::fs::read(dir.path().join("a.csv")).unwrap(), std::fs::read(dir.path().join("b.csv")).unwrap());
        assert_eq!(fa, fb);
        assert_eq!(read_records(&dir.path().join("a.csv")).unwrap(), a);
        for r in &a {
            assert!((r.h - 2.0 * r.delta_hat.powf(2.0 / 3.0)).abs() < 1e-12);
        }
    }
}
