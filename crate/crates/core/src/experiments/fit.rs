use std::collections::BTreeMap;

use serde::Serialize;

use super::ConvergenceRecord;
use crate::error::{invalid, Error, Result};

/// Ordinary least squares line through log-log data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares fit of `ys` against `xs`. A perfect fit, including a
/// constant `ys`, has `r_squared = 1`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("least squares needs at least two (x, y) pairs"));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("least squares needs at least two distinct x values"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit { slope, intercept, r_squared })
}

/// Per-n means of `(key, sup_error)` over valid records.
fn grouped_means(records: &[ConvergenceRecord], key: impl Fn(&ConvergenceRecord) -> f64) -> Result<Vec<(f64, f64)>> {
    let mut groups: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_valid()) {
        let e = groups.entry(r.n).or_insert((0.0, 0.0, 0));
        e.0 += key(r);
        e.1 += r.sup_error;
        e.2 += 1;
    }
    if groups.len() < 2 {
        return Err(invalid(format!("rate fit needs valid records at two or more n, found {}", groups.len())));
    }
    let means: Vec<(f64, f64)> = groups.values().map(|&(k, e, c)| (k / c as f64, e / c as f64)).collect();
    if let Some(&(_, e)) = means.iter().find(|m| !(m.1 > 0.0)) {
        return Err(Error::Domain(format!("mean error {e} has no logarithm")));
    }
    Ok(means)
}

/// Fits `log(mean sup_error)` against `log n`; the convergence rate is
/// `-slope`. Flagged records are ignored.
pub fn fit_rate(records: &[ConvergenceRecord]) -> Result<RateFit> {
    let means = grouped_means(records, |r| r.n as f64)?;
    let xs: Vec<f64> = means.iter().map(|m| m.0.ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.1.ln()).collect();
    least_squares(&xs, &ys)
}

/// Fits `log(mean sup_error)` against `log(mean delta_hat)` per n.
pub fn fit_rate_against_resolution(records: &[ConvergenceRecord]) -> Result<RateFit> {
    let means = grouped_means(records, |r| r.delta_hat)?;
    let xs: Vec<f64> = means.iter().map(|m| m.0.ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.1.ln()).collect();
    least_squares(&xs, &ys)
}
