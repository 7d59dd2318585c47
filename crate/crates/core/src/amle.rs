//! The graph infinity Laplacian and the Lipschitz learning solver.
//!
//! At an unlabeled vertex `x` the equation reads
//!
//! ```text
//! min_y w_xy (u(y) - u(x)) + max_y w_xy (u(y) - u(x)) = 0
//! ```
//!
//! Solving it for `u(x)` with the neighbor values frozen is a one-dimensional
//! root find on a strictly decreasing piecewise linear function; sweeping that
//! local solve over the unlabeled vertices is the nonlinear Gauss-Seidel
//! iteration used here. With singular kernels nearly coincident vertices are
//! tied together by huge weights and plain sweeps need thousands of passes,
//! so sweeps are interleaved with damped policy steps that solve the
//! linearized equation exactly.

use std::collections::HashSet;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::LabelSet;
use crate::graph::GeometricGraph;
use crate::shortest_path::{dijkstra, nearest_source, GraphFunction};

/// `min_y w_xy (u(y) - u(x)) + max_y w_xy (u(y) - u(x))` over the stored
/// neighbors of `x`.
pub fn inf_laplacian(graph: &GeometricGraph, u: &GraphFunction, x: usize) -> Result<f64> {
    u.check_aligned(graph)?;
    if x >= graph.len() {
        return Err(invalid(format!("vertex {x} out of range")));
    }
    if graph.degree(x) == 0 {
        return Err(Error::IsolatedVertex(x));
    }
    Ok(laplacian_at(graph, u, x))
}

fn laplacian_at(graph: &GeometricGraph, u: &[f64], x: usize) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (y, w) in graph.row(x) {
        let d = w * (u[y] - u[x]);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    lo + hi
}

/// Evaluates `F(t) = min_k w_k (v_k - t) + max_k w_k (v_k - t)` together with
/// the positions attaining the max of `w (v - t)` and of `w (t - v)`, lowest
/// position first on ties.
#[inline]
fn balance(weights: &[f64], value: &impl Fn(usize) -> f64, t: f64) -> (f64, usize, usize) {
    let (mut up, mut up_k) = (f64::NEG_INFINITY, 0);
    let (mut down, mut down_k) = (f64::NEG_INFINITY, 0);
    for (k, &w) in weights.iter().enumerate() {
        let diff = value(k) - t;
        let a = w * diff;
        if a > up {
            up = a;
            up_k = k;
        }
        if -a > down {
            down = -a;
            down_k = k;
        }
    }
    (up - down, up_k, down_k)
}

/// Root of `F` inside `[min v, max v]`, starting from `guess`.
///
/// Below the root the upper envelope `max_k w_k (v_k - t)` dominates its
/// active line `i`, so the crossing of that line with the lower envelope,
/// `min_j (w_i v_i + w_j v_j) / (w_i + w_j)`, never overshoots. Repeating
/// with the new active line climbs to the root in finitely many steps; above
/// the root the mirrored step descends. Bisection with a closed-form polish
/// is kept as a fallback should rounding stall the steps.
fn solve_local(weights: &[f64], value: impl Fn(usize) -> f64, guess: f64) -> f64 {
    let m = weights.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut w_max: f64 = 0.0;
    for k in 0..m {
        let v = value(k);
        lo = lo.min(v);
        hi = hi.max(v);
        w_max = w_max.max(weights[k]);
    }
    if lo == hi {
        return lo;
    }
    let range = hi - lo;
    let f_tol = 1e-12 * w_max * (range + 1.0);
    let pair_root = |i: usize, j: usize| {
        let (wi, wj) = (weights[i], weights[j]);
        (wi * value(i) + wj * value(j)) / (wi + wj)
    };

    let mut t = if guess > lo && guess < hi { guess } else { lo };
    let (f, mut i, mut j) = balance(weights, &value, t);
    if f == 0.0 {
        return t;
    }
    let ascending = f > 0.0;
    for _ in 0..=m {
        let next = if ascending {
            (0..m).map(|k| pair_root(i, k)).fold(f64::INFINITY, f64::min)
        } else {
            (0..m).map(|k| pair_root(k, j)).fold(f64::NEG_INFINITY, f64::max)
        };
        let moved = if ascending { next > t } else { next < t };
        if !moved {
            break;
        }
        t = next.clamp(lo, hi);
        let (f, i2, j2) = balance(weights, &value, t);
        let same = if ascending { i2 == i } else { j2 == j };
        if f == 0.0 || same || (f > 0.0) != ascending {
            break;
        }
        (i, j) = (i2, j2);
    }
    if balance(weights, &value, t).0.abs() <= f_tol {
        return t;
    }
    bisect(weights, &value, lo, hi, range)
}

fn bisect(weights: &[f64], value: &impl Fn(usize) -> f64, mut lo: f64, mut hi: f64, range: f64) -> f64 {
    let width_tol = 1e-13 * (range + 1.0);
    while hi - lo > width_tol {
        let mid = 0.5 * (lo + hi);
        let (f, _, _) = balance(weights, value, mid);
        if f == 0.0 {
            return mid;
        }
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let (f_mid, i, j) = balance(weights, value, mid);
    let (wi, wj) = (weights[i], weights[j]);
    let polished = (wi * value(i) + wj * value(j)) / (wi + wj);
    if (lo..=hi).contains(&polished) && balance(weights, value, polished).0.abs() <= f_mid.abs() {
        polished
    } else {
        mid
    }
}

/// The unique `t` with `min_k w_k (v_k - t) + max_k w_k (v_k - t) = 0`.
pub fn local_solve(neighbor_weights: &[f64], neighbor_values: &[f64]) -> Result<f64> {
    if neighbor_weights.is_empty() {
        return Err(invalid("local solve needs at least one neighbor"));
    }
    if neighbor_weights.len() != neighbor_values.len() {
        return Err(invalid("neighbor weights and values differ in length"));
    }
    if neighbor_weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(invalid("neighbor weights must be positive and finite"));
    }
    if neighbor_values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("neighbor values must be finite"));
    }
    Ok(solve_local(neighbor_weights, |k| neighbor_values[k], f64::NAN))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Initialization {
    /// Each vertex starts at the value of its nearest label in graph distance.
    #[default]
    NearestLabel,
    /// Unlabeled vertices start at zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SweepMode {
    /// In-place sweeps in vertex index order.
    #[default]
    GaussSeidel,
    /// Double-buffered sweeps, parallel over vertices.
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub init: Initialization,
    pub mode: SweepMode,
    /// Interleave policy steps with the Gauss-Seidel sweeps (see
    /// [`policy_candidate`]). A step is kept only if it lowers the residual.
    pub policy_steps: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100_000,
            init: Initialization::NearestLabel,
            mode: SweepMode::GaussSeidel,
            policy_steps: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Largest `|L u(x)|` over unlabeled vertices divided by `label range + 1`.
    pub final_residual: f64,
    pub converged: bool,
    /// Seconds.
    pub wall_time: f64,
    /// Normalized residual after each sweep.
    #[serde(skip)]
    pub residual_history: Vec<f64>,
}

/// Largest `|L u(x)|` over unlabeled vertices, normalized by
/// `max g - min g + 1`.
pub fn normalized_residual(graph: &GeometricGraph, u: &GraphFunction, labels: &LabelSet) -> Result<f64> {
    u.check_aligned(graph)?;
    let labeled = label_mask(graph.len(), labels)?;
    Ok(residual_raw(graph, u, &labeled) / label_scale(labels))
}

fn residual_raw(graph: &GeometricGraph, u: &[f64], labeled: &[bool]) -> f64 {
    (0..graph.len())
        .into_par_iter()
        .filter(|&x| !labeled[x] && graph.degree(x) > 0)
        .map(|x| laplacian_at(graph, u, x).abs())
        .reduce(|| 0.0, f64::max)
}

fn label_scale(labels: &LabelSet) -> f64 {
    let (lo, hi) = labels.value_range();
    hi - lo + 1.0
}

fn label_mask(n: usize, labels: &LabelSet) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &i in &labels.indices {
        if i >= n {
            return Err(invalid(format!("label index {i} out of range for {n} vertices")));
        }
        mask[i] = true;
    }
    Ok(mask)
}

/// Solves the graph infinity-Laplace equation with `u = g` on the labels,
/// using Gauss-Seidel sweeps from the nearest-label initialization.
pub fn solve_amle(
    graph: &GeometricGraph,
    labels: &LabelSet,
    tol: f64,
    max_iter: usize,
) -> Result<(GraphFunction, SolveReport)> {
    solve_amle_with(graph, labels, &SolverOptions { tol, max_iter, ..SolverOptions::default() })
}

pub fn solve_amle_with(
    graph: &GeometricGraph,
    labels: &LabelSet,
    options: &SolverOptions,
) -> Result<(GraphFunction, SolveReport)> {
    let start = Instant::now();
    if !(options.tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {}", options.tol)));
    }
    if options.max_iter == 0 {
        return Err(invalid("max_iter must be positive"));
    }
    if labels.is_empty() {
        return Err(Error::Empty("label set".into()));
    }
    let n = graph.len();
    let labeled = label_mask(n, labels)?;

    let (dist, origin) = nearest_source(graph, &labels.indices)?;
    if let Some(v) = dist.iter().position(|d| !d.is_finite()) {
        return Err(Error::Disconnected { vertex: v, target: "any labeled vertex" });
    }
    let mut u: Vec<f64> = match options.init {
        Initialization::NearestLabel => origin.iter().map(|&k| labels.values[k]).collect(),
        Initialization::Zero => vec![0.0; n],
    };
    for (i, g) in labels.iter() {
        u[i] = g;
    }

    let scale = label_scale(labels);
    let threshold = options.tol * scale;
    let free: Vec<usize> = (0..n).filter(|&x| !labeled[x]).collect();
    let mut history = Vec::new();
    let mut residual = residual_raw(graph, &u, &labeled);
    let mut iterations = 0;
    let mut scratch = u.clone();
    let (mut policy_wait, mut policy_backoff) = (0usize, 1usize);
    while residual > threshold && iterations < options.max_iter {
        residual = match options.mode {
            SweepMode::GaussSeidel => {
                let before = options.policy_steps.then(|| u.clone());
                for &x in &free {
                    let nbrs = graph.neighbors(x);
                    let t = solve_local(graph.weights(x), |k| u[nbrs[k]], u[x]);
                    u[x] = t;
                }
                let mut r = residual_raw(graph, &u, &labeled);
                if let Some(before) = before.filter(|_| r > threshold) {
                    if policy_wait == 0 {
                        match damped_policy_step(graph, &u, &labeled, r) {
                            Some((v, rv)) => {
                                (u, r) = (v, rv);
                                policy_backoff = 1;
                            }
                            None => policy_backoff = (2 * policy_backoff).min(MAX_POLICY_BACKOFF),
                        }
                        policy_wait = policy_backoff;
                    }
                    policy_wait -= 1;
                    if r > residual {
                        // the sweep undid progress; retry the policy step from before it
                        if let Some((v, rv)) = damped_policy_step(graph, &before, &labeled, residual) {
                            (u, r) = (v, rv);
                        } else {
                            log::warn!("sweep {}: residual rose from {:.3e} to {:.3e}", iterations + 1, residual / scale, r / scale);
                        }
                    }
                }
                r
            }
            SweepMode::Jacobi => {
                let current = &u;
                scratch.par_iter_mut().enumerate().for_each(|(x, slot)| {
                    if labeled[x] {
                        *slot = current[x];
                    } else {
                        let nbrs = graph.neighbors(x);
                        *slot = solve_local(graph.weights(x), |k| current[nbrs[k]], current[x]);
                    }
                });
                std::mem::swap(&mut u, &mut scratch);
                residual_raw(graph, &u, &labeled)
            }
        };
        iterations += 1;
        history.push(residual / scale);
        log::trace!("sweep {iterations}: residual {:.3e}", residual / scale);
    }
    let report = SolveReport {
        iterations,
        final_residual: residual / scale,
        converged: residual <= threshold,
        wall_time: start.elapsed().as_secs_f64(),
        residual_history: history,
    };
    Ok((GraphFunction::new(u), report))
}

const MAX_POLICY_BACKOFF: usize = 32;
const MIN_POLICY_DAMPING: f64 = 1.0 / 64.0;

/// Moves from `u` toward its policy candidate by the largest fraction in
/// `1, 1/2, ..., 1/64` whose residual is below `target`.
fn damped_policy_step(graph: &GeometricGraph, u: &[f64], labeled: &[bool], target: f64) -> Option<(Vec<f64>, f64)> {
    let full = policy_candidate(graph, u, labeled);
    let mut theta = 1.0;
    while theta >= MIN_POLICY_DAMPING {
        let v: Vec<f64> = if theta == 1.0 {
            full.clone()
        } else {
            u.iter().zip(&full).map(|(a, b)| a + theta * (b - a)).collect()
        };
        let r = residual_raw(graph, &v, labeled);
        if r < target {
            log::trace!("policy step accepted at damping {theta}");
            return Some((v, r));
        }
        theta *= 0.5;
    }
    None
}
const MAX_DENSE_BLOCK: usize = 400;

/// One policy (semismooth Newton) step from `u`.
///
/// Freezing the maximizing and minimizing neighbors `i(x)`, `j(x)` of every
/// unlabeled vertex turns the equation into the linear system
/// `(w_i + w_j) u(x) = w_i u(i) + w_j u(j)`. Its dependency graph is split
/// into strongly connected components, which are solved exactly in
/// dependency order. Components with no outside dependency (singular) or
/// more than a few hundred vertices keep their current values.
///
/// Pairs of nearly coincident vertices couple through very large weights and
/// make plain sweeps crawl; the exact component solves remove that stiffness.
pub fn policy_candidate(graph: &GeometricGraph, u: &[f64], labeled: &[bool]) -> Vec<f64> {
    let n = graph.len();
    let mut policy = vec![None; n];
    let mut deps: DiGraph<(), ()> = DiGraph::with_capacity(n, 2 * n);
    for _ in 0..n {
        deps.add_node(());
    }
    for x in (0..n).filter(|&x| !labeled[x] && graph.degree(x) > 0) {
        let (mut up, mut up_k) = (f64::NEG_INFINITY, 0);
        let (mut down, mut down_k) = (f64::NEG_INFINITY, 0);
        for (k, (y, w)) in graph.row(x).enumerate() {
            let a = w * (u[y] - u[x]);
            if a > up {
                up = a;
                up_k = k;
            }
            if -a > down {
                down = -a;
                down_k = k;
            }
        }
        let (nbrs, ws) = (graph.neighbors(x), graph.weights(x));
        let pair = [(nbrs[up_k], ws[up_k]), (nbrs[down_k], ws[down_k])];
        deps.add_edge(NodeIndex::new(x), NodeIndex::new(pair[0].0), ());
        deps.add_edge(NodeIndex::new(x), NodeIndex::new(pair[1].0), ());
        policy[x] = Some(pair);
    }

    let mut out = u.to_vec();
    let mut slot = vec![usize::MAX; n];
    let (mut largest, mut closed, mut multi) = (0, 0, 0);
    // tarjan_scc lists components dependencies first
    for comp in tarjan_scc(&deps) {
        let members: Vec<usize> = comp.iter().map(|v| v.index()).collect();
        if members.len() == 1 {
            let x = members[0];
            if let Some([(i, wi), (j, wj)]) = policy[x] {
                out[x] = (wi * out[i] + wj * out[j]) / (wi + wj);
            }
            continue;
        }
        let k = members.len();
        largest = largest.max(k);
        multi += 1;
        if k > MAX_DENSE_BLOCK {
            log::debug!("policy step: component of {k} vertices left unchanged");
            continue;
        }
        for (r, &x) in members.iter().enumerate() {
            slot[x] = r;
        }
        let mut a = DMatrix::<f64>::zeros(k, k);
        let mut b = DVector::<f64>::zeros(k);
        let mut has_exit = false;
        for (r, &x) in members.iter().enumerate() {
            let pair = policy[x].expect("members of a multi-vertex component are unlabeled");
            for (y, w) in pair {
                a[(r, r)] += w;
                if slot[y] != usize::MAX {
                    a[(r, slot[y])] -= w;
                } else {
                    b[r] += w * out[y];
                    has_exit = true;
                }
            }
        }
        if !has_exit {
            closed += 1;
        }
        if has_exit {
            if let Some(sol) = a.lu().solve(&b) {
                for (r, &x) in members.iter().enumerate() {
                    out[x] = sol[r];
                }
            }
        }
        for &x in &members {
            slot[x] = usize::MAX;
        }
    }
    log::debug!("policy step: {multi} multi-vertex components, largest {largest}, closed {closed}");
    out
}

/// Summary of [`comparison_with_cones_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeComparison {
    /// Largest amount by which a maximum over the closure exceeded the
    /// maximum over the boundary (or the mirrored minimum statement).
    pub max_violation: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Tests comparison with graph cones on random `(a, z, X')` triples.
///
/// `X'` ranges over subsets of unlabeled vertices not containing the apex
/// `z`: graph balls on even trials, Bernoulli subsets on odd ones. For each
/// triple the excess of `max (u - a d(., z))` over the closure of `X'` above
/// its maximum over the boundary is recorded, and likewise for
/// `min (u + a d(., z))`. Trial 0 uses `a = 0`. Triples whose boundary is
/// empty are skipped.
pub fn comparison_with_cones_check(
    graph: &GeometricGraph,
    u: &GraphFunction,
    labels: &LabelSet,
    trials: usize,
    seed: u64,
) -> Result<ConeComparison> {
    u.check_aligned(graph)?;
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let n = graph.len();
    let labeled = label_mask(n, labels)?;
    let free: Vec<usize> = (0..n).filter(|&x| !labeled[x]).collect();
    if free.is_empty() {
        return Err(Error::Empty("unlabeled vertex set".into()));
    }
    let slope = graph
        .edges()
        .map(|(i, j, w)| w * (u[i] - u[j]).abs())
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut result = ConeComparison { max_violation: 0.0, evaluated: 0, skipped: 0 };
    for trial in 0..trials {
        let a = if trial == 0 { 0.0 } else { rng.gen_range(0.0..=2.0 * slope) };
        let z = rng.gen_range(0..n);
        let subset: HashSet<usize> = if trial % 2 == 0 {
            let center = free[rng.gen_range(0..free.len())];
            let (d, _) = dijkstra(graph, &[center], None);
            let finite: Vec<f64> = d.iter().copied().filter(|v| v.is_finite()).collect();
            let reach = finite.iter().copied().fold(0.0, f64::max);
            let radius = rng.gen_range(0.0..=reach);
            free.iter().copied().filter(|&v| v != z && d[v] <= radius).collect()
        } else {
            let p: f64 = rng.gen_range(0.05..0.95);
            free.iter().copied().filter(|&v| v != z && rng.gen::<f64>() < p).collect()
        };
        if subset.is_empty() {
            log::debug!("cone check trial {trial}: empty subset, skipped");
            result.skipped += 1;
            continue;
        }
        let mut boundary: Vec<usize> = subset
            .iter()
            .flat_map(|&x| graph.neighbors(x).iter().copied())
            .filter(|y| !subset.contains(y))
            .collect();
        boundary.sort_unstable();
        boundary.dedup();
        if boundary.is_empty() {
            log::info!("cone check trial {trial}: subset has empty boundary, skipped");
            result.skipped += 1;
            continue;
        }
        let (cone, _) = dijkstra(graph, &[z], None);
        let scaled = |v: usize| if a == 0.0 { 0.0 } else { a * cone[v] };
        let above = |v: usize| u[v] - scaled(v);
        let below = |v: usize| u[v] + scaled(v);

        let max_bd = boundary.iter().map(|&v| above(v)).fold(f64::NEG_INFINITY, f64::max);
        let min_bd = boundary.iter().map(|&v| below(v)).fold(f64::INFINITY, f64::min);
        let max_in = subset.iter().map(|&v| above(v)).fold(f64::NEG_INFINITY, f64::max);
        let min_in = subset.iter().map(|&v| below(v)).fold(f64::INFINITY, f64::min);
        let violation = (max_in - max_bd).max(min_bd - min_in).max(0.0);
        result.max_violation = result.max_violation.max(violation);
        result.evaluated += 1;
    }
    Ok(result)
}
