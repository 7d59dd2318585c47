//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solver or shortest-path code it is used to check.
#![allow(dead_code)]

use liplearn::geometry::{sample_uniform, Domain, LabelSet, PointCloud};
use liplearn::graph::{build_graph, GeometricGraph};
use liplearn::kernel::KernelProfile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Root of `min_k w_k (v_k - t) + max_k w_k (v_k - t) = 0`, written as
/// `max_i min_j (w_i v_i + w_j v_j) / (w_i + w_j)`.
pub fn pair_root(w: &[f64], v: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..w.len() {
        let mut worst = f64::INFINITY;
        for j in 0..w.len() {
            worst = worst.min((w[i] * v[i] + w[j] * v[j]) / (w[i] + w[j]));
        }
        best = best.max(worst);
    }
    best
}

/// Plain Bellman-Ford with edge lengths `1 / w`.
pub fn bellman_ford(n: usize, edges: &[(usize, usize, f64)], source: usize) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; n];
    d[source] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for &(a, b, w) in edges {
            let l = 1.0 / w;
            for (x, y) in [(a, b), (b, a)] {
                if d[x] + l < d[y] {
                    d[y] = d[x] + l;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    d
}

/// All pairs within distance `h`, checked one by one.
pub fn brute_force_edges(cloud: &PointCloud, kernel: &KernelProfile, h: f64) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for i in 0..cloud.len() {
        for j in i + 1..cloud.len() {
            let r = dist(cloud.point(i), cloud.point(j));
            if r > 0.0 && r <= h {
                out.push((i, j, kernel.edge_weight(h, r).unwrap()));
            }
        }
    }
    out
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn is_connected(graph: &GeometricGraph) -> bool {
    let mut seen = vec![false; graph.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &y in graph.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Jacobi iteration of the pair formula from three starts: the largest
/// label (a supersolution), the smallest (a subsolution) and a random
/// start. The operator is monotone, so the first two bracket every fixed
/// point; iteration stops once the bracket is narrower than `gap`.
pub struct JacobiBracket {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub random: Vec<f64>,
    pub sweeps: usize,
    pub gap: f64,
}

pub fn jacobi_bracket(graph: &GeometricGraph, labels: &LabelSet, gap: f64, max_sweeps: usize, seed: u64) -> JacobiBracket {
    let n = graph.len();
    let (lo, hi) = labels.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, v)| (a.min(v), b.max(v)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fixed = vec![None; n];
    for (i, v) in labels.iter() {
        fixed[i] = Some(v);
    }
    let start = |c: f64| -> Vec<f64> { (0..n).map(|x| fixed[x].unwrap_or(c)).collect() };
    let mut lower = start(lo);
    let mut upper = start(hi);
    let mut random: Vec<f64> = (0..n).map(|x| fixed[x].unwrap_or_else(|| rng.gen_range(lo..=hi))).collect();
    let step = |u: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|x| match fixed[x] {
                Some(v) => v,
                None => {
                    let v: Vec<f64> = graph.neighbors(x).iter().map(|&y| u[y]).collect();
                    pair_root(graph.weights(x), &v)
                }
            })
            .collect()
    };
    let mut sweeps = 0;
    let mut width = f64::INFINITY;
    while sweeps < max_sweeps {
        lower = step(&lower);
        upper = step(&upper);
        random = step(&random);
        sweeps += 1;
        width = lower.iter().zip(&upper).map(|(a, b)| b - a).fold(0.0, f64::max);
        if width < gap {
            break;
        }
    }
    JacobiBracket { lower, upper, random, sweeps, gap: width }
}

/// A connected random instance on the unit square with `k` labels drawn at
/// random vertices with values in `[-1, 1]`.
pub fn random_instance(n: usize, h: f64, kernel: &KernelProfile, k: usize, seed: u64) -> (PointCloud, GeometricGraph, LabelSet) {
    let domain = Domain::unit_cube(2);
    let mut s = seed;
    loop {
        let cloud = sample_uniform(&domain, n, s).unwrap();
        let graph = build_graph(&cloud, kernel, h).unwrap();
        if is_connected(&graph) {
            let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x5eed);
            let mut idx: Vec<usize> = Vec::new();
            while idx.len() < k {
                let i = rng.gen_range(0..n);
                if !idx.contains(&i) {
                    idx.push(i);
                }
            }
            let values = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            return (cloud, graph, LabelSet::new(idx, values).unwrap());
        }
        s += 1_000_003;
    }
}

pub fn kernels() -> Vec<KernelProfile> {
    vec![
        KernelProfile::constant(),
        KernelProfile::exponential(0.5).unwrap(),
        KernelProfile::power(0.5).unwrap(),
        KernelProfile::power(1.0).unwrap(),
    ]
}
