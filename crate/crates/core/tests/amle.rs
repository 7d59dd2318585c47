mod common;

use common::{jacobi_bracket, kernels, pair_root, random_instance};
use liplearn::amle::{
    comparison_with_cones_check, inf_laplacian, local_solve, solve_amle, solve_amle_with, Initialization,
    SolverOptions, SweepMode,
};
use liplearn::geometry::LabelSet;
use liplearn::graph::GeometricGraph;
use liplearn::kernel::KernelProfile;
use liplearn::shortest_path::{graph_distance_from, lipschitz_constant, GraphFunction};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

fn balance(w: &[f64], v: &[f64], t: f64) -> f64 {
    let d: Vec<f64> = w.iter().zip(v).map(|(w, v)| w * (v - t)).collect();
    d.iter().copied().fold(f64::INFINITY, f64::min) + d.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Bisection on the decreasing balance function.
fn scalar_root(w: &[f64], v: &[f64]) -> f64 {
    let (mut lo, mut hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(w, v, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn weighted_pair_example() {
    let t = local_solve(&[2.0, 1.0], &[0.0, 1.0]).unwrap();
    assert!((t - 1.0 / 3.0).abs() < 1e-15);
    assert!(balance(&[2.0, 1.0], &[0.0, 1.0], t).abs() < 1e-15);
    assert!((scalar_root(&[2.0, 1.0], &[0.0, 1.0]) - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn laplacian_matches_naive_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut edges = Vec::new();
    for i in 0..20 {
        for j in i + 1..20 {
            if rng.gen::<f64>() < 0.3 {
                edges.push((i, j, rng.gen_range(0.1..5.0)));
            }
        }
    }
    let graph = GeometricGraph::from_edges(20, &edges).unwrap();
    let u = GraphFunction::new((0..20).map(|_| rng.gen_range(-1.0..1.0)).collect());
    for x in 0..20 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(a, b, w) in &edges {
            let y = if a == x { b } else if b == x { a } else { continue };
            lo = lo.min(w * (u[y] - u[x]));
            hi = hi.max(w * (u[y] - u[x]));
        }
        match inf_laplacian(&graph, &u, x) {
            Ok(l) => assert!((l - (lo + hi)).abs() < 1e-14),
            Err(_) => assert!(lo.is_infinite()),
        }
    }
}

#[test]
fn agrees_with_jacobi_oracle() {
    for (k, kernel) in kernels().into_iter().enumerate() {
        let (_, graph, labels) = random_instance(60, 0.3, &kernel, 5, 10 + k as u64);
        let (u, report) = solve_amle(&graph, &labels, TOL, 100_000).unwrap();
        assert!(report.converged && report.final_residual <= TOL);
        let oracle = jacobi_bracket(&graph, &labels, 1e-10, 5_000_000, k as u64);
        assert!(oracle.gap < 1e-10);
        for o in [&oracle.lower, &oracle.upper, &oracle.random] {
            let diff = u.iter().zip(o.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff <= 1e-6, "{kernel}: {diff}");
        }
    }
}

#[test]
fn other_sweeps_and_starts_agree() {
    let (_, graph, labels) = random_instance(200, 0.2, &KernelProfile::power(1.0).unwrap(), 4, 20);
    let (reference, _) = solve_amle(&graph, &labels, TOL, 100_000).unwrap();
    for (init, mode, policy_steps) in [
        (Initialization::Zero, SweepMode::GaussSeidel, true),
        (Initialization::NearestLabel, SweepMode::Jacobi, true),
        (Initialization::NearestLabel, SweepMode::GaussSeidel, false),
    ] {
        let options = SolverOptions { tol: TOL, max_iter: 1_000_000, init, mode, policy_steps };
        let (u, report) = solve_amle_with(&graph, &labels, &options).unwrap();
        assert!(report.converged);
        assert!(u.sup_distance(&reference) <= 1e-6);
    }
}

#[test]
fn residual_history_is_nonincreasing() {
    for (k, kernel) in kernels().into_iter().enumerate() {
        let (_, graph, labels) = random_instance(400, 0.12, &kernel, 4, 30 + k as u64);
        let (_, report) = solve_amle(&graph, &labels, 1e-12, 100_000).unwrap();
        assert!(!report.residual_history.is_empty());
        for w in report.residual_history.windows(2) {
            assert!(w[1] <= w[0], "{kernel}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn comparison_principle_for_ordered_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for k in 0..8 {
        let (_, graph, labels) = random_instance(250, 0.15, &kernels()[k % 4], 5, 40 + k as u64);
        let raised: Vec<f64> = labels.values.iter().map(|v| v + rng.gen_range(0.0..0.5)).collect();
        let higher = LabelSet::new(labels.indices.clone(), raised).unwrap();
        let (u, _) = solve_amle(&graph, &labels, TOL, 100_000).unwrap();
        let (v, _) = solve_amle(&graph, &higher, TOL, 100_000).unwrap();
        assert!(u.iter().zip(v.iter()).all(|(a, b)| *a <= b + 10.0 * TOL));
    }
}

#[test]
fn affine_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for k in 0..8 {
        let (_, graph, labels) = random_instance(250, 0.15, &kernels()[k % 4], 4, 50 + k as u64);
        let (c, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(-2.0..2.0));
        let (u, _) = solve_amle(&graph, &labels, TOL, 100_000).unwrap();
        let (v, _) = solve_amle(&graph, &labels.map_values(|g| c * g + b), TOL, 100_000).unwrap();
        for x in 0..graph.len() {
            assert!((v[x] - (c * u[x] + b)).abs() <= 10.0 * TOL, "vertex {x}");
        }
    }
}

#[test]
fn lipschitz_attained_on_labels() {
    for k in 0..6 {
        let (_, graph, labels) = random_instance(200 + 50 * k, 0.2, &kernels()[k % 4], 3 + k % 3, 60 + k as u64);
        let (u, _) = solve_amle(&graph, &labels, TOL, 100_000).unwrap();
        let all: Vec<usize> = (0..graph.len()).collect();
        let d_min = labels
            .indices
            .iter()
            .map(|&i| {
                let d = graph_distance_from(&graph, i).unwrap();
                labels.indices.iter().filter(|&&j| j != i).map(|&j| d[j]).fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        let on_all = lipschitz_constant(&graph, &u, &all).unwrap();
        let on_labels = lipschitz_constant(&graph, &u, &labels.indices).unwrap();
        assert!((on_all - on_labels).abs() <= 10.0 * TOL / d_min);
    }
}

#[test]
fn cone_comparison_holds_for_solutions_only() {
    let (_, graph, labels) = random_instance(500, 0.12, &KernelProfile::constant(), 5, 70);
    let (u, _) = solve_amle(&graph, &labels, TOL, 100_000).unwrap();
    let ok = comparison_with_cones_check(&graph, &u, &labels, 50, 1).unwrap();
    assert!(ok.max_violation <= 10.0 * TOL);
    // a bump at one free vertex is a strict local maximum; balls around it
    // must expose it
    let mut bumped = u.clone();
    let free = (0..graph.len()).find(|x| !labels.indices.contains(x)).unwrap();
    bumped[free] += 1.0;
    let bad = comparison_with_cones_check(&graph, &bumped, &labels, 200, 1).unwrap();
    assert!(bad.max_violation > 0.1, "{bad:?}");
}

#[test]
fn single_vertex_subset_by_the_local_equation() {
    let (_, graph, labels) = random_instance(150, 0.2, &KernelProfile::exponential(0.5).unwrap(), 3, 80);
    let (u, _) = solve_amle(&graph, &labels, TOL, 100_000).unwrap();
    for x in (0..graph.len()).filter(|x| !labels.indices.contains(x)) {
        let v: Vec<f64> = graph.neighbors(x).iter().map(|&y| u[y]).collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo - TOL <= u[x] && u[x] <= hi + TOL);
    }
}

fn weights_and_values() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..12).prop_flat_map(|k| {
        (prop::collection::vec(1e-3f64..1e3, k), prop::collection::vec(-10.0f64..10.0, k))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn local_solve_within_envelope((w, v) in weights_and_values()) {
        let t = local_solve(&w, &v).unwrap();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= t && t <= hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn local_solve_matches_oracles((w, v) in weights_and_values()) {
        let t = local_solve(&w, &v).unwrap();
        let range = v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min);
        let tol = 1e-12 * (range + 1.0);
        prop_assert!((t - pair_root(&w, &v)).abs() <= tol);
        prop_assert!((t - scalar_root(&w, &v)).abs() <= tol);
    }
}
