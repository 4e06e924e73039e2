//! The optimized engine against the reference reduction, plus metric invariances.

mod common;

use common::{all_pairs, close, cloud, has_duplicate_rows, lattice_cloud};
use ndarray::{Array1, Array2, Axis};
use proptest::prelude::*;
use toposcore::rips::{
    h0_persistence, naive_reduction_oracle, pairwise_distances, rips_persistence, DistanceMatrix,
};

fn diagrams(points: &Array2<f64>) -> Vec<toposcore::rips::PersistenceDiagram> {
    rips_persistence(&pairwise_distances(points.view()), 1).unwrap()
}

/// Prim's algorithm on the dense matrix.
fn mst_weight(dm: &DistanceMatrix) -> f64 {
    let n = dm.len();
    let mut best = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !done[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        done[u] = true;
        total += best[u];
        for v in 0..n {
            if !done[v] {
                best[v] = best[v].min(dm.get(u, v));
            }
        }
    }
    total
}

/// A random rotation from Gram-Schmidt on a seeded matrix.
fn rotation(dim: usize, seed: &[f64]) -> Array2<f64> {
    let mut q = Array2::<f64>::zeros((dim, dim));
    for i in 0..dim {
        let mut v = Array1::from_iter(
            (0..dim).map(|j| seed[(i * dim + j) % seed.len()] + (i == j) as u8 as f64),
        );
        for k in 0..i {
            let proj = v.dot(&q.row(k));
            v = &v - &(&q.row(k) * proj);
        }
        let norm = v.dot(&v).sqrt();
        q.row_mut(i).assign(&(v / norm));
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn engine_matches_oracle(points in cloud(3..=12, 2..=8)) {
        let dm = pairwise_distances(points.view());
        prop_assert_eq!(rips_persistence(&dm, 1).unwrap(), naive_reduction_oracle(&dm, 1).unwrap());
    }

    #[test]
    fn engine_matches_oracle_with_ties(points in lattice_cloud(3..=12, 2..=4)) {
        let dm = pairwise_distances(points.view());
        prop_assert_eq!(rips_persistence(&dm, 1).unwrap(), naive_reduction_oracle(&dm, 1).unwrap());
        prop_assert_eq!(rips_persistence(&dm, 0).unwrap(), naive_reduction_oracle(&dm, 0).unwrap());
    }

    #[test]
    fn permutation_invariant(points in cloud(3..=12, 2..=5), key in prop::collection::vec(any::<u32>(), 12)) {
        let mut order: Vec<usize> = (0..points.nrows()).collect();
        order.sort_by_key(|&i| (key[i], i));
        let permuted = points.select(Axis(0), &order);
        prop_assert_eq!(diagrams(&points), diagrams(&permuted));
    }

    #[test]
    fn power_of_two_scaling_is_exact(points in cloud(3..=12, 2..=5), e in -8i32..8) {
        let c = 2f64.powi(e);
        let scaled = diagrams(&(&points * c));
        let base = diagrams(&points);
        for (s, b) in scaled.iter().zip(&base) {
            prop_assert_eq!(s.pairs.len(), b.pairs.len());
            for (x, y) in s.pairs.iter().zip(&b.pairs) {
                prop_assert_eq!(x.birth, y.birth * c);
                prop_assert_eq!(x.death, y.death * c);
            }
        }
    }

    #[test]
    fn isometry_invariant(points in cloud(3..=10, 2..=5), seed in prop::collection::vec(-1.0f64..1.0, 25), shift in -50.0f64..50.0) {
        let q = rotation(points.ncols(), &seed);
        let moved = points.dot(&q.t()) + shift;
        let a = all_pairs(&diagrams(&points));
        let b = all_pairs(&diagrams(&moved));
        prop_assert_eq!(a.len(), b.len());
        for ((da, pa), (db, pb)) in a.iter().zip(&b) {
            prop_assert_eq!(da, db);
            prop_assert!(close(pa.birth, pb.birth, 1e-9) || (pa.birth == 0.0 && pb.birth == 0.0));
            prop_assert!(close(pa.death, pb.death, 1e-9));
        }
    }

    #[test]
    fn h0_is_the_spanning_tree(points in cloud(2..=40, 1..=6)) {
        prop_assume!(!has_duplicate_rows(&points));
        let dm = pairwise_distances(points.view());
        let h0 = h0_persistence(&dm).unwrap();
        prop_assert_eq!(h0.len(), points.nrows() - 1);
        prop_assert!(h0.pairs.iter().all(|p| p.birth == 0.0 && p.death > 0.0));
        let total: f64 = h0.pairs.iter().map(|p| p.death).sum();
        prop_assert!(close(total, mst_weight(&dm), 1e-12));
    }

    #[test]
    fn h1_dies_by_enclosing_radius(points in cloud(3..=30, 2..=4)) {
        let dm = pairwise_distances(points.view());
        let radius = dm.enclosing_radius();
        let d = rips_persistence(&dm, 1).unwrap();
        prop_assert!(d[1].pairs.iter().all(|p| p.birth < p.death && p.death <= radius));
    }
}
