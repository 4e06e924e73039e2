#![allow(dead_code)]

use ndarray::Array2;
use proptest::prelude::*;
use toposcore::rips::{BirthDeath, PersistenceDiagram};

/// `n x dim` clouds with coordinates in `[-10, 10]`.
pub fn cloud(
    n: std::ops::RangeInclusive<usize>,
    dim: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = Array2<f64>> {
    (n, dim).prop_flat_map(|(n, d)| {
        prop::collection::vec(-10.0f64..10.0, n * d)
            .prop_map(move |v| Array2::from_shape_vec((n, d), v).unwrap())
    })
}

/// Clouds on a coarse integer lattice: many tied distances and some duplicate points.
pub fn lattice_cloud(
    n: std::ops::RangeInclusive<usize>,
    dim: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = Array2<f64>> {
    (n, dim).prop_flat_map(|(n, d)| {
        prop::collection::vec(0i32..3, n * d).prop_map(move |v| {
            Array2::from_shape_vec((n, d), v.into_iter().map(f64::from).collect()).unwrap()
        })
    })
}

pub fn has_duplicate_rows(points: &Array2<f64>) -> bool {
    let n = points.nrows();
    (0..n).any(|i| (i + 1..n).any(|j| points.row(i) == points.row(j)))
}

pub fn all_pairs(diagrams: &[PersistenceDiagram]) -> Vec<(usize, BirthDeath)> {
    diagrams
        .iter()
        .flat_map(|d| d.pairs.iter().map(move |p| (d.dim, *p)))
        .collect()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}
