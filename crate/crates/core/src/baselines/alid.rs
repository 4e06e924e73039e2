//! Adjusted local intrinsic dimensionality.
//!
//! For a point with k nearest in-class neighbor distances `r_1..r_k` and `r_k` the largest,
//!
//! ```text
//! ALID(x) = r_k * ( -(1/k) * sum_i ln(r_i / r_k) )
//! ```
//!
//! This is the maximum-likelihood LID estimator's inner sum, multiplied by `r_k` rather
//! than inverted, so it carries units of distance. The class score divides the mean
//! over the class by its maximum, which cancels those units.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::mean_over_max;
use crate::error::{Error, Result};
use crate::psf::{collect_per_class, mean_of_classes};
use crate::rips::{pairwise_distances, DistanceMatrix};

pub const DEFAULT_ALID_K: usize = 10;

/// ALID from the k neighbor distances of one point (any order).
pub fn alid_from_distances(neighbors: &[f64]) -> Result<f64> {
    let k = neighbors.len();
    if k == 0 {
        return Err(Error::Config("ALID needs k >= 1".into()));
    }
    let r_k = neighbors.iter().copied().fold(0.0, f64::max);
    if r_k <= 0.0 {
        return Err(Error::DegenerateNeighborhood {
            index: 0,
            reason: "all k neighbors coincide with the point",
        });
    }
    if neighbors.iter().any(|&r| r <= 0.0) {
        return Err(Error::DegenerateNeighborhood {
            index: 0,
            reason: "a neighbor coincides with the point",
        });
    }
    let log_sum: f64 = neighbors.iter().map(|&r| (r / r_k).ln()).sum();
    Ok(r_k * (-log_sum / k as f64))
}

fn k_nearest(dm: &DistanceMatrix, j: usize, k: usize) -> Vec<f64> {
    let mut others: Vec<f64> = dm
        .row(j)
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, &d)| d)
        .collect();
    others.select_nth_unstable_by(k - 1, f64::total_cmp);
    others.truncate(k);
    others
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("ALID needs k >= 1".into()));
    }
    if n < k + 1 {
        return Err(Error::TooFewPoints {
            needed: k + 1,
            got: n,
        });
    }
    Ok(())
}

fn alid_at(dm: &DistanceMatrix, j: usize, k: usize) -> Result<f64> {
    alid_from_distances(&k_nearest(dm, j, k)).map_err(|e| match e {
        Error::DegenerateNeighborhood { reason, .. } => {
            Error::DegenerateNeighborhood { index: j, reason }
        }
        other => other,
    })
}

/// ALID of row `j` within `class_points`, the point itself excluded from its neighbors.
pub fn alid_point(j: usize, class_points: ArrayView2<'_, f64>, k: usize) -> Result<f64> {
    check_k(class_points.nrows(), k)?;
    if j >= class_points.nrows() {
        return Err(Error::Dim {
            expected: class_points.nrows(),
            got: j,
        });
    }
    alid_at(&pairwise_distances(class_points), j, k)
}

/// Mean over max of the per-point ALID values of one class.
pub fn alid_class(class_points: ArrayView2<'_, f64>, k: usize) -> Result<f64> {
    check_k(class_points.nrows(), k)?;
    let dm = pairwise_distances(class_points);
    let values: Vec<f64> = (0..dm.len())
        .into_par_iter()
        .map(|j| alid_at(&dm, j, k))
        .collect::<Result<_>>()?;
    mean_over_max(&values)
}

pub(crate) fn alid_per_class(
    partitions: &BTreeMap<u32, Array2<f64>>,
    k: usize,
) -> Result<BTreeMap<u32, f64>> {
    collect_per_class(partitions, |pts| alid_class(pts, k))
}

/// Unweighted mean of [`alid_class`] over classes.
pub fn alid_dataset(partitions: &BTreeMap<u32, Array2<f64>>, k: usize) -> Result<f64> {
    mean_of_classes(&alid_per_class(partitions, k)?)
}
