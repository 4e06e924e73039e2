//! Comparison scores: neighborhood dimensionality (ALID), Gaussian-fit distance (AMS),
//! and two clustering validity indices (silhouette and Davies-Bouldin).
//!
//! ALID and AMS are per-class "mean over max" statistics in `(0, 1]`; the dataset value is
//! the unweighted class mean. Silhouette and Davies-Bouldin operate on the whole labeled
//! cloud. All four are oriented so that lower means more compact.

mod alid;
mod ams;
mod clustering;
mod linalg;

pub use alid::{alid_class, alid_dataset, alid_from_distances, alid_point, DEFAULT_ALID_K};
pub use ams::{ams_class, ams_dataset, ams_fit, ams_point, GaussianFit, Ridge};
pub use clustering::{davies_bouldin, silhouette_adjusted};

use crate::error::{Error, Result};

/// `mean / max` of non-negative per-point values.
pub(crate) fn mean_over_max(values: &[f64]) -> Result<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    if values.is_empty() || max <= 0.0 {
        return Err(Error::DegenerateClass("every per-point value is zero"));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(mean / max)
}
