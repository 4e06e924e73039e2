//! Adjusted Mahalanobis score.
//!
//! Each class is fitted with its empirical mean and biased (1/N) covariance; a point's
//! score is its squared Mahalanobis distance to the class mean. Class embeddings usually
//! have fewer samples than dimensions, so a ridge `eps * I` is added before factoring.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::Cholesky;
use super::mean_over_max;
use crate::error::{Error, Result};
use crate::psf::{collect_per_class, mean_of_classes};

/// How the diagonal regularizer is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ridge {
    /// Use this value as-is.
    Absolute(f64),
    /// Multiply the mean per-dimension variance `trace(V) / dim` by this factor.
    TraceScaled(f64),
}

impl Default for Ridge {
    fn default() -> Self {
        Ridge::TraceScaled(1e-6)
    }
}

impl Ridge {
    fn resolve(self, covariance: &Array2<f64>) -> Result<f64> {
        let eps = match self {
            Ridge::Absolute(e) => e,
            Ridge::TraceScaled(f) => f * covariance.diag().sum() / covariance.nrows() as f64,
        };
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::Config(format!(
                "ridge must be finite and >= 0, got {eps}"
            )));
        }
        Ok(eps)
    }
}

/// Class mean, covariance and the factor of `covariance + epsilon * I`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    mean: Array1<f64>,
    covariance: Array2<f64>,
    epsilon: f64,
    factor: Cholesky,
}

impl GaussianFit {
    pub fn mean(&self) -> ArrayView1<'_, f64> {
        self.mean.view()
    }

    /// The unregularized biased covariance.
    pub fn covariance(&self) -> ArrayView2<'_, f64> {
        self.covariance.view()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

fn moments(points: ArrayView2<'_, f64>) -> (Array1<f64>, Array2<f64>) {
    let n = points.nrows() as f64;
    let mean = points.mean_axis(Axis(0)).expect("non-empty");
    let centered = &points - &mean;
    let cov = centered.t().dot(&centered) / n;
    (mean, cov)
}

fn fit_with(points: ArrayView2<'_, f64>, ridge: Ridge) -> Result<GaussianFit> {
    if points.nrows() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.nrows(),
        });
    }
    let (mean, covariance) = moments(points);
    let epsilon = ridge.resolve(&covariance)?;
    let mut regularized = covariance.clone();
    regularized.diag_mut().mapv_inplace(|v| v + epsilon);
    let factor = Cholesky::factor(regularized.view())?;
    Ok(GaussianFit {
        mean,
        covariance,
        epsilon,
        factor,
    })
}

/// Fits mean and biased covariance, factoring `V + epsilon * I`.
pub fn ams_fit(class_points: ArrayView2<'_, f64>, epsilon: f64) -> Result<GaussianFit> {
    fit_with(class_points, Ridge::Absolute(epsilon))
}

/// `(x - mean)^T (V + epsilon I)^{-1} (x - mean)` via the Cholesky factor.
pub fn ams_point(x: ArrayView1<'_, f64>, fit: &GaussianFit) -> Result<f64> {
    if x.len() != fit.dim() {
        return Err(Error::Dim {
            expected: fit.dim(),
            got: x.len(),
        });
    }
    let diff = &x - &fit.mean;
    Ok(fit.factor.inverse_quadratic_form(diff.view()))
}

/// Mean over max of the per-point scores within one class.
pub fn ams_class(class_points: ArrayView2<'_, f64>, ridge: Ridge) -> Result<f64> {
    if class_points.nrows() >= 1 {
        let first = class_points.row(0);
        if class_points.rows().into_iter().all(|r| r == first) {
            return Err(Error::DegenerateClass("all points are identical"));
        }
    }
    let fit = fit_with(class_points, ridge)?;
    let rows: Vec<ArrayView1<'_, f64>> = class_points.rows().into_iter().collect();
    let values: Vec<f64> = rows
        .par_iter()
        .map(|r| ams_point(*r, &fit))
        .collect::<Result<_>>()?;
    mean_over_max(&values)
}

pub(crate) fn ams_per_class(
    partitions: &BTreeMap<u32, Array2<f64>>,
    ridge: Ridge,
) -> Result<BTreeMap<u32, f64>> {
    collect_per_class(partitions, |pts| ams_class(pts, ridge))
}

/// Unweighted mean of [`ams_class`] over classes.
pub fn ams_dataset(partitions: &BTreeMap<u32, Array2<f64>>, ridge: Ridge) -> Result<f64> {
    mean_of_classes(&ams_per_class(partitions, ridge)?)
}
