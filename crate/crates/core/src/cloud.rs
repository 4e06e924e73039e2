//! Labeled embedding point clouds.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// A matrix of embedding vectors (one per row) with a non-negative class label per row.
///
/// Construction validates shape and finiteness; afterwards the cloud is immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointCloud {
    points: Array2<f64>,
    labels: Vec<u32>,
}

impl LabeledPointCloud {
    pub fn new(points: Array2<f64>, labels: Vec<u32>) -> Result<Self> {
        if points.nrows() != labels.len() {
            return Err(Error::Data(format!(
                "{} labels for {} rows",
                labels.len(),
                points.nrows()
            )));
        }
        if points.ncols() == 0 {
            return Err(Error::Data("points must have at least one column".into()));
        }
        if let Some((idx, _)) = points.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let cols = points.ncols();
            return Err(Error::Data(format!(
                "non-finite value at row {}, column {}",
                idx / cols,
                idx % cols
            )));
        }
        Ok(Self { points, labels })
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    /// Number of distinct labels.
    pub fn class_count(&self) -> usize {
        let mut seen: Vec<u32> = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    pub fn into_parts(self) -> (Array2<f64>, Vec<u32>) {
        (self.points, self.labels)
    }

    /// Builds a cloud from per-class matrices, labels taken from the map keys.
    pub fn from_partitions(parts: &BTreeMap<u32, Array2<f64>>) -> Result<Self> {
        let dim = parts
            .values()
            .next()
            .map(|m| m.ncols())
            .ok_or(Error::EmptyInput("no classes"))?;
        let total: usize = parts.values().map(|m| m.nrows()).sum();
        let mut points = Array2::zeros((total, dim));
        let mut labels = Vec::with_capacity(total);
        let mut row = 0;
        for (&class, m) in parts {
            if m.ncols() != dim {
                return Err(Error::Dim {
                    expected: dim,
                    got: m.ncols(),
                });
            }
            for r in m.rows() {
                points.row_mut(row).assign(&r);
                labels.push(class);
                row += 1;
            }
        }
        Self::new(points, labels)
    }
}

/// Splits a cloud into per-class point matrices, ordered by ascending class id.
///
/// Row order inside each class follows the original cloud.
pub fn partition_by_class(cloud: &LabeledPointCloud) -> BTreeMap<u32, Array2<f64>> {
    let mut rows: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in cloud.labels().iter().enumerate() {
        rows.entry(l).or_default().push(i);
    }
    rows.into_iter()
        .map(|(class, idx)| (class, cloud.points.select(Axis(0), &idx)))
        .collect()
}
