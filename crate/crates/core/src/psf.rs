//! The persistence scoring function.
//!
//! Given a point set `X`, its diagrams `P_0(X), ..., P_lm(X)` are concatenated into one
//! multiset `P(X)` (multiplicities add up). With `d_hat` the largest death in `P(X)`, the
//! score for exponents `(p, q)` is
//!
//! ```text
//! L(p, q; P(X)) = 1/|P(X)| * sum over (b, d) in P(X) of
//!                 (|d - b| / d_hat)^p * (|d + b| / (2 d_hat))^q
//! ```
//!
//! The first factor rewards long-lived features, the second weights features that live
//! at large radii. Every summand lies in `[0, 1]`, and because `d_hat` scales with the
//! diagram the score does not change when the point set is uniformly rescaled.
//!
//! The multi-valued score averages `L` over a grid of `(p, q)` pairs; the default grid is
//! `{2, 3} x {2, 3}`. Lower values mean a more compact class.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ClassFailure, Error, Result};
use crate::rips::{pairwise_distances, rips_persistence, BirthDeath, PersistenceDiagram};

/// All pairs of a point set's diagrams, regardless of dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcatDiagram {
    pairs: Vec<BirthDeath>,
    d_hat: f64,
}

impl ConcatDiagram {
    pub fn pairs(&self) -> &[BirthDeath] {
        &self.pairs
    }

    /// Largest death value.
    pub fn d_hat(&self) -> f64 {
        self.d_hat
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Concatenates diagrams, keeping every pair with its multiplicity.
pub fn concat_diagrams(diagrams: &[PersistenceDiagram]) -> Result<ConcatDiagram> {
    let pairs: Vec<BirthDeath> = diagrams
        .iter()
        .flat_map(|d| d.pairs.iter().copied())
        .collect();
    let d_hat = pairs
        .iter()
        .map(|p| p.death)
        .fold(f64::NEG_INFINITY, f64::max);
    if pairs.is_empty() || d_hat <= 0.0 {
        return Err(Error::EmptyDiagram);
    }
    Ok(ConcatDiagram { pairs, d_hat })
}

/// Score for a single `(p, q)`.
pub fn psf_single(cd: &ConcatDiagram, p: f64, q: f64) -> f64 {
    let d_hat = cd.d_hat;
    let sum: f64 = cd
        .pairs
        .iter()
        .map(|bd| {
            let life = (bd.death - bd.birth).abs() / d_hat;
            let mid = (bd.death + bd.birth).abs() / (2.0 * d_hat);
            life.powf(p) * mid.powf(q)
        })
        .sum();
    sum / cd.pairs.len() as f64
}

/// A non-empty list of positive `(p, q)` exponent pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct PqGrid(Vec<(f64, f64)>);

impl PqGrid {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Config("(p, q) grid must not be empty".into()));
        }
        if let Some(&(p, q)) = pairs
            .iter()
            .find(|(p, q)| !(p.is_finite() && q.is_finite() && *p > 0.0 && *q > 0.0))
        {
            return Err(Error::Config(format!(
                "(p, q) = ({p}, {q}) must be positive and finite"
            )));
        }
        Ok(Self(pairs))
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.0
    }
}

impl Default for PqGrid {
    fn default() -> Self {
        Self(vec![(2.0, 2.0), (2.0, 3.0), (3.0, 2.0), (3.0, 3.0)])
    }
}

impl TryFrom<Vec<(f64, f64)>> for PqGrid {
    type Error = Error;

    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PqGrid> for Vec<(f64, f64)> {
    fn from(g: PqGrid) -> Self {
        g.0
    }
}

/// Mean of [`psf_single`] over the grid.
pub fn psf_multi(cd: &ConcatDiagram, grid: &PqGrid) -> f64 {
    let total: f64 = grid.0.iter().map(|&(p, q)| psf_single(cd, p, q)).sum();
    total / grid.0.len() as f64
}

/// Parameters of the per-class pipeline.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PsfConfig {
    pub grid: PqGrid,
    /// Highest homology dimension included (0 or 1).
    pub max_dim: usize,
}

impl PsfConfig {
    pub fn new(grid: PqGrid, max_dim: usize) -> Self {
        Self { grid, max_dim }
    }
}

/// Distances, Rips diagrams up to `max_dim`, concatenation, then the grid-averaged score.
pub fn class_psf(points: ArrayView2<'_, f64>, config: &PsfConfig) -> Result<f64> {
    if points.nrows() == 0 {
        return Err(Error::EmptyInput("class has no points"));
    }
    let dm = pairwise_distances(points);
    let diagrams = rips_persistence(&dm, config.max_dim)?;
    let cd = concat_diagrams(&diagrams)?;
    Ok(psf_multi(&cd, &config.grid))
}

/// Per-class scores for every partition, evaluated in parallel.
///
/// Fails with [`Error::ClassFailures`] naming every class that could not be scored.
pub fn per_class_psf(
    partitions: &BTreeMap<u32, Array2<f64>>,
    config: &PsfConfig,
) -> Result<BTreeMap<u32, f64>> {
    collect_per_class(partitions, |pts| class_psf(pts, config))
}

/// Unweighted mean of the per-class scores.
pub fn dataset_psf(partitions: &BTreeMap<u32, Array2<f64>>, config: &PsfConfig) -> Result<f64> {
    mean_of_classes(&per_class_psf(partitions, config)?)
}

pub(crate) fn collect_per_class<F>(
    partitions: &BTreeMap<u32, Array2<f64>>,
    score: F,
) -> Result<BTreeMap<u32, f64>>
where
    F: Fn(ArrayView2<'_, f64>) -> Result<f64> + Sync,
{
    let results: Vec<(u32, Result<f64>)> = partitions
        .par_iter()
        .map(|(&class, pts)| (class, score(pts.view())))
        .collect();
    let mut ok = BTreeMap::new();
    let mut failures = Vec::new();
    for (class, r) in results {
        match r {
            Ok(v) => {
                ok.insert(class, v);
            }
            Err(error) => failures.push(ClassFailure { class, error }),
        }
    }
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(Error::ClassFailures(failures))
    }
}

pub(crate) fn mean_of_classes(scores: &BTreeMap<u32, f64>) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("no classes"));
    }
    Ok(scores.values().sum::<f64>() / scores.len() as f64)
}
