//! The scoring pipeline for one dataset.

use std::collections::BTreeMap;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    alid_class, ams_class, davies_bouldin, silhouette_adjusted, Ridge, DEFAULT_ALID_K,
};
use crate::cloud::{partition_by_class, LabeledPointCloud};
use crate::error::{ClassFailure, Error, Result};
use crate::io::load_embeddings;
use crate::manifest::DatasetManifest;
use crate::psf::{class_psf, PqGrid};
use crate::sampling::{kde_fit, kde_sample, seeded_rng, BandwidthRule};

/// Knobs of the suite that are not part of the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub alid_k: usize,
    pub ams_ridge: Ridge,
    pub bandwidth: BandwidthRule,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            alid_k: DEFAULT_ALID_K,
            ams_ridge: Ridge::default(),
            bandwidth: BandwidthRule::Scott,
        }
    }
}

/// Every parameter that influenced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub samples_per_class: usize,
    pub alid_k: usize,
    pub ams_ridge: Ridge,
    /// `null` means Scott's rule.
    pub bandwidth: Option<f64>,
    pub pq_set: PqGrid,
    pub max_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub psf: f64,
    pub alid: f64,
    pub ams: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetScores {
    pub psf: f64,
    pub alid: f64,
    pub ams: f64,
    pub sc_adjusted: f64,
    pub dbi: f64,
}

/// Scores of one dataset: per class and aggregated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub dataset: String,
    pub config: ConfigEcho,
    pub classes: BTreeMap<u32, ClassScores>,
    pub scores: DatasetScores,
}

impl ScoreReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Fits a density to every class and draws `m` points from it.
///
/// Class `c` uses stream `c` of `seed`, so the result does not depend on scheduling.
pub fn sample_classes(
    partitions: &BTreeMap<u32, Array2<f64>>,
    m: usize,
    seed: u64,
    bandwidth: BandwidthRule,
) -> Result<BTreeMap<u32, Array2<f64>>> {
    let results: Vec<(u32, Result<Array2<f64>>)> = partitions
        .par_iter()
        .map(|(&class, pts)| {
            let sampled = kde_fit(pts.view(), bandwidth)
                .map(|model| kde_sample(&model, m, &mut seeded_rng(seed, class as u64)));
            (class, sampled)
        })
        .collect();
    split_failures(results)
}

fn split_failures<T>(results: Vec<(u32, Result<T>)>) -> Result<BTreeMap<u32, T>> {
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

fn mean<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Runs the pipeline on an in-memory cloud; `name` and parameters come from `manifest`.
pub fn run_score_suite_on_cloud(
    manifest: &DatasetManifest,
    cloud: &LabeledPointCloud,
    options: &SuiteOptions,
) -> Result<ScoreReport> {
    manifest.validate()?;
    let partitions = partition_by_class(cloud);
    if partitions.is_empty() {
        return Err(Error::EmptyInput("embedding file has no rows"));
    }
    let sampled = sample_classes(
        &partitions,
        manifest.samples_per_class,
        manifest.seed,
        options.bandwidth,
    )?;

    let psf_config = manifest.psf_config();
    let per_class: Vec<(u32, Result<ClassScores>)> = sampled
        .par_iter()
        .map(|(&class, pts)| {
            let scores = class_psf(pts.view(), &psf_config).and_then(|psf| {
                Ok(ClassScores {
                    psf,
                    alid: alid_class(pts.view(), options.alid_k)?,
                    ams: ams_class(pts.view(), options.ams_ridge)?,
                })
            });
            (class, scores)
        })
        .collect();
    let classes = split_failures(per_class)?;

    let sampled_cloud = LabeledPointCloud::from_partitions(&sampled)?;
    let scores = DatasetScores {
        psf: mean(classes.values().map(|c| &c.psf)),
        alid: mean(classes.values().map(|c| &c.alid)),
        ams: mean(classes.values().map(|c| &c.ams)),
        sc_adjusted: silhouette_adjusted(&sampled_cloud)?,
        dbi: davies_bouldin(&sampled_cloud)?,
    };

    Ok(ScoreReport {
        dataset: manifest.name.clone(),
        config: ConfigEcho {
            seed: manifest.seed,
            samples_per_class: manifest.samples_per_class,
            alid_k: options.alid_k,
            ams_ridge: options.ams_ridge,
            bandwidth: match options.bandwidth {
                BandwidthRule::Scott => None,
                BandwidthRule::Fixed(h) => Some(h),
            },
            pq_set: manifest.pq_set.clone(),
            max_dim: manifest.max_dim,
        },
        classes,
        scores,
    })
}

/// Loads the manifest's embeddings and runs the full pipeline.
pub fn run_score_suite(manifest: &DatasetManifest, options: &SuiteOptions) -> Result<ScoreReport> {
    manifest.validate()?;
    let cloud = load_embeddings(&manifest.embedding_file, None)?;
    run_score_suite_on_cloud(manifest, &cloud, options)
}
