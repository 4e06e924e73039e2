//! Correlation stability under Gaussian perturbation of the embeddings.
//!
//! Each dataset is scored twice: once as loaded and once after [`perturb_gaussian`]
//! noise is added to a random subset of rows. Density fitting and sampling are redone
//! on the perturbed cloud with the same seed. Both report sets are correlated against
//! the same metric and the change in the coefficient is reported per score.
//!
//! [`perturb_gaussian`]: crate::sampling::perturb_gaussian

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlate::{correlate_raw, round6, Level, MetricTable};
use super::suite::{run_score_suite_on_cloud, ScoreReport, SuiteOptions};
use crate::error::Result;
use crate::io::load_embeddings;
use crate::manifest::DatasetManifest;
use crate::sampling::{perturb_gaussian_stream, NoiseSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEntry {
    pub score: String,
    pub rho_clean: f64,
    pub rho_noisy: f64,
    /// `rho_noisy - rho_clean`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub metric: String,
    pub noise: NoiseSpec,
    pub datasets: Vec<String>,
    pub entries: Vec<StabilityEntry>,
}

impl StabilityReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn entry(&self, score: &str) -> Option<&StabilityEntry> {
        self.entries.iter().find(|e| e.score == score)
    }
}

/// FNV-1a of the dataset name; selects the perturbation stream so that a dataset's
/// noise does not depend on its position in the manifest list.
fn name_stream(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn clean_and_noisy(
    manifest: &DatasetManifest,
    noise: &NoiseSpec,
    options: &SuiteOptions,
) -> Result<(ScoreReport, ScoreReport)> {
    manifest.validate()?;
    let cloud = load_embeddings(&manifest.embedding_file, None)?;
    let cfg = noise.resolve(&cloud)?;
    let perturbed = perturb_gaussian_stream(&cloud, &cfg, name_stream(&manifest.name))?;
    let clean = run_score_suite_on_cloud(manifest, &cloud, options)?;
    let noisy = run_score_suite_on_cloud(manifest, &perturbed, options)?;
    Ok((clean, noisy))
}

/// Runs the dataset-level correlation with and without noise.
pub fn stability_experiment(
    manifests: &[DatasetManifest],
    noise: &NoiseSpec,
    metrics: &MetricTable,
    options: &SuiteOptions,
) -> Result<StabilityReport> {
    noise.source()?;
    let runs: Vec<(ScoreReport, ScoreReport)> = manifests
        .par_iter()
        .map(|m| clean_and_noisy(m, noise, options))
        .collect::<Result<_>>()?;
    let (clean, noisy): (Vec<_>, Vec<_>) = runs.into_iter().unzip();

    let before = correlate_raw(&clean, metrics, Level::Dataset)?;
    let after = correlate_raw(&noisy, metrics, Level::Dataset)?;
    let entries = before
        .iter()
        .zip(&after)
        .map(|((c, rho_clean), (_, rho_noisy))| StabilityEntry {
            score: c.score.clone(),
            rho_clean: round6(*rho_clean),
            rho_noisy: round6(*rho_noisy),
            delta: round6(rho_noisy - rho_clean),
        })
        .collect();

    Ok(StabilityReport {
        metric: metrics.name().to_string(),
        noise: noise.clone(),
        datasets: manifests.iter().map(|m| m.name.clone()).collect(),
        entries,
    })
}
