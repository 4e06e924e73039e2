//! Experiment harness: per-dataset score suites, rank correlation against external
//! metrics, and the perturbation stability protocol.

mod correlate;
mod spearman;
mod stability;
mod suite;

pub use correlate::{correlate_scores, CorrelationReport, Level, MetricTable, PairedValue};
pub use spearman::{average_ranks, spearman};
pub use stability::{stability_experiment, StabilityEntry, StabilityReport};
pub use suite::{
    run_score_suite, run_score_suite_on_cloud, sample_classes, ClassScores, ConfigEcho,
    DatasetScores, ScoreReport, SuiteOptions,
};
