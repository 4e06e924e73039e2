//! Rank correlation of scores against externally measured metrics.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::spearman::spearman;
use super::suite::ScoreReport;
use crate::error::{Error, Result};

/// Whether scores are paired per dataset or per (dataset, class).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Dataset,
    Class,
}

impl Level {
    /// Score types available at this level, in report order.
    pub fn score_names(self) -> &'static [&'static str] {
        match self {
            Level::Dataset => &["psf", "alid", "ams", "sc_adjusted", "dbi"],
            Level::Class => &["psf", "alid", "ams"],
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Dataset => "dataset",
            Level::Class => "class",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dataset" => Ok(Level::Dataset),
            "class" => Ok(Level::Class),
            other => Err(Error::Config(format!(
                "unknown level `{other}` (expected dataset or class)"
            ))),
        }
    }
}

/// External measurements keyed by `dataset` or `dataset:class`.
///
/// Read from CSV with the header `key,value`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    name: String,
    values: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
struct MetricRow {
    key: String,
    value: f64,
}

impl MetricTable {
    pub fn new(name: impl Into<String>, values: BTreeMap<String, f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }

    /// Parses CSV text; `name` labels the metric in reports.
    pub fn from_csv(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Format(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["key", "value"] {
            return Err(Error::Format(format!(
                "metric table header must be `key,value`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut values = BTreeMap::new();
        for row in reader.deserialize::<MetricRow>() {
            let row = row.map_err(|e| Error::Format(e.to_string()))?;
            if !row.value.is_finite() {
                return Err(Error::Data(format!("metric `{}` is not finite", row.key)));
            }
            if values.insert(row.key.clone(), row.value).is_some() {
                return Err(Error::Data(format!("duplicate metric key `{}`", row.key)));
            }
        }
        Ok(Self::new(name, values))
    }

    /// Loads a CSV file, naming the metric after the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "metric".into());
        Self::from_csv(name, &text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedValue {
    pub key: String,
    pub score: f64,
    pub metric: f64,
}

/// Spearman correlation of one score type against one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub score: String,
    pub metric: String,
    pub level: Level,
    pub n: usize,
    /// Rounded to six decimals.
    pub spearman_rho: f64,
    pub pairs: Vec<PairedValue>,
}

impl CorrelationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// Scatter-plot data with header `key,score,metric`.
    pub fn to_scatter_csv(&self) -> String {
        let mut out = String::from("key,score,metric\n");
        for p in &self.pairs {
            out.push_str(&format!("{},{:?},{:?}\n", p.key, p.score, p.metric));
        }
        out
    }
}

pub(crate) fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn score_value(report: &ScoreReport, score: &str, class: Option<u32>) -> f64 {
    match class {
        None => match score {
            "psf" => report.scores.psf,
            "alid" => report.scores.alid,
            "ams" => report.scores.ams,
            "sc_adjusted" => report.scores.sc_adjusted,
            "dbi" => report.scores.dbi,
            _ => unreachable!("unknown score {score}"),
        },
        Some(c) => {
            let s = &report.classes[&c];
            match score {
                "psf" => s.psf,
                "alid" => s.alid,
                "ams" => s.ams,
                _ => unreachable!("unknown class score {score}"),
            }
        }
    }
}

/// The `(key, report, class)` rows at a level, in report order then class order.
fn rows(reports: &[ScoreReport], level: Level) -> Vec<(String, &ScoreReport, Option<u32>)> {
    let mut out = Vec::new();
    for r in reports {
        match level {
            Level::Dataset => out.push((r.dataset.clone(), r, None)),
            Level::Class => {
                for &c in r.classes.keys() {
                    out.push((format!("{}:{c}", r.dataset), r, Some(c)));
                }
            }
        }
    }
    out
}

/// Correlation with the unrounded coefficient, shared with the stability protocol.
pub(crate) fn correlate_raw(
    reports: &[ScoreReport],
    metrics: &MetricTable,
    level: Level,
) -> Result<Vec<(CorrelationReport, f64)>> {
    let rows = rows(reports, level);
    let missing: Vec<&str> = rows
        .iter()
        .filter(|(k, _, _)| metrics.get(k).is_none())
        .map(|(k, _, _)| k.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Join(missing.join(", ")));
    }
    level
        .score_names()
        .iter()
        .map(|&score| {
            let pairs: Vec<PairedValue> = rows
                .iter()
                .map(|(key, r, class)| PairedValue {
                    key: key.clone(),
                    score: score_value(r, score, *class),
                    metric: metrics.get(key).expect("joined above"),
                })
                .collect();
            let xs: Vec<f64> = pairs.iter().map(|p| p.score).collect();
            let ys: Vec<f64> = pairs.iter().map(|p| p.metric).collect();
            let rho = spearman(&xs, &ys)?;
            Ok((
                CorrelationReport {
                    score: score.to_string(),
                    metric: metrics.name().to_string(),
                    level,
                    n: pairs.len(),
                    spearman_rho: round6(rho),
                    pairs,
                },
                rho,
            ))
        })
        .collect()
}

/// One correlation report per score type available at `level`.
///
/// At class level the per-class scores of all datasets are concatenated into a single
/// series, keyed `dataset:class`.
pub fn correlate_scores(
    reports: &[ScoreReport],
    metrics: &MetricTable,
    level: Level,
) -> Result<Vec<CorrelationReport>> {
    Ok(correlate_raw(reports, metrics, level)?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::suite::{ClassScores, ConfigEcho, DatasetScores};
    use crate::baselines::Ridge;
    use crate::psf::PqGrid;

    fn report(name: &str, psf: f64, classes: &[(u32, f64)]) -> ScoreReport {
        ScoreReport {
            dataset: name.into(),
            config: ConfigEcho {
                seed: 0,
                samples_per_class: 10,
                alid_k: 3,
                ams_ridge: Ridge::default(),
                bandwidth: None,
                pq_set: PqGrid::default(),
                max_dim: 1,
            },
            classes: classes
                .iter()
                .map(|&(c, v)| {
                    (
                        c,
                        ClassScores {
                            psf: v,
                            alid: v * 2.0,
                            ams: 1.0 - v,
                        },
                    )
                })
                .collect(),
            scores: DatasetScores {
                psf,
                alid: psf,
                ams: psf,
                sc_adjusted: psf,
                dbi: psf,
            },
        }
    }

    fn table(pairs: &[(&str, f64)]) -> MetricTable {
        MetricTable::new(
            "accuracy",
            pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        )
    }

    #[test]
    fn opposite_order_gives_minus_one() {
        let reports = vec![
            report("a", 0.1, &[(0, 0.1)]),
            report("b", 0.2, &[(0, 0.2)]),
            report("c", 0.3, &[(0, 0.3)]),
        ];
        let metrics = table(&[("a", 0.9), ("b", 0.8), ("c", 0.7)]);
        let out = correlate_scores(&reports, &metrics, Level::Dataset).unwrap();
        assert_eq!(out.len(), 5);
        assert_eq!(out[0].score, "psf");
        assert_eq!(out[0].spearman_rho, -1.0);
        assert_eq!(out[0].n, 3);
        assert!(out[0]
            .to_scatter_csv()
            .starts_with("key,score,metric\na,0.1,0.9\n"));
    }

    #[test]
    fn missing_key_is_join_error() {
        let reports = vec![
            report("a", 0.1, &[]),
            report("b", 0.2, &[]),
            report("c", 0.3, &[]),
        ];
        let metrics = table(&[("a", 0.9), ("c", 0.7)]);
        match correlate_scores(&reports, &metrics, Level::Dataset) {
            Err(Error::Join(k)) => assert_eq!(k, "b"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn class_level_concatenates() {
        let reports = vec![
            report("a", 0.1, &[(0, 0.1), (1, 0.4)]),
            report("b", 0.2, &[(0, 0.2), (1, 0.3), (2, 0.5)]),
        ];
        let metrics = table(&[
            ("a:0", 5.0),
            ("a:1", 2.0),
            ("b:0", 4.0),
            ("b:1", 3.0),
            ("b:2", 1.0),
        ]);
        let out = correlate_scores(&reports, &metrics, Level::Class).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].n, 5);
        assert_eq!(out[0].spearman_rho, -1.0);
        assert_eq!(out[2].score, "ams");
        assert_eq!(out[2].spearman_rho, 1.0);
    }

    #[test]
    fn metric_csv() {
        let t = MetricTable::from_csv("acc", "key,value\na,0.5\nb:1, 0.25\n").unwrap();
        assert_eq!(t.get("a"), Some(0.5));
        assert_eq!(t.get("b:1"), Some(0.25));
        assert!(MetricTable::from_csv("acc", "name,value\na,1\n").is_err());
        assert!(MetricTable::from_csv("acc", "key,value\na,x\n").is_err());
        assert!(MetricTable::from_csv("acc", "key,value\na,1\na,2\n").is_err());
    }

    #[test]
    fn level_parsing() {
        assert_eq!("class".parse::<Level>().unwrap(), Level::Class);
        assert!("global".parse::<Level>().is_err());
        assert_eq!(Level::Dataset.to_string(), "dataset");
    }

    #[test]
    fn rounding() {
        assert_eq!(round6(0.94868329805), 0.948683);
        assert_eq!(round6(-0.5000004), -0.5);
    }
}
