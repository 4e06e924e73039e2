//! Kernel density downsampling and Gaussian perturbation.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded from a `u64`
//! with an explicit stream id. ChaCha output is specified independently of platform, so
//! a `(seed, stream)` pair reproduces the same samples everywhere.

use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cloud::LabeledPointCloud;
use crate::error::{Error, Result};

/// Generator for `(seed, stream)`. Independent experiments use distinct streams.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Bandwidth selection for [`kde_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BandwidthRule {
    /// `h = mean_std * n^(-1 / (dim + 4))`, with `mean_std` the average of the biased
    /// per-dimension standard deviations.
    #[default]
    Scott,
    Fixed(f64),
}

/// Isotropic Gaussian kernel density over a set of base points.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel {
    base: Array2<f64>,
    bandwidth: f64,
}

impl KdeModel {
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn base_points(&self) -> ArrayView2<'_, f64> {
        self.base.view()
    }

    pub fn dim(&self) -> usize {
        self.base.ncols()
    }
}

pub fn kde_fit(points: ArrayView2<'_, f64>, rule: BandwidthRule) -> Result<KdeModel> {
    let n = points.nrows();
    let bandwidth = match rule {
        BandwidthRule::Fixed(h) => {
            if n == 0 {
                return Err(Error::TooFewPoints { needed: 1, got: 0 });
            }
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::Config(format!(
                    "bandwidth must be positive, got {h}"
                )));
            }
            h
        }
        BandwidthRule::Scott => {
            if n < 2 {
                return Err(Error::TooFewPoints { needed: 2, got: n });
            }
            let mean_std = column_variances(points)?
                .mapv(f64::sqrt)
                .mean()
                .unwrap_or(0.0);
            let h = mean_std * (n as f64).powf(-1.0 / (points.ncols() as f64 + 4.0));
            if h.is_nan() || h <= 0.0 {
                return Err(Error::DegenerateKde);
            }
            h
        }
    };
    Ok(KdeModel {
        base: points.to_owned(),
        bandwidth,
    })
}

/// Draws `m` points: a uniformly chosen base point plus `h * z`, `z` standard normal.
pub fn kde_sample(model: &KdeModel, m: usize, rng: &mut impl Rng) -> Array2<f64> {
    let (n, dim) = model.base.dim();
    let mut out = Array2::<f64>::zeros((m, dim));
    for mut row in out.axis_iter_mut(Axis(0)) {
        let pick = rng.random_range(0..n);
        let base = model.base.row(pick);
        for (slot, &b) in row.iter_mut().zip(base.iter()) {
            let z: f64 = rng.sample(StandardNormal);
            *slot = b + model.bandwidth * z;
        }
    }
    out
}

/// Biased (1/N) variance of every column.
pub fn column_variances(matrix: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    if matrix.nrows() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: matrix.nrows(),
        });
    }
    Ok(matrix.var_axis(Axis(0), 0.0))
}

/// Where per-dimension noise variances come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma2Source {
    /// A JSON array of variances, one per embedding dimension.
    File(PathBuf),
    /// Column variances of the cloud being perturbed.
    Columns,
}

/// JSON form of a noise configuration, before variances are resolved against a cloud.
///
/// ```json
/// {"fraction": 0.2, "seed": 7, "sigma2_from": "columns", "sigma2_scale": 0.01}
/// {"fraction": 0.2, "seed": 7, "sigma2_file": "bert.sigma2.json"}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2_from: Option<String>,
    /// Multiplier applied to every variance.
    #[serde(default = "default_scale")]
    pub sigma2_scale: f64,
}

fn default_fraction() -> f64 {
    0.2
}

fn default_scale() -> f64 {
    1.0
}

impl NoiseSpec {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec: NoiseSpec =
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(file) = &spec.sigma2_file {
            if file.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                spec.sigma2_file = Some(base.join(file));
            }
        }
        spec.source()?;
        check_fraction(spec.fraction)?;
        Ok(spec)
    }

    pub fn source(&self) -> Result<Sigma2Source> {
        match (&self.sigma2_file, self.sigma2_from.as_deref()) {
            (Some(f), None) => Ok(Sigma2Source::File(f.clone())),
            (None, Some("columns")) | (None, None) => Ok(Sigma2Source::Columns),
            (None, Some(other)) => Err(Error::Config(format!(
                "unknown sigma2_from `{other}` (expected \"columns\")"
            ))),
            (Some(_), Some(_)) => Err(Error::Config(
                "give either sigma2_file or sigma2_from, not both".into(),
            )),
        }
    }

    /// Resolves variances for `cloud` and validates the result.
    pub fn resolve(&self, cloud: &LabeledPointCloud) -> Result<NoiseConfig> {
        if !(self.sigma2_scale.is_finite() && self.sigma2_scale >= 0.0) {
            return Err(Error::Config(format!(
                "sigma2_scale must be >= 0, got {}",
                self.sigma2_scale
            )));
        }
        let base = match self.source()? {
            Sigma2Source::Columns => column_variances(cloud.points())?.to_vec(),
            Sigma2Source::File(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                serde_json::from_str::<Vec<f64>>(&text)
                    .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
            }
        };
        let sigma2 = base.into_iter().map(|v| v * self.sigma2_scale).collect();
        NoiseConfig::new(sigma2, self.fraction, self.seed)
    }
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!(
            "noise fraction must lie in (0, 1], got {fraction}"
        )));
    }
    Ok(())
}

/// Per-dimension noise variances, the fraction of rows to perturb, and the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    sigma2: Vec<f64>,
    fraction: f64,
    seed: u64,
}

impl NoiseConfig {
    pub fn new(sigma2: Vec<f64>, fraction: f64, seed: u64) -> Result<Self> {
        check_fraction(fraction)?;
        if let Some(v) = sigma2.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Config(format!(
                "noise variance must be >= 0, got {v}"
            )));
        }
        Ok(Self {
            sigma2,
            fraction,
            seed,
        })
    }

    pub fn sigma2(&self) -> &[f64] {
        &self.sigma2
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of rows perturbed out of `n`.
    pub fn selected_count(&self, n: usize) -> usize {
        ((self.fraction * n as f64).round() as usize).min(n)
    }
}

/// Adds `N(0, sigma2[h])` noise to every dimension `h` of a random subset of rows.
///
/// Rows are drawn without replacement from stream 0 of the configured seed; unselected
/// rows and all labels are left untouched.
pub fn perturb_gaussian(cloud: &LabeledPointCloud, cfg: &NoiseConfig) -> Result<LabeledPointCloud> {
    perturb_gaussian_stream(cloud, cfg, 0)
}

pub(crate) fn perturb_gaussian_stream(
    cloud: &LabeledPointCloud,
    cfg: &NoiseConfig,
    stream: u64,
) -> Result<LabeledPointCloud> {
    if cfg.sigma2.len() != cloud.dim() {
        return Err(Error::Dim {
            expected: cloud.dim(),
            got: cfg.sigma2.len(),
        });
    }
    let mut rng = seeded_rng(cfg.seed, stream);
    let n = cloud.len();
    let mut rows = index::sample(&mut rng, n, cfg.selected_count(n)).into_vec();
    rows.sort_unstable();
    let std: Vec<f64> = cfg.sigma2.iter().map(|v| v.sqrt()).collect();
    let mut points = cloud.points().to_owned();
    for r in rows {
        for (x, s) in points.row_mut(r).iter_mut().zip(&std) {
            let z: f64 = rng.sample(StandardNormal);
            *x += s * z;
        }
    }
    LabeledPointCloud::new(points, cloud.labels().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn ten_rows() -> LabeledPointCloud {
        let pts = Array2::from_shape_fn((10, 3), |(i, j)| (i * 3 + j) as f64);
        LabeledPointCloud::new(pts, (0..10).map(|i| i % 2).collect()).unwrap()
    }

    #[test]
    fn scott_bandwidth() {
        let m = kde_fit(array![[0.0], [2.0]].view(), BandwidthRule::Scott).unwrap();
        assert!((m.bandwidth() - 2f64.powf(-0.2)).abs() < 1e-15);
        assert!((m.bandwidth() - 0.870551).abs() < 1e-6);
    }

    #[test]
    fn fixed_bandwidth_passthrough() {
        let m = kde_fit(array![[0.0], [2.0]].view(), BandwidthRule::Fixed(0.5)).unwrap();
        assert_eq!(m.bandwidth(), 0.5);
        assert!(kde_fit(array![[0.0]].view(), BandwidthRule::Fixed(-1.0)).is_err());
    }

    #[test]
    fn duplicates_are_degenerate() {
        let r = kde_fit(array![[1.0, 1.0], [1.0, 1.0]].view(), BandwidthRule::Scott);
        assert!(matches!(r, Err(Error::DegenerateKde)));
        assert!(matches!(
            kde_fit(array![[1.0]].view(), BandwidthRule::Scott),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn tiny_bandwidth_stays_on_base_points() {
        let base = array![[0.0, 0.0], [5.0, -3.0], [1.0, 1.0]];
        let m = kde_fit(base.view(), BandwidthRule::Fixed(1e-12)).unwrap();
        let s = kde_sample(&m, 50, &mut seeded_rng(1, 0));
        for row in s.rows() {
            let near = base
                .rows()
                .into_iter()
                .any(|b| b.iter().zip(row.iter()).all(|(x, y)| (x - y).abs() < 1e-9));
            assert!(near);
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let m = kde_fit(
            array![[0.0, 1.0], [2.0, 0.0], [1.0, 1.0]].view(),
            BandwidthRule::Scott,
        )
        .unwrap();
        let a = kde_sample(&m, 20, &mut seeded_rng(9, 0));
        let b = kde_sample(&m, 20, &mut seeded_rng(9, 0));
        let c = kde_sample(&m, 20, &mut seeded_rng(10, 0));
        let d = kde_sample(&m, 20, &mut seeded_rng(9, 1));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn variances() {
        assert_eq!(
            column_variances(array![[0.0], [2.0]].view()).unwrap()[0],
            1.0
        );
        assert_eq!(
            column_variances(array![[3.0], [3.0]].view()).unwrap()[0],
            0.0
        );
        let one = array![[0.0, 1.0], [2.0, 5.0], [1.0, 1.0]];
        let two = ndarray::concatenate(Axis(0), &[one.view(), one.view()]).unwrap();
        let (a, b) = (
            column_variances(one.view()).unwrap(),
            column_variances(two.view()).unwrap(),
        );
        assert!((a - b).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn zero_noise_is_identity() {
        let c = ten_rows();
        let cfg = NoiseConfig::new(vec![0.0; 3], 1.0, 3).unwrap();
        assert_eq!(perturb_gaussian(&c, &cfg).unwrap(), c);
    }

    #[test]
    fn half_of_rows_change() {
        let c = ten_rows();
        let cfg = NoiseConfig::new(vec![1.0; 3], 0.5, 3).unwrap();
        let p = perturb_gaussian(&c, &cfg).unwrap();
        let changed = c
            .points()
            .rows()
            .into_iter()
            .zip(p.points().rows())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(changed, 5);
        assert_eq!(p.labels(), c.labels());
        assert_eq!(perturb_gaussian(&c, &cfg).unwrap(), p);
    }

    #[test]
    fn fraction_bounds() {
        assert!(matches!(
            NoiseConfig::new(vec![1.0], 1.5, 0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            NoiseConfig::new(vec![1.0], 0.0, 0),
            Err(Error::Config(_))
        ));
        assert!(NoiseConfig::new(vec![-1.0], 0.5, 0).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let cfg = NoiseConfig::new(vec![1.0; 2], 0.5, 0).unwrap();
        assert!(matches!(
            perturb_gaussian(&ten_rows(), &cfg),
            Err(Error::Dim { .. })
        ));
    }

    #[test]
    fn noise_spec_json() {
        let s: NoiseSpec = serde_json::from_str(
            r#"{"fraction": 0.3, "seed": 4, "sigma2_from": "columns", "sigma2_scale": 0.01}"#,
        )
        .unwrap();
        assert_eq!(s.source().unwrap(), Sigma2Source::Columns);
        let cfg = s.resolve(&ten_rows()).unwrap();
        assert_eq!(cfg.fraction(), 0.3);
        // column variance of 0,3,...,27 is 74.25
        assert!((cfg.sigma2()[0] - 0.7425).abs() < 1e-12);

        let bad: NoiseSpec =
            serde_json::from_str(r#"{"fraction": 0.3, "sigma2_from": "rows"}"#).unwrap();
        assert!(bad.source().is_err());
    }

    #[test]
    fn noise_spec_from_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s2.json"), "[0.5, 0.5, 2.0]").unwrap();
        let spec_path = dir.path().join("noise.json");
        std::fs::write(
            &spec_path,
            r#"{"fraction": 1.0, "seed": 1, "sigma2_file": "s2.json"}"#,
        )
        .unwrap();
        let spec = NoiseSpec::from_json_file(&spec_path).unwrap();
        let cfg = spec.resolve(&ten_rows()).unwrap();
        assert_eq!(cfg.sigma2(), &[0.5, 0.5, 2.0]);

        std::fs::write(&spec_path, r#"{"fraction": 1.5, "sigma2_from": "columns"}"#).unwrap();
        assert!(matches!(
            NoiseSpec::from_json_file(&spec_path),
            Err(Error::Config(_))
        ));
    }
}
