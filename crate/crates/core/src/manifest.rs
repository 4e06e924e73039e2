//! Dataset manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psf::{PqGrid, PsfConfig};

/// Samples drawn from each class density when the manifest does not say.
pub const DEFAULT_SAMPLES_PER_CLASS: usize = 300;

/// One dataset to score.
///
/// ```json
/// {
///   "name": "agnews",
///   "embedding_file": "agnews.tsf1",
///   "samples_per_class": 300,
///   "seed": 17,
///   "pq_set": [[2, 2], [2, 3], [3, 2], [3, 3]],
///   "max_dim": 1
/// }
/// ```
///
/// Only `name` and `embedding_file` are required. A relative `embedding_file` is
/// resolved against the manifest's directory by [`DatasetManifest::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    pub embedding_file: PathBuf,
    #[serde(default = "default_samples")]
    pub samples_per_class: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub pq_set: PqGrid,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES_PER_CLASS
}

fn default_max_dim() -> usize {
    1
}

impl DatasetManifest {
    pub fn new(name: impl Into<String>, embedding_file: impl Into<PathBuf>) -> Self {
        Self {
            name: name.into(),
            embedding_file: embedding_file.into(),
            samples_per_class: DEFAULT_SAMPLES_PER_CLASS,
            seed: 0,
            pq_set: PqGrid::default(),
            max_dim: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Self::from_json(&text)?;
        if m.embedding_file.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            m.embedding_file = base.join(&m.embedding_file);
        }
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Config("manifest name must not be empty".into()));
        }
        if self.name.contains(':') {
            return Err(Error::Config(format!(
                "manifest name `{}` must not contain ':'",
                self.name
            )));
        }
        if self.samples_per_class == 0 {
            return Err(Error::Config("samples_per_class must be positive".into()));
        }
        if self.max_dim > 1 {
            return Err(Error::Config(format!(
                "max_dim must be 0 or 1, got {}",
                self.max_dim
            )));
        }
        Ok(())
    }

    pub fn psf_config(&self) -> PsfConfig {
        PsfConfig::new(self.pq_set.clone(), self.max_dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let m = DatasetManifest::from_json(r#"{"name": "a", "embedding_file": "a.tsf1"}"#).unwrap();
        assert_eq!(m.pq_set, PqGrid::default());
        assert_eq!(m.max_dim, 1);
        assert_eq!(m.samples_per_class, DEFAULT_SAMPLES_PER_CLASS);
    }

    #[test]
    fn full_manifest() {
        let m = DatasetManifest::from_json(
            r#"{"name": "a", "embedding_file": "a.tsf1", "samples_per_class": 50,
                "seed": 9, "pq_set": [[2, 3]], "max_dim": 0}"#,
        )
        .unwrap();
        assert_eq!(m.pq_set.pairs(), &[(2.0, 3.0)]);
        assert_eq!(m.seed, 9);
        assert_eq!(m.psf_config().max_dim, 0);
    }

    #[test]
    fn invalid_manifests() {
        for bad in [
            r#"{"name": "a", "embedding_file": "a", "max_dim": 2}"#,
            r#"{"name": "a", "embedding_file": "a", "pq_set": []}"#,
            r#"{"name": "a", "embedding_file": "a", "samples_per_class": 0}"#,
            r#"{"name": "a:b", "embedding_file": "a"}"#,
            r#"{"embedding_file": "a"}"#,
            r#"{"name": "a", "embedding_file": "a", "typo": 1}"#,
        ] {
            assert!(
                matches!(DatasetManifest::from_json(bad), Err(Error::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn relative_paths_resolve_against_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        std::fs::write(&p, r#"{"name": "a", "embedding_file": "data/a.tsf1"}"#).unwrap();
        let m = DatasetManifest::load(&p).unwrap();
        assert_eq!(m.embedding_file, dir.path().join("data/a.tsf1"));
    }
}
