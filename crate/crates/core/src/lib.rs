//! Topological quality scores for labeled embedding point clouds.
//!
//! The central quantity is a persistence score: each class of a labeled cloud is run
//! through a Vietoris-Rips filtration, its dimension-0 and dimension-1 persistence
//! diagrams are pooled, and a normalized, exponent-weighted average of lifetimes is
//! taken. Lower scores mean tighter classes. Alongside it the crate provides the usual
//! comparison scores (ALID, AMS, silhouette, Davies-Bouldin), density-based
//! downsampling, and a harness that rank-correlates any of these scores against
//! externally measured metrics such as accuracy.
//!
//! ```
//! use ndarray::array;
//! use toposcore::psf::{class_psf, PqGrid, PsfConfig};
//!
//! // Two points: one H0 pair (0, 2), so every (p, q) term is (1/2)^q.
//! let score = class_psf(array![[0.0], [2.0]].view(), &PsfConfig::new(PqGrid::default(), 1))?;
//! assert!((score - 0.1875).abs() < 1e-12);
//! # Ok::<(), toposcore::Error>(())
//! ```
//!
//! The accompanying book (`book/`) explains each piece in more depth; its code
//! listings are compiled and run as doctests of this crate.

pub mod analysis;
pub mod baselines;
pub mod cloud;
mod error;
pub mod io;
pub mod manifest;
pub mod psf;
pub mod rips;
pub mod sampling;

pub use cloud::{partition_by_class, LabeledPointCloud};
pub use error::{ClassFailure, Error, Result};
pub use manifest::DatasetManifest;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/persistence.md")]
    mod persistence {}
    #[doc = include_str!("../../../book/src/scoring.md")]
    mod scoring {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}
