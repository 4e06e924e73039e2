//! Vietoris-Rips persistent homology in dimensions 0 and 1.
//!
//! Conventions, shared by the optimized engine and the reference reduction:
//!
//! * The metric is Euclidean and an edge `{i, j}` enters the filtration at `d(i, j)`
//!   (diameter convention). A triangle enters at its longest edge.
//! * Ties are broken lexicographically on sorted vertex indices, and lower-dimensional
//!   simplices precede their cofaces at equal diameter.
//! * Coefficients are in Z/2Z.
//! * Essential classes (infinite death) and zero-persistence pairs are dropped.
//!
//! Diagrams are returned with their pairs in canonical order (by birth, then death), so
//! two diagrams compare equal exactly when they are equal as multisets.

mod engine;
mod oracle;

use std::cmp::Ordering;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use engine::{h0_persistence, h1_persistence, rips_persistence};
pub use oracle::{naive_reduction_oracle, ORACLE_MAX_POINTS};

/// Symmetric matrix of pairwise Euclidean distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from explicit entries, checking symmetry, the zero diagonal and
    /// finiteness.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dim {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Data(format!("entry ({i}, {j}) = {v}")));
                }
                if i == j && v != 0.0 {
                    return Err(Error::Data(format!("non-zero diagonal at {i}")));
                }
                if v != rows[j][i] {
                    return Err(Error::Data(format!("asymmetric at ({i}, {j})")));
                }
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Distance from `i` to every point, including itself.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Largest distance; the radius at which the Rips complex is the full simplex.
    pub fn diameter(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest eccentricity `min_i max_j d(i, j)`.
    ///
    /// At this radius some point is joined to every other, the Rips complex is a cone,
    /// and every cycle has died.
    pub fn enclosing_radius(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.data
            .chunks(self.n)
            .map(|row| row.iter().copied().fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Exact Euclidean distances between the rows of `points`.
///
/// Every entry is computed by the same sequential sum regardless of thread count, and
/// `d(i, j)` and `d(j, i)` are bitwise equal.
pub fn pairwise_distances(points: ArrayView2<'_, f64>) -> DistanceMatrix {
    let n = points.nrows();
    let mut data = vec![0.0; n * n];
    if n > 0 {
        data.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
            let a = points.row(i);
            for (j, slot) in out.iter_mut().enumerate() {
                if i != j {
                    let b = points.row(j);
                    let sq: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
                    *slot = sq.sqrt();
                }
            }
        });
    }
    DistanceMatrix { n, data }
}

/// A finite birth-death pair with positive persistence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirthDeath {
    pub birth: f64,
    pub death: f64,
}

impl BirthDeath {
    pub fn new(birth: f64, death: f64) -> Self {
        Self { birth, death }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.birth
            .total_cmp(&other.birth)
            .then(self.death.total_cmp(&other.death))
    }
}

/// The multiset of pairs for one homology dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub dim: usize,
    pub pairs: Vec<BirthDeath>,
}

impl PersistenceDiagram {
    /// Builds a diagram, putting the pairs into canonical order.
    pub fn new(dim: usize, mut pairs: Vec<BirthDeath>) -> Self {
        pairs.sort_by(BirthDeath::canonical_cmp);
        Self { dim, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Serialize)]
struct DiagramRow {
    dim: usize,
    birth: f64,
    death: f64,
}

fn rows(diagrams: &[PersistenceDiagram]) -> impl Iterator<Item = DiagramRow> + '_ {
    diagrams.iter().flat_map(|d| {
        d.pairs.iter().map(move |p| DiagramRow {
            dim: d.dim,
            birth: p.birth,
            death: p.death,
        })
    })
}

/// Serializes diagrams as a JSON array of `{"dim", "birth", "death"}` objects.
pub fn diagrams_to_json(diagrams: &[PersistenceDiagram]) -> String {
    let rows: Vec<DiagramRow> = rows(diagrams).collect();
    serde_json::to_string_pretty(&rows).expect("diagram rows always serialize")
}

/// Plot-ready CSV with header `dim,birth,death`; values use shortest round-trip formatting.
pub fn diagrams_to_csv(diagrams: &[PersistenceDiagram]) -> String {
    let mut out = String::from("dim,birth,death\n");
    for r in rows(diagrams) {
        out.push_str(&format!("{},{:?},{:?}\n", r.dim, r.birth, r.death));
    }
    out
}
