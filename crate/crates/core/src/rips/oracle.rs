//! Textbook boundary-matrix reduction, used as a reference for the optimized engine.
//!
//! Every simplex up to dimension `max_dim + 1` is materialized, sorted into filtration
//! order and reduced with the standard left-to-right column algorithm. No clearing, no
//! cohomology, no implicit enumeration.

use std::collections::HashMap;

use super::{BirthDeath, DistanceMatrix, PersistenceDiagram};
use crate::error::{Error, Result};

/// Largest point count the reference reduction accepts.
pub const ORACLE_MAX_POINTS: usize = 64;

struct Simplex {
    vertices: Vec<usize>,
    diam: f64,
}

fn enumerate(dm: &DistanceMatrix, top_dim: usize) -> Vec<Simplex> {
    let n = dm.len();
    let mut out: Vec<Simplex> = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    while let Some(vs) = stack.pop() {
        let mut diam = 0.0f64;
        for (a, &i) in vs.iter().enumerate() {
            for &j in &vs[a + 1..] {
                diam = diam.max(dm.get(i, j));
            }
        }
        if vs.len() <= top_dim {
            let last = *vs.last().unwrap();
            for next in last + 1..n {
                let mut grown = vs.clone();
                grown.push(next);
                stack.push(grown);
            }
        }
        out.push(Simplex { vertices: vs, diam });
    }
    out.sort_by(|a, b| {
        a.diam
            .total_cmp(&b.diam)
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then(a.vertices.cmp(&b.vertices))
    });
    out
}

/// Diagrams `[P0]` or `[P0, P1]` by full reduction of the boundary matrix over Z/2Z.
pub fn naive_reduction_oracle(
    dm: &DistanceMatrix,
    max_dim: usize,
) -> Result<Vec<PersistenceDiagram>> {
    if dm.is_empty() {
        return Err(Error::EmptyInput("distance matrix has no points"));
    }
    if dm.len() > ORACLE_MAX_POINTS {
        return Err(Error::Size {
            n: dm.len(),
            max: ORACLE_MAX_POINTS,
        });
    }
    if max_dim > 1 {
        return Err(Error::Config(format!(
            "homology dimension {max_dim} is not supported (max 1)"
        )));
    }

    let simplices = enumerate(dm, max_dim + 1);
    let index: HashMap<&[usize], usize> = simplices
        .iter()
        .enumerate()
        .map(|(i, s)| (s.vertices.as_slice(), i))
        .collect();

    // Columns as sorted row-index lists.
    let mut columns: Vec<Vec<usize>> = simplices
        .iter()
        .map(|s| {
            if s.vertices.len() == 1 {
                return Vec::new();
            }
            let mut rows: Vec<usize> = (0..s.vertices.len())
                .map(|skip| {
                    let face: Vec<usize> = s
                        .vertices
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    index[face.as_slice()]
                })
                .collect();
            rows.sort_unstable();
            rows
        })
        .collect();

    let mut owner_of_low: HashMap<usize, usize> = HashMap::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match owner_of_low.get(&low) {
                Some(&k) => {
                    let other = columns[k].clone();
                    columns[j] = symmetric_difference(&columns[j], &other);
                }
                None => {
                    owner_of_low.insert(low, j);
                    break;
                }
            }
        }
    }

    let mut pairs: Vec<Vec<BirthDeath>> = vec![Vec::new(); max_dim + 1];
    for (&low, &j) in &owner_of_low {
        let dim = simplices[low].vertices.len() - 1;
        let (birth, death) = (simplices[low].diam, simplices[j].diam);
        if dim <= max_dim && death > birth {
            pairs[dim].push(BirthDeath::new(birth, death));
        }
    }
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(dim, p)| PersistenceDiagram::new(dim, p))
        .collect())
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
