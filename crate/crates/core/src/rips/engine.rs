//! Optimized Rips persistence.
//!
//! H0 comes from Kruskal's algorithm over the sorted edge list. H1 is computed as
//! persistent cohomology: coboundary columns of edges are reduced in reverse filtration
//! order with the pivot being the earliest coface triangle. Coboundaries are enumerated
//! on the fly and never stored. Two shortcuts keep the work small:
//!
//! * clearing: edges that kill an H0 class (the spanning tree edges) are skipped, since
//!   they are already paired one dimension down;
//! * apparent pairs: when the earliest coface of an edge is not yet claimed as a pivot,
//!   the column is reduced as-is and no heap is built.

use std::cmp::{Ordering, Reverse};
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use super::{BirthDeath, DistanceMatrix, PersistenceDiagram};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Edge {
    diam: f64,
    u: u32,
    v: u32,
}

/// Edges `u < v` in filtration order: by length, then lexicographically.
fn sorted_edges(dm: &DistanceMatrix) -> Vec<Edge> {
    let n = dm.len();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push(Edge {
                diam: dm.get(u, v),
                u: u as u32,
                v: v as u32,
            });
        }
    }
    edges.sort_unstable_by(|a, b| {
        a.diam
            .total_cmp(&b.diam)
            .then(a.u.cmp(&b.u))
            .then(a.v.cmp(&b.v))
    });
    edges
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }
}

/// Marks spanning-tree edges and returns the H0 pairs they produce.
fn h0_from_edges(n: usize, edges: &[Edge]) -> (Vec<BirthDeath>, Vec<bool>) {
    let mut uf = UnionFind::new(n);
    let mut tree = vec![false; edges.len()];
    let mut pairs = Vec::with_capacity(n.saturating_sub(1));
    let mut merges = 0;
    for (idx, e) in edges.iter().enumerate() {
        if uf.union(e.u, e.v) {
            tree[idx] = true;
            if e.diam > 0.0 {
                pairs.push(BirthDeath::new(0.0, e.diam));
            }
            merges += 1;
            if merges + 1 == n {
                break;
            }
        }
    }
    (pairs, tree)
}

/// Dimension-0 diagram: one `(0, w)` pair per minimum spanning tree edge of weight `w`.
///
/// For `n` distinct points this yields exactly `n - 1` pairs; coincident points merge at
/// radius zero and their zero-persistence pairs are dropped.
pub fn h0_persistence(dm: &DistanceMatrix) -> Result<PersistenceDiagram> {
    if dm.is_empty() {
        return Err(Error::EmptyInput("distance matrix has no points"));
    }
    let edges = sorted_edges(dm);
    let (pairs, _) = h0_from_edges(dm.len(), &edges);
    Ok(PersistenceDiagram::new(0, pairs))
}

/// A triangle keyed by its filtration position: diameter, then lexicographic vertex order.
#[derive(Debug, Clone, Copy)]
struct Coface {
    diam: f64,
    id: u64,
}

impl PartialEq for Coface {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Coface {}

impl PartialOrd for Coface {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Coface {
    fn cmp(&self, other: &Self) -> Ordering {
        self.diam
            .total_cmp(&other.diam)
            .then(self.id.cmp(&other.id))
    }
}

struct CohomologyH1<'a> {
    dm: &'a DistanceMatrix,
    n: u64,
    edges: &'a [Edge],
}

impl CohomologyH1<'_> {
    #[inline]
    fn triangle_id(&self, a: u32, b: u32, c: u32) -> u64 {
        let (mut x, mut y, mut z) = (a as u64, b as u64, c as u64);
        if x > y {
            std::mem::swap(&mut x, &mut y);
        }
        if y > z {
            std::mem::swap(&mut y, &mut z);
        }
        if x > y {
            std::mem::swap(&mut x, &mut y);
        }
        (x * self.n + y) * self.n + z
    }

    #[inline]
    fn cofaces(&self, edge: u32) -> impl Iterator<Item = Coface> + '_ {
        let e = self.edges[edge as usize];
        let (ru, rv) = (self.dm.row(e.u as usize), self.dm.row(e.v as usize));
        (0..self.n as u32)
            .filter(move |&w| w != e.u && w != e.v)
            .map(move |w| Coface {
                diam: e.diam.max(ru[w as usize]).max(rv[w as usize]),
                id: self.triangle_id(e.u, e.v, w),
            })
    }

    fn earliest_coface(&self, edge: u32) -> Option<Coface> {
        self.cofaces(edge).min()
    }

    fn push_coboundary(&self, heap: &mut BinaryHeap<Reverse<Coface>>, edge: u32) {
        heap.extend(self.cofaces(edge).map(Reverse));
    }

    fn run(&self, tree: &[bool]) -> Vec<BirthDeath> {
        let mut pivots: HashMap<u64, u32> = HashMap::new();
        // Reduction matrix columns, only for columns that needed additions.
        let mut reductions: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut pairs = Vec::new();
        let mut heap = BinaryHeap::new();
        let mut added: Vec<u32> = Vec::new();

        for col in (0..self.edges.len() as u32).rev() {
            if tree[col as usize] {
                continue;
            }
            let birth = self.edges[col as usize].diam;
            let Some(first) = self.earliest_coface(col) else {
                continue;
            };
            if let Entry::Vacant(slot) = pivots.entry(first.id) {
                slot.insert(col);
                if first.diam > birth {
                    pairs.push(BirthDeath::new(birth, first.diam));
                }
                continue;
            }

            heap.clear();
            added.clear();
            self.push_coboundary(&mut heap, col);
            loop {
                match pop_pivot(&mut heap) {
                    None => break, // essential; cannot occur on the full complex
                    Some(pivot) => match pivots.get(&pivot.id) {
                        Some(&other) => {
                            heap.push(Reverse(pivot));
                            self.push_coboundary(&mut heap, other);
                            added.push(other);
                            if let Some(extra) = reductions.get(&other) {
                                for &e in extra {
                                    self.push_coboundary(&mut heap, e);
                                    added.push(e);
                                }
                            }
                        }
                        None => {
                            pivots.insert(pivot.id, col);
                            if pivot.diam > birth {
                                pairs.push(BirthDeath::new(birth, pivot.diam));
                            }
                            reduce_mod2(&mut added);
                            if !added.is_empty() {
                                reductions.insert(col, added.clone());
                            }
                            break;
                        }
                    },
                }
            }
        }
        pairs
    }
}

/// Pops the smallest entry with odd multiplicity, discarding cancelling duplicates.
fn pop_pivot(heap: &mut BinaryHeap<Reverse<Coface>>) -> Option<Coface> {
    while let Some(Reverse(top)) = heap.pop() {
        match heap.peek() {
            Some(Reverse(next)) if *next == top => {
                heap.pop();
            }
            _ => return Some(top),
        }
    }
    None
}

fn reduce_mod2(v: &mut Vec<u32>) {
    v.sort_unstable();
    let mut out = Vec::with_capacity(v.len());
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(v[i]);
        }
        i = j;
    }
    *v = out;
}

fn check_threshold(dm: &DistanceMatrix, threshold: f64) -> Result<()> {
    let required = dm.diameter();
    if threshold.is_nan() || threshold < required {
        return Err(Error::Threshold {
            threshold,
            required,
        });
    }
    Ok(())
}

fn h1_from_edges(dm: &DistanceMatrix, edges: &[Edge], tree: &[bool]) -> PersistenceDiagram {
    let engine = CohomologyH1 {
        dm,
        n: dm.len() as u64,
        edges,
    };
    PersistenceDiagram::new(1, engine.run(tree))
}

/// Dimension-1 diagram of the Rips filtration up to `threshold`.
///
/// `threshold` must reach the largest pairwise distance. Every one-cycle is filled by
/// then (in fact already by the enclosing radius), so all pairs are finite.
pub fn h1_persistence(dm: &DistanceMatrix, threshold: f64) -> Result<PersistenceDiagram> {
    if dm.is_empty() {
        return Err(Error::EmptyInput("distance matrix has no points"));
    }
    check_threshold(dm, threshold)?;
    let edges = sorted_edges(dm);
    let (_, tree) = h0_from_edges(dm.len(), &edges);
    Ok(h1_from_edges(dm, &edges, &tree))
}

/// Diagrams `[P0]` or `[P0, P1]` for `max_dim` 0 or 1.
pub fn rips_persistence(dm: &DistanceMatrix, max_dim: usize) -> Result<Vec<PersistenceDiagram>> {
    if max_dim > 1 {
        return Err(Error::Config(format!(
            "homology dimension {max_dim} is not supported (max 1)"
        )));
    }
    if dm.is_empty() {
        return Err(Error::EmptyInput("distance matrix has no points"));
    }
    let edges = sorted_edges(dm);
    let (h0, tree) = h0_from_edges(dm.len(), &edges);
    let mut out = vec![PersistenceDiagram::new(0, h0)];
    if max_dim == 1 {
        out.push(h1_from_edges(dm, &edges, &tree));
    }
    Ok(out)
}
