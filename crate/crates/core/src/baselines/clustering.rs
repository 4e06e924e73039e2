use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;

use crate::cloud::LabeledPointCloud;
use crate::error::{Error, Result};

fn euclidean(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Sorted distinct labels and, per row, the index of its label in that list.
fn dense_labels(labels: &[u32]) -> (Vec<u32>, Vec<usize>) {
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let idx = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label present"))
        .collect();
    (classes, idx)
}

/// One minus the mean silhouette width.
///
/// Singleton classes contribute a width of zero. Lower values indicate tighter,
/// better-separated classes.
pub fn silhouette_adjusted(cloud: &LabeledPointCloud) -> Result<f64> {
    let (classes, idx) = dense_labels(cloud.labels());
    if classes.len() < 2 {
        return Err(Error::UndefinedScore(
            "silhouette needs at least two classes",
        ));
    }
    let k = classes.len();
    let mut sizes = vec![0usize; k];
    for &c in &idx {
        sizes[c] += 1;
    }
    let points = cloud.points();
    let widths: Vec<f64> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let own = idx[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            let pi = points.row(i);
            for j in 0..cloud.len() {
                if j != i {
                    sums[idx[j]] += euclidean(pi, points.row(j));
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect();
    let mean = widths.iter().sum::<f64>() / widths.len() as f64;
    Ok(1.0 - mean)
}

/// Davies-Bouldin index with mean-distance-to-centroid scatter.
pub fn davies_bouldin(cloud: &LabeledPointCloud) -> Result<f64> {
    let (classes, idx) = dense_labels(cloud.labels());
    let k = classes.len();
    if k < 2 {
        return Err(Error::UndefinedScore(
            "Davies-Bouldin needs at least two classes",
        ));
    }
    let points = cloud.points();
    let mut centroids = Array2::<f64>::zeros((k, cloud.dim()));
    let mut sizes = vec![0usize; k];
    for (row, &c) in points.axis_iter(Axis(0)).zip(&idx) {
        let mut target = centroids.row_mut(c);
        target += &row;
        sizes[c] += 1;
    }
    for (mut c, &s) in centroids.axis_iter_mut(Axis(0)).zip(&sizes) {
        c /= s as f64;
    }
    let mut scatter = Array1::<f64>::zeros(k);
    for (row, &c) in points.axis_iter(Axis(0)).zip(&idx) {
        scatter[c] += euclidean(row, centroids.row(c));
    }
    for (s, &n) in scatter.iter_mut().zip(&sizes) {
        *s /= n as f64;
    }

    let mut total = 0.0;
    for a in 0..k {
        let mut worst = 0.0f64;
        for b in 0..k {
            if a == b {
                continue;
            }
            let gap = euclidean(centroids.row(a), centroids.row(b));
            if gap == 0.0 {
                let (x, y) = (classes[a.min(b)], classes[a.max(b)]);
                return Err(Error::DegenerateCentroid { a: x, b: y });
            }
            worst = worst.max((scatter[a] + scatter[b]) / gap);
        }
        total += worst;
    }
    Ok(total / k as f64)
}
