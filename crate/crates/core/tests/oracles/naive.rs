//! Double-loop reference implementations of the baseline scores.
//!
//! Shared by the core integration tests and the workspace acceptance suite.

#![allow(dead_code, clippy::needless_range_loop)]

use ndarray::{Array1, Array2, ArrayView1};

pub fn dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]).powi(2);
    }
    s.sqrt()
}

pub fn naive_alid(pts: &Array2<f64>, j: usize, k: usize) -> f64 {
    let mut d: Vec<f64> = (0..pts.nrows())
        .filter(|&i| i != j)
        .map(|i| dist(pts.row(i), pts.row(j)))
        .collect();
    d.sort_by(f64::total_cmp);
    let rk = d[k - 1];
    let mut s = 0.0;
    for &r in &d[..k] {
        s += (r / rk).ln();
    }
    rk * (-s / k as f64)
}

pub fn mean_over_max(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::MIN, f64::max);
    v.iter().sum::<f64>() / v.len() as f64 / max
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(m: &Array2<f64>) -> Array2<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut inv = Array2::<f64>::eye(n);
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[[x, c]].abs().total_cmp(&a[[y, c]].abs()))
            .unwrap();
        for j in 0..n {
            a.swap([c, j], [p, j]);
            inv.swap([c, j], [p, j]);
        }
        let piv = a[[c, c]];
        for j in 0..n {
            a[[c, j]] /= piv;
            inv[[c, j]] /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = a[[r, c]];
                for j in 0..n {
                    a[[r, j]] -= f * a[[c, j]];
                    inv[[r, j]] -= f * inv[[c, j]];
                }
            }
        }
    }
    inv
}

pub fn naive_ams(pts: &Array2<f64>, eps: f64) -> Vec<f64> {
    let (n, d) = pts.dim();
    let mut mu = vec![0.0; d];
    for i in 0..n {
        for h in 0..d {
            mu[h] += pts[[i, h]] / n as f64;
        }
    }
    let mut cov = Array2::<f64>::zeros((d, d));
    for i in 0..n {
        for a in 0..d {
            for b in 0..d {
                cov[[a, b]] += (pts[[i, a]] - mu[a]) * (pts[[i, b]] - mu[b]) / n as f64;
            }
        }
    }
    for a in 0..d {
        cov[[a, a]] += eps;
    }
    let inv = inverse(&cov);
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for a in 0..d {
                for b in 0..d {
                    s += (pts[[i, a]] - mu[a]) * inv[[a, b]] * (pts[[i, b]] - mu[b]);
                }
            }
            s
        })
        .collect()
}

pub fn naive_silhouette(pts: &Array2<f64>, labels: &[u32]) -> f64 {
    let n = pts.nrows();
    let mut classes = labels.to_vec();
    classes.sort();
    classes.dedup();
    let mut total = 0.0;
    for i in 0..n {
        let own = labels.iter().filter(|&&l| l == labels[i]).count();
        if own == 1 {
            continue;
        }
        let mut a = 0.0;
        for j in 0..n {
            if j != i && labels[j] == labels[i] {
                a += dist(pts.row(i), pts.row(j));
            }
        }
        a /= (own - 1) as f64;
        let mut b = f64::INFINITY;
        for &c in &classes {
            if c == labels[i] {
                continue;
            }
            let (mut s, mut m) = (0.0, 0);
            for j in 0..n {
                if labels[j] == c {
                    s += dist(pts.row(i), pts.row(j));
                    m += 1;
                }
            }
            b = b.min(s / m as f64);
        }
        total += (b - a) / a.max(b);
    }
    1.0 - total / n as f64
}

pub fn naive_dbi(pts: &Array2<f64>, labels: &[u32]) -> f64 {
    let mut classes = labels.to_vec();
    classes.sort();
    classes.dedup();
    let d = pts.ncols();
    let mut cents = Vec::new();
    let mut scat = Vec::new();
    for &c in &classes {
        let rows: Vec<usize> = (0..pts.nrows()).filter(|&i| labels[i] == c).collect();
        let mut m = Array1::<f64>::zeros(d);
        for &i in &rows {
            m = m + pts.row(i);
        }
        m /= rows.len() as f64;
        let s = rows
            .iter()
            .map(|&i| dist(pts.row(i), m.view()))
            .sum::<f64>()
            / rows.len() as f64;
        cents.push(m);
        scat.push(s);
    }
    let k = classes.len();
    let mut total = 0.0;
    for a in 0..k {
        let mut worst = 0.0f64;
        for b in 0..k {
            if a != b {
                worst = worst.max((scat[a] + scat[b]) / dist(cents[a].view(), cents[b].view()));
            }
        }
        total += worst;
    }
    total / k as f64
}
