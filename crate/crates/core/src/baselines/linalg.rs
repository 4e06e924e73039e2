use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Pivots at or below this fraction of the largest diagonal entry count as zero.
const RELATIVE_PIVOT_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor `L` with `A = L L^T`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Cholesky {
    lower: Array2<f64>,
}

impl Cholesky {
    pub(crate) fn factor(a: ArrayView2<'_, f64>) -> Result<Self> {
        let n = a.nrows();
        let max_diag = a.diag().iter().copied().fold(0.0, f64::max);
        let tol = RELATIVE_PIVOT_TOL * max_diag;
        let mut l = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            let row_j = l.row(j);
            let mut pivot = a[[j, j]];
            for k in 0..j {
                pivot -= row_j[k] * row_j[k];
            }
            if pivot.is_nan() || pivot <= tol {
                return Err(Error::SingularCovariance { row: j, pivot });
            }
            let ljj = pivot.sqrt();
            l[[j, j]] = ljj;
            for i in j + 1..n {
                let mut s = a[[i, j]];
                for k in 0..j {
                    s -= l[[i, k]] * l[[j, k]];
                }
                l[[i, j]] = s / ljj;
            }
        }
        Ok(Self { lower: l })
    }

    /// Solves `L y = b` by forward substitution.
    pub(crate) fn forward(&self, b: ArrayView1<'_, f64>) -> Array1<f64> {
        let n = b.len();
        let mut y = Array1::<f64>::zeros(n);
        for i in 0..n {
            let row = self.lower.row(i);
            let mut s = b[i];
            for k in 0..i {
                s -= row[k] * y[k];
            }
            y[i] = s / row[i];
        }
        y
    }

    /// `b^T A^{-1} b`, computed as `|L^{-1} b|^2`.
    pub(crate) fn inverse_quadratic_form(&self, b: ArrayView1<'_, f64>) -> f64 {
        self.forward(b).iter().map(|v| v * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn factor_and_solve() {
        let a = array![[4.0, 2.0], [2.0, 3.0]];
        let c = Cholesky::factor(a.view()).unwrap();
        let l = &c.lower;
        let back = l.dot(&l.t());
        assert!((back - &a).iter().all(|v| v.abs() < 1e-14));
        // A^{-1} = 1/8 [[3, -2], [-2, 4]]; b = (1, 1) -> (3 - 4 + 4) / 8
        let q = c.inverse_quadratic_form(array![1.0, 1.0].view());
        assert!((q - 3.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn singular() {
        let a = array![[2.0 / 3.0, 2.0 / 3.0], [2.0 / 3.0, 2.0 / 3.0]];
        assert!(matches!(
            Cholesky::factor(a.view()),
            Err(Error::SingularCovariance { row: 1, .. })
        ));
        assert!(Cholesky::factor(array![[0.0]].view()).is_err());
    }
}
