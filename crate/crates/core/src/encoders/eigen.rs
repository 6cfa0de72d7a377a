//! Cyclic Jacobi eigen-decomposition for dense symmetric matrices.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const REL_TOL: f64 = 1e-12;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub dim: usize,
    pub values: Vec<f64>,
    /// Column-major: eigenvector `k` is `vectors[k * dim..(k + 1) * dim]`.
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }
}

/// Decomposes the row-major symmetric `dim x dim` matrix. Iterates until every
/// off-diagonal magnitude is below `1e-12 * max |diag|`.
pub fn symmetric_eigen(matrix: &[f64], dim: usize) -> Result<SymmetricEigen> {
    assert_eq!(matrix.len(), dim * dim, "matrix is not dim x dim");
    let mut a = matrix.to_vec();
    // v is row-major with eigenvectors in columns while iterating.
    let mut v = vec![0.0f64; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }

    let mut converged = dim < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = a[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * dim + q] - a[p * dim + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
                a[p * dim + q] = 0.0;
                a[q * dim + p] = 0.0;
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_diagonal_converged(&a, dim);
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| a[j * dim + j].total_cmp(&a[i * dim + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * dim + i]).collect();
    let mut vectors = Vec::with_capacity(dim * dim);
    for &col in &order {
        vectors.extend((0..dim).map(|row| v[row * dim + col]));
    }
    Ok(SymmetricEigen {
        dim,
        values,
        vectors,
    })
}

fn off_diagonal_converged(a: &[f64], dim: usize) -> bool {
    let scale = (0..dim)
        .map(|i| a[i * dim + i].abs())
        .fold(0.0f64, f64::max);
    let limit = REL_TOL * scale;
    (0..dim).all(|p| (0..dim).all(|q| p == q || a[p * dim + q].abs() <= limit))
}
