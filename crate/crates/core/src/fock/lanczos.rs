// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Restarted Lanczos with full reorthogonalization for the lowest eigenpair of a real
//! symmetric sparse matrix.

use nalgebra::{DMatrix, SymmetricEigen};

use super::SparseOp;

const KRYLOV_DIM: usize = 160;
const MAX_RESTARTS: usize = 40;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    n
}

/// Lowest eigenvalue and unit eigenvector. `tol` bounds the residual
/// `‖H x − θ x‖` relative to the row-sum norm of `H`.
pub(crate) fn lowest_eigenpair(h: &SparseOp, start: &[f64], tol: f64) -> (f64, Vec<f64>) {
    let dim = h.dim;
    let scale = h.norm_bound().max(f64::MIN_POSITIVE);
    let mut x = start.to_vec();
    normalize(&mut x);
    let mut theta = 0.0;
    let mut w = vec![0.0; dim];

    for _ in 0..MAX_RESTARTS {
        let m_max = KRYLOV_DIM.min(dim);
        let mut basis: Vec<Vec<f64>> = vec![x.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for k in 0..m_max {
            h.apply_real(&basis[k], &mut w);
            let a = dot(&w, &basis[k]);
            alpha.push(a);
            // Full reorthogonalization, twice for stability.
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let b = dot(&w, &w).sqrt();
            if k + 1 == m_max || b <= 1e-14 * scale {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|v| v / b).collect());
        }

        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let k = eig.eigenvalues.imin();
        theta = eig.eigenvalues[k];
        let y = eig.eigenvectors.column(k);
        x = vec![0.0; dim];
        for (j, q) in basis.iter().take(m).enumerate() {
            x.iter_mut().zip(q).for_each(|(xi, qi)| *xi += y[j] * qi);
        }
        normalize(&mut x);

        h.apply_real(&x, &mut w);
        let residual = w.iter().zip(&x).map(|(hx, xi)| (hx - theta * xi).powi(2)).sum::<f64>().sqrt();
        if residual <= tol * scale {
            break;
        }
    }
    (theta, x)
}
