// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time-domain steady state: `A_q V + V A_qᵀ + D_q = 0` in the real quadrature basis.

use nalgebra::{Matrix4, SMatrix, SVector};

use super::{drift_matrix, stability_check, SimParams};
use crate::error::{Error, Result};
use crate::groundstate::quadrature_transform;
use crate::quad::CovarianceMatrix;

/// Drift in the quadrature basis, `A_q = Q A Q†`.
pub fn quadrature_drift(p: &SimParams) -> Matrix4<f64> {
    let q = quadrature_transform();
    (q * drift_matrix(p).a * q.adjoint()).map(|z| z.re)
}

/// Symmetrized diffusion `D_q = B_q N_q B_qᵀ` of the vacuum (or thermal) inputs.
fn quadrature_diffusion(p: &SimParams) -> Matrix4<f64> {
    let line = [p.gamma_a, p.gamma_a, p.gamma_b, p.gamma_b];
    let bath = p.gamma_l * (2.0 * p.thermal_occupancy + 1.0);
    Matrix4::from_diagonal(&nalgebra::Vector4::from(line.map(|g| 0.5 * (g + bath))))
}

/// Steady-state intracavity covariance from the Lyapunov equation.
pub fn lyapunov_steady_state(p: &SimParams) -> Result<CovarianceMatrix> {
    p.validate()?;
    let report = stability_check(p);
    if !report.stable {
        return Err(Error::Unstable { margin: report.margin });
    }
    let a = quadrature_drift(p);
    let d = quadrature_diffusion(p);
    // vec(AV + VAᵀ) = (I ⊗ A + A ⊗ I) vec(V), column-major.
    let mut k = SMatrix::<f64, 16, 16>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            for m in 0..4 {
                k[(j * 4 + i, j * 4 + m)] += a[(i, m)];
                k[(j * 4 + i, m * 4 + i)] += a[(j, m)];
            }
        }
    }
    let rhs = SVector::<f64, 16>::from_iterator(d.iter().map(|x| -x));
    let vec_v = k.lu().solve(&rhs).ok_or(Error::Singular { omega: 0.0 })?;
    Ok(CovarianceMatrix::new(Matrix4::from_iterator(vec_v.iter().copied())))
}
