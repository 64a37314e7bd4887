// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Quadrature conventions and Gaussian-state metrics.
//!
//! Every covariance matrix in the crate uses the fixed ordering `(X_a, Y_a, X_b, Y_b)`
//! with `X_θ = (e^{-iθ} a + e^{iθ} a†)/√2`, so `X = X_0` and `Y = X_{π/2}`.
//! Entries are `V_ij = ⟨x_i x_j + x_j x_i⟩/2 − ⟨x_i⟩⟨x_j⟩`; the vacuum is `I/2`.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};

use crate::error::{Error, Result};

/// Variance of a single vacuum quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;
/// Variance of a vacuum two-mode combination such as `X_a − X_b`.
pub const VACUUM_TWO_MODE_VARIANCE: f64 = 1.0;
/// EPR variance of the vacuum.
pub const VACUUM_EPR: f64 = 2.0;
/// Slack allowed below 1/2 when deciding physicality.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;

/// Index of each quadrature in the fixed basis ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Xa = 0,
    Ya = 1,
    Xb = 2,
    Yb = 3,
}

/// Symplectic form pairing `(X_a, Y_a)` and `(X_b, Y_b)`.
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Real symmetric 4×4 covariance matrix over `(X_a, Y_a, X_b, Y_b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(Matrix4<f64>);

impl CovarianceMatrix {
    /// Wraps `m` after symmetrizing it.
    pub fn new(m: Matrix4<f64>) -> Self {
        CovarianceMatrix((m + m.transpose()) * 0.5)
    }

    pub fn vacuum() -> Self {
        CovarianceMatrix(Matrix4::identity() * VACUUM_VARIANCE)
    }

    /// Product of two thermal modes with the given symplectic eigenvalues.
    pub fn thermal(nu_a: f64, nu_b: f64) -> Self {
        CovarianceMatrix(Matrix4::from_diagonal(&nalgebra::Vector4::new(nu_a, nu_a, nu_b, nu_b)))
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn get(&self, i: Quadrature, j: Quadrature) -> f64 {
        self.0[(i as usize, j as usize)]
    }

    /// Variance of the linear combination `Σ c_i x_i`.
    pub fn variance_of(&self, c: [f64; 4]) -> f64 {
        let v = nalgebra::Vector4::from(c);
        v.dot(&(self.0 * v))
    }

    /// 2×2 covariance of the pair of combinations `(Σ u_i x_i, Σ w_i x_i)`.
    pub fn pair_block(&self, u: [f64; 4], w: [f64; 4]) -> Matrix2<f64> {
        let u = nalgebra::Vector4::from(u);
        let w = nalgebra::Vector4::from(w);
        let cross = u.dot(&(self.0 * w));
        Matrix2::new(u.dot(&(self.0 * u)), cross, cross, w.dot(&(self.0 * w)))
    }

    /// The two symplectic eigenvalues in ascending order.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        symplectic_eigenvalues(self)
    }

    /// Checks `V + (i/2)Ω ≥ 0` through the symplectic spectrum.
    pub fn check_physical(&self) -> Result<()> {
        let (lo, hi) = self.symplectic_eigenvalues();
        for (index, value) in [lo, hi].into_iter().enumerate() {
            if !(value >= VACUUM_VARIANCE - PHYSICALITY_TOLERANCE) {
                return Err(Error::Unphysical { index, value });
            }
        }
        Ok(())
    }

    pub fn is_physical(&self) -> bool {
        self.check_physical().is_ok()
    }

    /// Largest absolute entry difference to `other`.
    pub fn max_abs_diff(&self, other: &CovarianceMatrix) -> f64 {
        (self.0 - other.0).abs().max()
    }
}

impl From<Matrix4<f64>> for CovarianceMatrix {
    fn from(m: Matrix4<f64>) -> Self {
        CovarianceMatrix::new(m)
    }
}

/// `10·log10(variance / vacuum_reference)`.
pub fn squeezing_db(variance: f64, vacuum_reference: f64) -> Result<f64> {
    if !(variance > 0.0) || !(vacuum_reference > 0.0) {
        return Err(Error::Domain(format!(
            "squeezing_db needs positive inputs, got variance = {variance}, reference = {vacuum_reference}"
        )));
    }
    Ok(10.0 * (variance / vacuum_reference).log10())
}

/// Sign convention of the EPR combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprSign {
    /// `Var(X_a − X_b) + Var(Y_a + Y_b)`.
    MinusPlus,
    /// `Var(X_a + X_b) + Var(Y_a − Y_b)`.
    PlusMinus,
}

impl EprSign {
    pub const BOTH: [EprSign; 2] = [EprSign::MinusPlus, EprSign::PlusMinus];
}

fn epr_unchecked(v: &CovarianceMatrix, sign: EprSign) -> f64 {
    let s = match sign {
        EprSign::MinusPlus => 1.0,
        EprSign::PlusMinus => -1.0,
    };
    v.variance_of([1.0, 0.0, -s, 0.0]) + v.variance_of([0.0, 1.0, 0.0, s])
}

/// EPR variance for the chosen sign; rejects unphysical input.
pub fn epr_variance(v: &CovarianceMatrix, sign: EprSign) -> Result<f64> {
    v.check_physical()?;
    Ok(epr_unchecked(v, sign))
}

/// Symplectic eigenvalues `ν_1 ≤ ν_2`.
///
/// For positive-definite `V` these are the singular values of `V^{1/2} Ω V^{1/2}`, which
/// stays accurate when the two values coincide. Otherwise the moduli of the eigenvalues
/// of `ΩV` are used.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> (f64, f64) {
    let eig = SymmetricEigen::new(v.0);
    let omega = symplectic_form();
    if eig.eigenvalues.min() > 0.0 {
        let sqrt_diag = Matrix4::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let root = eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
        let k = root * omega * root;
        let gram = SymmetricEigen::new(k.transpose() * k);
        let mut nu: Vec<f64> = gram.eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
        nu.sort_by(f64::total_cmp);
        return ((nu[0] + nu[1]) * 0.5, (nu[2] + nu[3]) * 0.5);
    }
    let mut nu: Vec<f64> = (omega * v.0).complex_eigenvalues().iter().map(|z| z.norm()).collect();
    nu.sort_by(f64::total_cmp);
    ((nu[0] + nu[1]) * 0.5, (nu[2] + nu[3]) * 0.5)
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Rotates each mode's phase-space distribution counter-clockwise by `θ_a`, `θ_b`.
///
/// This is the covariance after `a → a e^{iθ_a}`, `b → b e^{iθ_b}`; a state whose
/// major axis lies along `X` ends up with its major axis at angle `θ`.
pub fn rotate_quadrature(v: &CovarianceMatrix, theta_a: f64, theta_b: f64) -> CovarianceMatrix {
    let mut r = Matrix4::zeros();
    r.fixed_view_mut::<2, 2>(0, 0).copy_from(&rotation(theta_a));
    r.fixed_view_mut::<2, 2>(2, 2).copy_from(&rotation(theta_b));
    CovarianceMatrix::new(r * v.0 * r.transpose())
}

/// Single-mode, two-mode and EPR variances of a state, in absolute units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingReport {
    pub var_xa: f64,
    pub var_ya: f64,
    pub var_xb: f64,
    pub var_yb: f64,
    /// `Var(X_a − X_b)`
    pub var_xminus: f64,
    /// `Var(X_a + X_b)`
    pub var_xplus: f64,
    /// `Var(Y_a + Y_b)`
    pub var_yplus: f64,
    /// `Var(Y_a − Y_b)`
    pub var_yminus: f64,
    pub epr_minus_plus: f64,
    pub epr_plus_minus: f64,
}

/// Converts to dB, clamping at the reporting floor instead of failing on zero.
pub fn db_clamped(variance: f64, reference: f64) -> f64 {
    const FLOOR_DB: f64 = -140.0;
    if variance <= 0.0 {
        return FLOOR_DB;
    }
    (10.0 * (variance / reference).log10()).max(FLOOR_DB)
}

impl SqueezingReport {
    pub fn new(v: &CovarianceMatrix) -> Self {
        let var_xminus = v.variance_of([1.0, 0.0, -1.0, 0.0]);
        let var_xplus = v.variance_of([1.0, 0.0, 1.0, 0.0]);
        let var_yplus = v.variance_of([0.0, 1.0, 0.0, 1.0]);
        let var_yminus = v.variance_of([0.0, 1.0, 0.0, -1.0]);
        SqueezingReport {
            var_xa: v.get(Quadrature::Xa, Quadrature::Xa),
            var_ya: v.get(Quadrature::Ya, Quadrature::Ya),
            var_xb: v.get(Quadrature::Xb, Quadrature::Xb),
            var_yb: v.get(Quadrature::Yb, Quadrature::Yb),
            var_xminus,
            var_xplus,
            var_yplus,
            var_yminus,
            epr_minus_plus: var_xminus + var_yplus,
            epr_plus_minus: var_xplus + var_yminus,
        }
    }

    pub fn epr(&self, sign: EprSign) -> f64 {
        match sign {
            EprSign::MinusPlus => self.epr_minus_plus,
            EprSign::PlusMinus => self.epr_plus_minus,
        }
    }

    /// Smaller of the two EPR conventions.
    pub fn epr_min(&self) -> f64 {
        self.epr_minus_plus.min(self.epr_plus_minus)
    }

    /// Single-mode variances `[X_a, Y_a, X_b, Y_b]` in dB relative to 1/2.
    pub fn single_mode_db(&self) -> [f64; 4] {
        [self.var_xa, self.var_ya, self.var_xb, self.var_yb].map(|x| db_clamped(x, VACUUM_VARIANCE))
    }

    /// Two-mode variances `[X_a−X_b, Y_a+Y_b, X_a+X_b, Y_a−Y_b]` in dB relative to 1.
    pub fn two_mode_db(&self) -> [f64; 4] {
        [self.var_xminus, self.var_yplus, self.var_xplus, self.var_yminus]
            .map(|x| db_clamped(x, VACUUM_TWO_MODE_VARIANCE))
    }

    /// EPR variances `[minus_plus, plus_minus]` in dB relative to 2.
    pub fn epr_db(&self) -> [f64; 2] {
        [self.epr_minus_plus, self.epr_plus_minus].map(|x| db_clamped(x, VACUUM_EPR))
    }
}
