// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed-system ground state of
//! `H = ω_α a†a + ω_β b†b + G (a + a†)(b + b†)`.
//!
//! The Hopfield matrix `M` is the dynamical matrix of the Heisenberg equations
//! `i d/dt (a, b, a†, b†) = M (a, b, a†, b†)`. An eigenmode
//! `p = t a + u b + v a† + w b†` with `[p, H] = ω p` has its coefficient vector as an
//! eigenvector of `Mᵀ`. Positive-frequency eigenvectors, normalized to
//! `|t|² + |u|² − |v|² − |w|² = 1`, define the polariton operators whose common vacuum
//! is the ground state.

use nalgebra::{Matrix4, Vector4, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::quad::{CovarianceMatrix, SqueezingReport};

/// Couplings this close (relative to `√(ω_α ω_β)`) to the validity edge are rejected.
pub const VALIDITY_MARGIN: f64 = 1e-6;

const BOGOLIUBOV_METRIC: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateParams {
    pub omega_alpha: f64,
    pub omega_beta: f64,
    pub coupling: f64,
}

impl GroundStateParams {
    pub fn new(omega_alpha: f64, omega_beta: f64, coupling: f64) -> Result<Self> {
        let finite = omega_alpha.is_finite() && omega_beta.is_finite() && coupling.is_finite();
        if !finite || omega_alpha <= 0.0 || omega_beta <= 0.0 || coupling < 0.0 {
            return Err(Error::Domain(format!(
                "need omega_alpha > 0, omega_beta > 0, G >= 0; got ({omega_alpha}, {omega_beta}, {coupling})"
            )));
        }
        Ok(GroundStateParams { omega_alpha, omega_beta, coupling })
    }

    /// Degenerate modes `ω_α = ω_β = δ`.
    pub fn degenerate(delta: f64, coupling: f64) -> Result<Self> {
        Self::new(delta, delta, coupling)
    }

    pub fn is_degenerate(&self) -> bool {
        self.omega_alpha == self.omega_beta
    }

    /// Coupling at which the lower polariton frequency reaches zero: `√(ω_α ω_β)/2`.
    pub fn validity_bound(&self) -> f64 {
        0.5 * (self.omega_alpha * self.omega_beta).sqrt()
    }

    /// Whether the coupling sits safely below the validity bound.
    pub fn is_valid(&self) -> bool {
        let scale = (self.omega_alpha * self.omega_beta).sqrt();
        self.coupling < self.validity_bound() - VALIDITY_MARGIN * scale
    }

    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::new(self.omega_alpha, self.omega_beta, coupling)
    }
}

/// Dynamical matrix of the Heisenberg equations over `(a, b, a†, b†)`.
pub fn hopfield_matrix(p: &GroundStateParams) -> Matrix4<f64> {
    let (wa, wb, g) = (p.omega_alpha, p.omega_beta, p.coupling);
    Matrix4::new(
        wa, g, 0.0, g, //
        g, wb, g, 0.0, //
        0.0, -g, -wa, -g, //
        -g, 0.0, -g, -wb,
    )
}

/// Numerical eigenvalues of the Hopfield matrix.
pub fn hopfield_eigenvalues(p: &GroundStateParams) -> Vec<Complex64> {
    hopfield_matrix(p)
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect()
}

/// One polariton: coefficients `(t, u, v, w)` and its eigenfrequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polariton {
    pub coeffs: Vector4<f64>,
    pub frequency: f64,
}

impl Polariton {
    pub fn bose_norm(&self) -> f64 {
        bose_product(&self.coeffs, &self.coeffs)
    }
}

fn bose_product(x: &Vector4<f64>, y: &Vector4<f64>) -> f64 {
    (0..4).map(|i| BOGOLIUBOV_METRIC[i] * x[i] * y[i]).sum()
}

/// The two polaritons, lower frequency first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolaritonBasis {
    pub modes: [Polariton; 2],
}

impl PolaritonBasis {
    pub fn frequencies(&self) -> (f64, f64) {
        (self.modes[0].frequency, self.modes[1].frequency)
    }

    /// Bogoliubov matrix `T` with `(p_1, p_2, p_1†, p_2†) = T (a, b, a†, b†)`.
    pub fn transformation(&self) -> Matrix4<f64> {
        let mut t = Matrix4::zeros();
        for (k, m) in self.modes.iter().enumerate() {
            let c = m.coeffs;
            t.set_row(k, &c.transpose());
            t.set_row(k + 2, &Vector4::new(c[2], c[3], c[0], c[1]).transpose());
        }
        t
    }
}

fn fix_sign(mut c: Vector4<f64>) -> Vector4<f64> {
    let scale = c.amax();
    if let Some(first) = c.iter().find(|x| x.abs() > 1e-12 * scale) {
        if *first < 0.0 {
            c = -c;
        }
    }
    c
}

/// Null-space vectors of `Mᵀ − ω I`, as many as the smallest singular values allow.
fn null_vectors(mt: &Matrix4<f64>, omega: f64, count: usize) -> Vec<Vector4<f64>> {
    let shifted = mt - Matrix4::identity() * omega;
    let svd = SVD::new(shifted, false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    order.iter().take(count).map(|&i| v_t.row(i).transpose()).collect()
}

/// Bose-normalized polaritons with positive eigenfrequencies.
pub fn diagonalize_polaritons(p: &GroundStateParams) -> Result<PolaritonBasis> {
    let eigs = hopfield_eigenvalues(p);
    let scale = p.omega_alpha.max(p.omega_beta).max(p.coupling);
    if let Some(z) = eigs.iter().find(|z| z.im.abs() > 1e-9 * scale) {
        return Err(Error::ModelInvalid { re: z.re, im: z.im });
    }
    let mut positive: Vec<f64> = eigs.iter().map(|z| z.re).filter(|x| *x > 0.0).collect();
    positive.sort_by(f64::total_cmp);
    if !p.is_valid() || positive.len() != 2 {
        let worst = eigs
            .iter()
            .min_by(|a, b| a.re.abs().total_cmp(&b.re.abs()))
            .copied()
            .unwrap_or_default();
        return Err(Error::ModelInvalid { re: worst.re, im: worst.im });
    }

    let mt = hopfield_matrix(p).transpose();
    let (w1, w2) = (positive[0], positive[1]);
    let vectors: Vec<Vector4<f64>> = if (w2 - w1).abs() <= 1e-9 * scale {
        // Degenerate frequency: K-orthonormalize a basis of the 2D eigenspace.
        let mut basis = null_vectors(&mt, w1, 2);
        let n0 = bose_product(&basis[0], &basis[0]);
        basis[0] /= n0.sqrt();
        let overlap = bose_product(&basis[0], &basis[1]);
        let b0 = basis[0];
        basis[1] -= b0 * overlap;
        basis
    } else {
        vec![null_vectors(&mt, w1, 1)[0], null_vectors(&mt, w2, 1)[0]]
    };

    let mut modes = [Polariton { coeffs: Vector4::zeros(), frequency: 0.0 }; 2];
    for (k, (c, w)) in vectors.into_iter().zip([w1, w2]).enumerate() {
        let norm = bose_product(&c, &c);
        if !(norm > 0.0) {
            return Err(Error::ModelInvalid { re: w, im: 0.0 });
        }
        modes[k] = Polariton { coeffs: fix_sign(c / norm.sqrt()), frequency: w };
    }
    Ok(PolaritonBasis { modes })
}

/// Quadrature transform `q = Q x` from `(a, b, a†, b†)` to `(X_a, Y_a, X_b, Y_b)`.
pub(crate) fn quadrature_transform() -> Matrix4<Complex64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let re = |x: f64| Complex64::new(x * r, 0.0);
    let im = |x: f64| Complex64::new(0.0, x * r);
    let z = Complex64::new(0.0, 0.0);
    Matrix4::new(
        re(1.0), z, re(1.0), z, //
        im(-1.0), z, im(1.0), z, //
        z, re(1.0), z, re(1.0), //
        z, im(-1.0), z, im(1.0),
    )
}

/// Symmetric covariance from the ladder correlation `⟨x x†⟩` over `(a, b, a†, b†)`.
pub(crate) fn covariance_from_ladder(xx_dag: &Matrix4<Complex64>) -> CovarianceMatrix {
    let q = quadrature_transform();
    let w = q * xx_dag * q.adjoint();
    CovarianceMatrix::new(w.map(|z| z.re))
}

/// Ground-state covariance: the polariton vacuum pushed through the inverse
/// Bogoliubov transformation `T⁻¹ = K Tᵀ K`.
pub fn ground_state_covariance(p: &GroundStateParams) -> Result<CovarianceMatrix> {
    let basis = diagonalize_polaritons(p)?;
    Ok(covariance_from_basis(&basis))
}

pub fn covariance_from_basis(basis: &PolaritonBasis) -> CovarianceMatrix {
    let k = Matrix4::from_diagonal(&Vector4::from(BOGOLIUBOV_METRIC));
    let t = basis.transformation();
    let t_inv = k * t.transpose() * k;
    let polariton_vacuum = Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 0.0, 0.0));
    let xx = t_inv * polariton_vacuum * t_inv.transpose();
    covariance_from_ladder(&xx.map(|x| Complex64::new(x, 0.0)))
}

/// A collective mode ruled by `Ω c†c + (λ/2)(c² + c†²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveMode {
    pub frequency: f64,
    pub squeezing: f64,
    pub var_x: f64,
    pub var_p: f64,
}

impl CollectiveMode {
    pub fn new(frequency: f64, squeezing: f64) -> Result<Self> {
        if !(squeezing.abs() < frequency) {
            return Err(Error::Domain(format!(
                "collective mode needs |lambda| < Omega, got Omega = {frequency}, lambda = {squeezing}"
            )));
        }
        let ratio = ((frequency - squeezing) / (frequency + squeezing)).sqrt();
        Ok(CollectiveMode { frequency, squeezing, var_x: 0.5 * ratio, var_p: 0.5 / ratio })
    }

    /// `√(Ω² − λ²)`.
    pub fn eigenfrequency(&self) -> f64 {
        (self.frequency * self.frequency - self.squeezing * self.squeezing).sqrt()
    }
}

/// Decomposition into `m = (a+b)/√2` and `n = (a−b)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveDecomposition {
    pub m: CollectiveMode,
    pub n: CollectiveMode,
}

impl CollectiveDecomposition {
    /// Covariance of `(X_a, Y_a, X_b, Y_b)` rebuilt from the independent m and n modes.
    pub fn reassemble(&self) -> CovarianceMatrix {
        let (m, n) = (&self.m, &self.n);
        let xs = 0.5 * (m.var_x + n.var_x);
        let xc = 0.5 * (m.var_x - n.var_x);
        let ps = 0.5 * (m.var_p + n.var_p);
        let pc = 0.5 * (m.var_p - n.var_p);
        CovarianceMatrix::new(Matrix4::new(
            xs, 0.0, xc, 0.0, //
            0.0, ps, 0.0, pc, //
            xc, 0.0, xs, 0.0, //
            0.0, pc, 0.0, ps,
        ))
    }
}

pub fn collective_decomposition(p: &GroundStateParams) -> Result<CollectiveDecomposition> {
    if !p.is_degenerate() {
        return Err(Error::Unsupported(format!(
            "collective decomposition needs omega_alpha == omega_beta, got {} and {}",
            p.omega_alpha, p.omega_beta
        )));
    }
    let (w, g) = (p.omega_alpha, p.coupling);
    Ok(CollectiveDecomposition {
        m: CollectiveMode::new(w + g, g)?,
        n: CollectiveMode::new(w - g, -g)?,
    })
}

/// One row of a coupling sweep. `valid == false` rows carry no state.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateRow {
    pub coupling: f64,
    pub valid: bool,
    pub frequencies: Option<(f64, f64)>,
    pub covariance: Option<CovarianceMatrix>,
    pub report: Option<SqueezingReport>,
    pub error: Option<Error>,
}

/// Evaluates the ground state over a grid of couplings, flagging invalid points.
pub fn ground_state_sweep(template: &GroundStateParams, couplings: &[f64], exec: Execution) -> Vec<GroundStateRow> {
    exec.map(couplings, |&g| {
        let solved = template.with_coupling(g).and_then(|p| diagonalize_polaritons(&p));
        match solved {
            Ok(basis) => {
                let v = covariance_from_basis(&basis);
                GroundStateRow {
                    coupling: g,
                    valid: true,
                    frequencies: Some(basis.frequencies()),
                    covariance: Some(v),
                    report: Some(SqueezingReport::new(&v)),
                    error: None,
                }
            }
            Err(e) => GroundStateRow {
                coupling: g,
                valid: false,
                frequencies: None,
                covariance: None,
                report: None,
                error: Some(e),
            },
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn deg(g: f64) -> GroundStateParams {
        GroundStateParams::degenerate(1.0, g).unwrap()
    }

    #[test]
    fn decoupled_hopfield_is_diagonal() {
        let m = hopfield_matrix(&GroundStateParams::new(1.3, 0.7, 0.0).unwrap());
        assert_eq!(m, Matrix4::from_diagonal(&Vector4::new(1.3, 0.7, -1.3, -0.7)));
    }

    #[test]
    fn hopfield_eigenvalues_match_closed_form() {
        let mut re: Vec<f64> = hopfield_eigenvalues(&deg(0.3)).iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        let expect = [-1.6f64.sqrt(), -0.4f64.sqrt(), 0.4f64.sqrt(), 1.6f64.sqrt()];
        for (a, b) in re.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(0.4f64.sqrt(), 0.63246, epsilon = 1e-5);
        assert_abs_diff_eq!(1.6f64.sqrt(), 1.26491, epsilon = 1e-5);
    }

    #[test]
    fn zero_eigenvalue_at_validity_edge() {
        let min = hopfield_eigenvalues(&deg(0.5)).iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        assert!(min < 1e-6, "smallest |eigenvalue| = {min}");
        assert!(matches!(diagonalize_polaritons(&deg(0.5)), Err(Error::ModelInvalid { .. })));
        assert!(matches!(diagonalize_polaritons(&deg(0.5 - 1e-7)), Err(Error::ModelInvalid { .. })));
        match diagonalize_polaritons(&deg(0.6)) {
            Err(Error::ModelInvalid { im, .. }) => assert!(im.abs() > 0.1),
            other => panic!("expected complex eigenvalue, got {other:?}"),
        }
    }

    #[test]
    fn polaritons_match_closed_form_vectors() {
        let g = 0.3;
        let basis = diagonalize_polaritons(&deg(g)).unwrap();
        let (w1, w2) = basis.frequencies();
        assert_abs_diff_eq!(w1, 0.4f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(w2, 1.6f64.sqrt(), epsilon = 1e-10);

        let k1 = (0.4f64.sqrt() + 1.0) / g;
        let p1 = Vector4::new(k1 - 1.0, -k1 + 1.0, -1.0, 1.0);
        let k2 = (1.6f64.sqrt() + 1.0) / g;
        let p2 = Vector4::new(k2 + 1.0, k2 + 1.0, 1.0, 1.0);
        for (mode, raw) in basis.modes.iter().zip([p1, p2]) {
            let expect = raw / bose_product(&raw, &raw).sqrt();
            assert!((mode.coeffs - expect).amax() < 1e-10, "{} vs {}", mode.coeffs, expect);
            assert_abs_diff_eq!(mode.bose_norm(), 1.0, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(bose_product(&basis.modes[0].coeffs, &basis.modes[1].coeffs), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn weak_coupling_approaches_beam_splitter_mixing() {
        let basis = diagonalize_polaritons(&deg(1e-6)).unwrap();
        for m in &basis.modes {
            assert!(m.coeffs[2].abs() < 1e-5 && m.coeffs[3].abs() < 1e-5);
            assert_abs_diff_eq!(m.coeffs[0].abs(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-5);
        }
    }

    #[test]
    fn zero_coupling_degenerate_eigenspace() {
        let basis = diagonalize_polaritons(&deg(0.0)).unwrap();
        for m in &basis.modes {
            assert_abs_diff_eq!(m.bose_norm(), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(bose_product(&basis.modes[0].coeffs, &basis.modes[1].coeffs), 0.0, epsilon = 1e-12);
        let v = covariance_from_basis(&basis);
        assert!(v.max_abs_diff(&CovarianceMatrix::vacuum()) < 1e-12);
    }

    #[test]
    fn ground_state_closed_forms() {
        let v = ground_state_covariance(&deg(0.3)).unwrap();
        let r = SqueezingReport::new(&v);
        let var_ya = 0.25 * (1.6f64.sqrt() + 0.4f64.sqrt());
        let var_xa = 0.25 * (1.0 / 1.6f64.sqrt() + 1.0 / 0.4f64.sqrt());
        assert_abs_diff_eq!(r.var_ya, var_ya, epsilon = 1e-12);
        assert_abs_diff_eq!(r.var_xa, var_xa, epsilon = 1e-12);
        assert_abs_diff_eq!(r.var_ya, 0.47434, epsilon = 1e-5);
        assert_abs_diff_eq!(r.var_xa, 0.59293, epsilon = 1e-5);
        assert_abs_diff_eq!(r.var_xplus, 0.79057, epsilon = 1e-5);
        let (a, b) = v.symplectic_eigenvalues();
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(b, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn collective_examples() {
        let c = collective_decomposition(&deg(0.0)).unwrap();
        for mode in [c.m, c.n] {
            assert_eq!((mode.frequency, mode.squeezing, mode.var_x), (1.0, 0.0, 0.5));
        }
        let c = collective_decomposition(&deg(0.3)).unwrap();
        assert_abs_diff_eq!(c.m.frequency, 1.3, epsilon = 1e-15);
        assert_abs_diff_eq!(c.m.squeezing, 0.3);
        assert_abs_diff_eq!(c.m.var_x, 0.39528, epsilon = 1e-5);
        assert_abs_diff_eq!(c.n.frequency, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(c.n.squeezing, -0.3);
        assert_abs_diff_eq!(c.n.var_x, 0.79057, epsilon = 1e-5);
        assert_abs_diff_eq!(c.m.eigenfrequency(), 1.26491, epsilon = 1e-5);
        assert_abs_diff_eq!(c.n.eigenfrequency(), 0.63246, epsilon = 1e-5);
        let v = ground_state_covariance(&deg(0.3)).unwrap();
        assert!(c.reassemble().max_abs_diff(&v) < 1e-10);
    }

    #[test]
    fn collective_rejects_non_degenerate() {
        let p = GroundStateParams::new(1.0, 1.1, 0.2).unwrap();
        assert!(matches!(collective_decomposition(&p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn non_degenerate_is_pure_and_matches_quartic() {
        let p = GroundStateParams::new(1.0, 1.7, 0.4).unwrap();
        let basis = diagonalize_polaritons(&p).unwrap();
        // λ⁴ − (ω_α² + ω_β²) λ² + ω_α² ω_β² − 4 G² ω_α ω_β = 0
        let (wa, wb, g) = (1.0f64, 1.7f64, 0.4f64);
        let s = wa * wa + wb * wb;
        let prod = wa * wa * wb * wb - 4.0 * g * g * wa * wb;
        let disc = (s * s - 4.0 * prod).sqrt();
        let (w1, w2) = basis.frequencies();
        assert_abs_diff_eq!(w1, ((s - disc) / 2.0).sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(w2, ((s + disc) / 2.0).sqrt(), epsilon = 1e-10);
        let (a, b) = covariance_from_basis(&basis).symplectic_eigenvalues();
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(b, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn sweep_examples() {
        let t = deg(0.0);
        let rows = ground_state_sweep(&t, &[0.0], Execution::Sequential);
        let r = rows[0].report.unwrap();
        for db in r.single_mode_db().iter().chain(&r.two_mode_db()).chain(&r.epr_db()) {
            assert_abs_diff_eq!(*db, 0.0, epsilon = 1e-9);
        }

        // √(δ/(δ+2G)) + √((δ−2G)/δ) evaluated by hand.
        let rows = ground_state_sweep(&t, &[0.1, 0.2, 0.3], Execution::Parallel);
        let epr: Vec<f64> = rows.iter().map(|r| r.report.unwrap().epr_min()).collect();
        for (e, x) in epr.iter().zip([1.80730, 1.61975, 1.42302]) {
            assert_abs_diff_eq!(*e, x, epsilon = 1e-5);
        }
        assert!(epr[0] > epr[1] && epr[1] > epr[2]);

        let r = ground_state_sweep(&t, &[0.49], Execution::Sequential)[0].report.unwrap();
        assert_abs_diff_eq!(r.var_xplus, 0.71067, epsilon = 1e-5);
        assert_abs_diff_eq!(r.var_yminus, 0.14142, epsilon = 1e-5);
    }

    #[test]
    fn sweep_flags_invalid_and_continues() {
        let rows = ground_state_sweep(&deg(0.0), &[0.2, 0.5, 0.7, 0.3], Execution::Parallel);
        let valid: Vec<bool> = rows.iter().map(|r| r.valid).collect();
        assert_eq!(valid, [true, false, false, true]);
        assert!(rows[1].report.is_none() && rows[1].error.is_some());
    }

    #[test]
    fn params_validation() {
        assert!(GroundStateParams::new(0.0, 1.0, 0.1).is_err());
        assert!(GroundStateParams::new(1.0, 1.0, -0.1).is_err());
        assert!(GroundStateParams::new(f64::NAN, 1.0, 0.1).is_err());
    }
}
