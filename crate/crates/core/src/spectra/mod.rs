// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Open-system input-output engine.
//!
//! Intracavity operators `x = (a, b, a†, b†)` obey `ẋ = A x + B u` with the eight input
//! channels `u = (a_in, b_in, a_in†, b_in†, f_a, f_b, f_a†, f_b†)`, where `f` are the
//! internal-loss baths. With `a(t) = (2π)^{-1/2} ∫ a[ω] e^{-iωt} dω` the output field is
//! `x_out[ω] = S(ω) u[ω]`, `S(ω) = P + D (−iω − A)⁻¹ B`, and for stationary inputs
//! `⟨u_i[ω] u_j[ω']⟩ = N_ij δ(ω + ω')`.

mod lyapunov;

pub use lyapunov::{lyapunov_steady_state, quadrature_drift};

use nalgebra::{Matrix4, SMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::groundstate::quadrature_transform;
use crate::quad::{CovarianceMatrix, SqueezingReport, VACUUM_EPR};

pub type InputMatrix = SMatrix<f64, 4, 8>;
pub type ScatteringMatrix = SMatrix<Complex64, 4, 8>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Effective open-system parameters, all rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub delta: f64,
    pub g_blue: f64,
    pub g_red: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_l: f64,
    /// Lab-frame resonator frequencies, only used to relabel spectra.
    pub omega_a: Option<f64>,
    pub omega_b: Option<f64>,
    /// Occupancy of the internal-loss baths.
    pub thermal_occupancy: f64,
}

impl SimParams {
    pub fn new(delta: f64, g_blue: f64, g_red: f64, gamma_a: f64, gamma_b: f64, gamma_l: f64) -> Result<Self> {
        let p = SimParams {
            delta,
            g_blue,
            g_red,
            gamma_a,
            gamma_b,
            gamma_l,
            omega_a: None,
            omega_b: None,
            thermal_occupancy: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// `G_B = G_R = g` with equal line rates.
    pub fn symmetric(delta: f64, g: f64, gamma: f64, gamma_l: f64) -> Result<Self> {
        Self::new(delta, g, g, gamma, gamma, gamma_l)
    }

    /// Josephson mixer operating point: δ = 2π·50 MHz, γ = 2π·25 MHz, γ_L = 2π·0.5 MHz,
    /// resonators at 2π·9 GHz and 2π·6 GHz, with `G_B = G_R = g_over_delta · δ`.
    pub fn josephson_mixer(g_over_delta: f64) -> Self {
        let tau = std::f64::consts::TAU;
        let delta = tau * 50e6;
        let mut p = Self::symmetric(delta, g_over_delta * delta, tau * 25e6, tau * 0.5e6)
            .expect("reference parameters are valid");
        p.omega_a = Some(tau * 9e9);
        p.omega_b = Some(tau * 6e9);
        p
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("delta", self.delta),
            ("g_blue", self.g_blue),
            ("g_red", self.g_red),
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
            ("gamma_l", self.gamma_l),
            ("thermal_occupancy", self.thermal_occupancy),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {value}")));
            }
        }
        for (name, value) in &fields[1..] {
            if *value < 0.0 {
                return Err(Error::Domain(format!("{name} must be >= 0, got {value}")));
            }
        }
        if self.kappa_a() <= 0.0 || self.kappa_b() <= 0.0 {
            return Err(Error::Domain("total decay rates kappa_a, kappa_b must be > 0".into()));
        }
        Ok(())
    }

    pub fn kappa_a(&self) -> f64 {
        self.gamma_a + self.gamma_l
    }

    pub fn kappa_b(&self) -> f64 {
        self.gamma_b + self.gamma_l
    }

    /// `G_B = G_R`: the effective Hamiltonian has the ultrastrong-coupling form.
    pub fn simulates_usc(&self) -> bool {
        self.g_blue == self.g_red
    }

    pub fn with_coupling(&self, g: f64) -> Self {
        SimParams { g_blue: g, g_red: g, ..*self }
    }

    /// Lab-frame frequency of a rotating-frame component `ω` of mode a.
    pub fn lab_frequency_a(&self, omega: f64) -> Option<f64> {
        self.omega_a.map(|wa| wa + self.delta + omega)
    }

    pub fn lab_frequency_b(&self, omega: f64) -> Option<f64> {
        self.omega_b.map(|wb| wb + self.delta + omega)
    }
}

/// Langevin drift `A` and input coupling `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix {
    pub a: Matrix4<Complex64>,
    pub b: InputMatrix,
}

pub fn drift_matrix(p: &SimParams) -> DriftMatrix {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let (d, gb, gr) = (p.delta, p.g_blue, p.g_red);
    let (ka, kb) = (p.kappa_a() / 2.0, p.kappa_b() / 2.0);
    let z = c(0.0, 0.0);
    let a = Matrix4::new(
        c(-ka, -d), c(0.0, -gr), z, c(0.0, -gb), //
        c(0.0, -gr), c(-kb, -d), c(0.0, -gb), z, //
        z, c(0.0, gb), c(-ka, d), c(0.0, gr), //
        c(0.0, gb), z, c(0.0, gr), c(-kb, d),
    );
    let line = [p.gamma_a.sqrt(), p.gamma_b.sqrt(), p.gamma_a.sqrt(), p.gamma_b.sqrt()];
    let mut b = InputMatrix::zeros();
    for k in 0..4 {
        b[(k, k)] = -line[k];
        b[(k, k + 4)] = -p.gamma_l.sqrt();
    }
    DriftMatrix { a, b }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex64>,
    pub stable: bool,
    /// Largest real part among the eigenvalues.
    pub margin: f64,
}

pub fn stability_check(p: &SimParams) -> StabilityReport {
    let eigenvalues: Vec<Complex64> = quadrature_drift(p)
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    let margin = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    StabilityReport { eigenvalues, stable: margin < 0.0, margin }
}

/// Locates the symmetric coupling `G_B = G_R = G` in `[lo, hi]` where the stability
/// margin crosses zero, by bisection. Requires a stable `lo` and an unstable `hi`.
pub fn stability_threshold(p: &SimParams, mut lo: f64, mut hi: f64, tolerance: f64) -> Option<f64> {
    let margin = |g: f64| stability_check(&p.with_coupling(g)).margin;
    if !(margin(lo) < 0.0 && margin(hi) >= 0.0) {
        return None;
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if margin(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Input correlation matrix `N` with `⟨u_i[ω] u_j[ω']⟩ = N_ij δ(ω + ω')`.
pub fn input_correlations(thermal_occupancy: f64) -> SMatrix<f64, 8, 8> {
    let mut n = SMatrix::<f64, 8, 8>::zeros();
    n[(0, 2)] = 1.0;
    n[(1, 3)] = 1.0;
    n[(4, 6)] = thermal_occupancy + 1.0;
    n[(5, 7)] = thermal_occupancy + 1.0;
    n[(6, 4)] = thermal_occupancy;
    n[(7, 5)] = thermal_occupancy;
    n
}

/// Frequency-domain solver for one stable parameter set.
#[derive(Debug, Clone)]
pub struct Spectrometer {
    params: SimParams,
    drift: DriftMatrix,
    selector: ScatteringMatrix,
    line: Matrix4<Complex64>,
    noise: SMatrix<Complex64, 8, 8>,
}

impl Spectrometer {
    pub fn new(p: &SimParams) -> Result<Self> {
        p.validate()?;
        let report = stability_check(p);
        if !report.stable {
            return Err(Error::Unstable { margin: report.margin });
        }
        let mut selector = ScatteringMatrix::zeros();
        for k in 0..4 {
            selector[(k, k)] = Complex64::new(1.0, 0.0);
        }
        let d = [p.gamma_a.sqrt(), p.gamma_b.sqrt(), p.gamma_a.sqrt(), p.gamma_b.sqrt()];
        let line = Matrix4::from_diagonal(&nalgebra::Vector4::from(d).map(|x| Complex64::new(x, 0.0)));
        Ok(Spectrometer {
            params: *p,
            drift: drift_matrix(p),
            selector,
            line,
            noise: input_correlations(p.thermal_occupancy).map(|x| Complex64::new(x, 0.0)),
        })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    /// `(−iω − A)⁻¹ B`: intracavity response to the inputs.
    pub fn response(&self, omega: f64) -> Result<ScatteringMatrix> {
        let lhs = Matrix4::<Complex64>::identity() * (-I * omega) - self.drift.a;
        let inv = lhs.try_inverse().ok_or(Error::Singular { omega })?;
        if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Singular { omega });
        }
        Ok(inv * self.drift.b.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn scattering(&self, omega: f64) -> Result<ScatteringMatrix> {
        Ok(self.selector + self.line * self.response(omega)?)
    }

    fn symmetrized(&self, plus: &ScatteringMatrix, minus: &ScatteringMatrix) -> CovarianceMatrix {
        let q = quadrature_transform();
        let m_plus = q * plus * self.noise * minus.transpose() * q.transpose();
        let m_minus = q * minus * self.noise * plus.transpose() * q.transpose();
        let s = (m_plus + m_minus.transpose()) * Complex64::new(0.5, 0.0);
        CovarianceMatrix::new(s.map(|z| z.re))
    }

    /// Symmetrized output spectral covariance `σ(ω)` over `(X_a, Y_a, X_b, Y_b)`.
    pub fn output_covariance(&self, omega: f64) -> Result<CovarianceMatrix> {
        Ok(self.symmetrized(&self.scattering(omega)?, &self.scattering(-omega)?))
    }

    /// Symmetrized intracavity spectral density; integrates to the steady-state covariance.
    pub fn intracavity_covariance(&self, omega: f64) -> Result<CovarianceMatrix> {
        Ok(self.symmetrized(&self.response(omega)?, &self.response(-omega)?))
    }
}

pub fn scattering_matrix(p: &SimParams, omega: f64) -> Result<ScatteringMatrix> {
    Spectrometer::new(p)?.scattering(omega)
}

pub fn output_spectral_covariance(p: &SimParams, omega: f64) -> Result<CovarianceMatrix> {
    Spectrometer::new(p)?.output_covariance(omega)
}

/// `2001` points over `[−3δ, 3δ]`.
pub fn default_grid(delta: f64) -> Vec<f64> {
    linear_grid(-3.0 * delta, 3.0 * delta, 2001)
}

pub fn linear_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        n => (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRow {
    pub omega: f64,
    pub sigma: CovarianceMatrix,
    pub report: SqueezingReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSweep {
    pub params: SimParams,
    pub rows: Vec<SpectralRow>,
}

impl SpectralSweep {
    pub fn omega_grid(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.omega).collect()
    }

    /// Minimum over sign conventions of the EPR spectrum.
    pub fn epr_min(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.report.epr_min()).collect()
    }

    pub fn epr_min_over_vacuum(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.report.epr_min() / VACUUM_EPR).collect()
    }

    /// Row whose frequency is closest to `omega`.
    pub fn nearest(&self, omega: f64) -> Option<&SpectralRow> {
        self.rows.iter().min_by(|a, b| (a.omega - omega).abs().total_cmp(&(b.omega - omega).abs()))
    }
}

pub fn spectra_sweep(p: &SimParams, grid: &[f64], exec: Execution) -> Result<SpectralSweep> {
    let engine = Spectrometer::new(p)?;
    let rows = exec.map(grid, |&omega| {
        engine.output_covariance(omega).map(|sigma| SpectralRow { omega, sigma, report: SqueezingReport::new(&sigma) })
    });
    Ok(SpectralSweep { params: *p, rows: rows.into_iter().collect::<Result<_>>()? })
}

/// Minima shallower than this (absolute EPR units) are treated as flat.
pub const DIP_PROMINENCE: f64 = 1e-6;

/// Local minima of the min-sign EPR spectrum, refined by a parabola through each
/// minimum and its neighbours. Grid endpoints never count.
pub fn dip_positions(sweep: &SpectralSweep) -> Vec<f64> {
    let omega = sweep.omega_grid();
    find_minima(&omega, &sweep.epr_min(), DIP_PROMINENCE)
}

pub(crate) fn find_minima(x: &[f64], y: &[f64], min_prominence: f64) -> Vec<f64> {
    let n = y.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    for i in 1..n - 1 {
        if !(y[i] < y[i - 1] && y[i] <= y[i + 1]) {
            continue;
        }
        // Prominence: climb each side until a lower point or the edge.
        let side = |range: &mut dyn Iterator<Item = usize>| {
            let mut peak = y[i];
            for j in range {
                if y[j] < y[i] {
                    break;
                }
                peak = peak.max(y[j]);
            }
            peak
        };
        let left = side(&mut (0..i).rev());
        let right = side(&mut (i + 1..n));
        if left.min(right) - y[i] < min_prominence {
            continue;
        }
        let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
        let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
        let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
        let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
        let vertex = if a > 0.0 { -b / (2.0 * a) } else { x1 };
        out.push(vertex.clamp(x0, x2));
    }
    out
}

/// `(1/2π) ∫ σ_intracavity(ω) dω` by the trapezoid rule on `|ω| ≤ half_width`, plus the
/// analytic `1/ω²` tail beyond the window.
pub fn integrated_intracavity_covariance(p: &SimParams, half_width: f64, points: usize, exec: Execution) -> Result<CovarianceMatrix> {
    let engine = Spectrometer::new(p)?;
    let grid = linear_grid(-half_width, half_width, points.max(3));
    let samples = exec
        .map(&grid, |&w| engine.intracavity_covariance(w).map(|v| *v.matrix()))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let h = grid[1] - grid[0];
    let last = samples.len() - 1;
    let mut sum = Matrix4::<f64>::zeros();
    for (k, s) in samples.iter().enumerate() {
        let weight = if k == 0 || k == last { 0.5 } else { 1.0 };
        sum += s * (weight * h);
    }
    let tail = (samples[0] + samples[last]) * half_width;
    Ok(CovarianceMatrix::new((sum + tail) / std::f64::consts::TAU))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn empty_cavity_drift_is_diagonal() {
        let p = SimParams::new(2.0, 0.0, 0.0, 0.6, 0.4, 0.0).unwrap();
        let d = drift_matrix(&p);
        let expect = Matrix4::from_diagonal(&nalgebra::Vector4::new(c(-0.3, -2.0), c(-0.2, -2.0), c(-0.3, 2.0), c(-0.2, 2.0)));
        assert_eq!(d.a, expect);
    }

    #[test]
    fn drift_conjugation_symmetry_and_rows() {
        let p = SimParams::new(1.0, 0.3, 0.2, 0.5, 0.4, 0.05).unwrap();
        let a = drift_matrix(&p).a;
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(a[(i + 2, j + 2)], a[(i, j)].conj());
                assert_eq!(a[(i + 2, j)], a[(i, j + 2)].conj());
            }
        }
        let sym = SimParams::symmetric(1.0, 0.3, 0.5, 0.05).unwrap();
        let a = drift_matrix(&sym).a;
        assert_eq!(a[(0, 0)], c(-0.275, -1.0));
        assert_eq!(a[(0, 1)], c(0.0, -0.3));
        assert_eq!(a[(0, 3)], c(0.0, -0.3));
        let b = drift_matrix(&sym).b;
        assert_abs_diff_eq!(b[(0, 0)], -(0.5f64).sqrt());
        assert_abs_diff_eq!(b[(0, 4)], -(0.05f64).sqrt());
    }

    #[test]
    fn mixer_rates_on_diagonal() {
        let p = SimParams::josephson_mixer(0.0);
        let tau = std::f64::consts::TAU;
        assert_abs_diff_eq!(p.kappa_a(), tau * 25.5e6, epsilon = 1e-3);
        assert_abs_diff_eq!(-drift_matrix(&p).a[(0, 0)].re, tau * 25.5e6 / 2.0, epsilon = 1e-3);
    }

    #[test]
    fn amplifier_form_couples_only_to_conjugate() {
        let p = SimParams::new(1.0, 0.3, 0.0, 0.5, 0.5, 0.0).unwrap();
        let a = drift_matrix(&p).a;
        assert_eq!(a[(0, 1)], c(0.0, 0.0));
        assert_eq!(a[(0, 3)], c(0.0, -0.3));
    }

    #[test]
    fn empty_stability_margin() {
        let p = SimParams::new(1.0, 0.0, 0.0, 0.6, 0.4, 0.02).unwrap();
        let s = stability_check(&p);
        assert!(s.stable);
        assert_abs_diff_eq!(s.margin, -0.42 / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn mixer_stability_examples() {
        assert!(stability_check(&SimParams::josephson_mixer(0.3)).stable);
        assert!(!stability_check(&SimParams::josephson_mixer(0.75)).stable);
        assert!(matches!(Spectrometer::new(&SimParams::josephson_mixer(0.75)), Err(Error::Unstable { .. })));
    }

    #[test]
    fn resonant_empty_cavity_reflects_with_unit_modulus() {
        let p = SimParams::new(1.0, 0.0, 0.0, 0.5, 0.5, 0.0).unwrap();
        let s = scattering_matrix(&p, 1.0).unwrap();
        for k in 0..4 {
            assert_abs_diff_eq!(s[(k, k)].norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn beam_splitter_has_no_creation_mixing() {
        let p = SimParams::new(1.0, 0.0, 0.4, 0.5, 0.3, 0.01).unwrap();
        let s = scattering_matrix(&p, 0.37).unwrap();
        for out in 0..2 {
            for input in [2, 3, 6, 7] {
                assert_eq!(s[(out, input)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn vacuum_and_passive_network_spectra() {
        for p in [
            SimParams::josephson_mixer(0.0),
            SimParams::new(1.0, 0.0, 0.45, 0.5, 0.3, 0.02).unwrap(),
        ] {
            let engine = Spectrometer::new(&p).unwrap();
            for w in linear_grid(-3.0 * p.delta, 3.0 * p.delta, 31) {
                let v = engine.output_covariance(w).unwrap();
                assert!(v.max_abs_diff(&CovarianceMatrix::vacuum()) < 1e-10);
            }
        }
    }

    #[test]
    fn lossless_bogoliubov_metric_preserved() {
        let p = SimParams::new(1.0, 0.3, 0.2, 0.5, 0.4, 0.0).unwrap();
        let s = scattering_matrix(&p, 0.3).unwrap();
        let line = s.fixed_view::<4, 4>(0, 0).into_owned();
        // Each output row (a_out, b_out): |a-type|² − |creation-type|² = 1.
        for row in 0..2 {
            let n = line[(row, 0)].norm_sqr() + line[(row, 1)].norm_sqr()
                - line[(row, 2)].norm_sqr()
                - line[(row, 3)].norm_sqr();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn threshold_bisection_matches_closed_form() {
        // With equal κ the drift is the closed-system one shifted by −κ/2, so the margin
        // crosses zero where √(δ(2G − δ)) = κ/2.
        let p = SimParams::symmetric(1.0, 0.0, 0.4, 0.1).unwrap();
        let g = stability_threshold(&p, 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(g, 0.5 + 0.25 / 8.0, epsilon = 1e-10);
    }

    #[test]
    fn minima_finder() {
        let x = linear_grid(-3.0, 3.0, 601);
        let y: Vec<f64> = x.iter().map(|v| ((v - 1.013) * (v - 1.013) + 0.1) * ((v + 1.013) * (v + 1.013) + 0.1)).collect();
        let m = find_minima(&x, &y, 1e-6);
        assert_eq!(m.len(), 2);
        // Minima of the product are not exactly at ±1.013 but close.
        assert!((m[0] + 1.0).abs() < 0.05 && (m[1] - 1.0).abs() < 0.05);
        assert!(find_minima(&x, &vec![2.0; x.len()], 1e-6).is_empty());
        let parabola: Vec<f64> = x.iter().map(|v| (v - 0.0123) * (v - 0.0123)).collect();
        assert_abs_diff_eq!(find_minima(&x, &parabola, 0.0)[0], 0.0123, epsilon = 1e-12);
    }
}
