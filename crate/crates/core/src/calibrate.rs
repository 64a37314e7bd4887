// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pump drive to effective parameters, and device feasibility bounds.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::SimParams;

/// Two-tone drive of the pump mode of a three-wave mixer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpConfig {
    /// Three-wave-mixing rate χ (rad/s).
    pub chi: f64,
    pub c_blue: Complex64,
    pub c_red: Complex64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub delta: f64,
}

impl PumpConfig {
    /// `ω_B = ω_a + ω_b + 2δ`.
    pub fn blue_frequency(&self) -> f64 {
        self.omega_a + self.omega_b + 2.0 * self.delta
    }

    /// `ω_R = ω_a − ω_b`.
    pub fn red_frequency(&self) -> f64 {
        self.omega_a - self.omega_b
    }

    pub fn g_blue(&self) -> f64 {
        self.chi * self.c_blue.norm()
    }

    pub fn g_red(&self) -> f64 {
        self.chi * self.c_red.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwaThresholds {
    /// Upper bound on `|G| / ω_a`, `|G| / ω_b` and `|G| / |ω_a − ω_b|`.
    pub max_frequency_ratio: f64,
    /// Upper bound on `|G| / |δ|`.
    pub max_detuning_ratio: f64,
}

impl Default for RwaThresholds {
    fn default() -> Self {
        RwaThresholds { max_frequency_ratio: 1.0 / 20.0, max_detuning_ratio: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RwaReport {
    /// `(name, ratio, threshold)` for every checked ratio.
    pub ratios: Vec<(&'static str, f64, f64)>,
}

impl RwaReport {
    pub fn failing(&self) -> Vec<&(&'static str, f64, f64)> {
        self.ratios.iter().filter(|(_, r, t)| !(r <= t)).collect()
    }

    pub fn passes(&self) -> bool {
        self.failing().is_empty()
    }
}

pub fn rwa_report(pc: &PumpConfig, thresholds: &RwaThresholds) -> RwaReport {
    let g = pc.g_blue().max(pc.g_red());
    let f = thresholds.max_frequency_ratio;
    RwaReport {
        ratios: vec![
            ("G/omega_a", g / pc.omega_a, f),
            ("G/omega_b", g / pc.omega_b, f),
            ("G/|omega_a-omega_b|", g / (pc.omega_a - pc.omega_b).abs(), f),
            ("G/|delta|", g / pc.delta.abs(), thresholds.max_detuning_ratio),
        ],
    }
}

/// Line and loss rates (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineRates {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_l: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub params: SimParams,
    pub blue_frequency: f64,
    pub red_frequency: f64,
    pub blue_phase: f64,
    pub red_phase: f64,
    pub rwa: RwaReport,
}

impl Calibration {
    /// Phase-space rotations `(θ_a, θ_b)` mapping the real-coupling results onto the
    /// driven modes: `a = e^{iθ_a} a'`, `b = e^{iθ_b} b'` absorb the pump phases.
    pub fn quadrature_angles(&self) -> (f64, f64) {
        (0.5 * (self.blue_phase + self.red_phase), 0.5 * (self.blue_phase - self.red_phase))
    }
}

/// Effective parameters `G_{B,R} = χ |c_{B,R}|`. Fails on a rotating-wave regime
/// violation unless `force` is set.
pub fn effective_params(
    pc: &PumpConfig,
    rates: LineRates,
    thresholds: &RwaThresholds,
    force: bool,
) -> Result<Calibration> {
    let finite = [pc.chi, pc.omega_a, pc.omega_b, pc.delta, pc.c_blue.re, pc.c_blue.im, pc.c_red.re, pc.c_red.im]
        .iter()
        .all(|x| x.is_finite());
    if !finite || pc.chi < 0.0 || pc.omega_a <= 0.0 || pc.omega_b <= 0.0 {
        return Err(Error::Domain("pump config needs finite values, chi >= 0, omega_a, omega_b > 0".into()));
    }
    let rwa = rwa_report(pc, thresholds);
    if !force && !rwa.passes() {
        let list: Vec<String> = rwa.failing().iter().map(|(n, r, t)| format!("{n} = {r:.4e} > {t:.4e}")).collect();
        return Err(Error::Regime(list.join(", ")));
    }
    let mut params = SimParams::new(pc.delta, pc.g_blue(), pc.g_red(), rates.gamma_a, rates.gamma_b, rates.gamma_l)?;
    params.omega_a = Some(pc.omega_a);
    params.omega_b = Some(pc.omega_b);
    Ok(Calibration {
        params,
        blue_frequency: pc.blue_frequency(),
        red_frequency: pc.red_frequency(),
        blue_phase: if pc.c_blue.norm() > 0.0 { pc.c_blue.arg() } else { 0.0 },
        red_phase: if pc.c_red.norm() > 0.0 { pc.c_red.arg() } else { 0.0 },
        rwa,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityInput {
    pub xi_a: f64,
    pub xi_b: f64,
    pub q_a: f64,
    pub q_b: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub delta: f64,
    /// Internal loss rate; only reported as `γ_L / min(γ_a, γ_b)`.
    pub gamma_l: f64,
}

impl FeasibilityInput {
    pub fn validate(&self) -> Result<()> {
        for (name, xi) in [("xi_a", self.xi_a), ("xi_b", self.xi_b)] {
            if !(xi > 0.0 && xi < 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1), got {xi}")));
            }
        }
        for (name, v) in [("q_a", self.q_a), ("q_b", self.q_b), ("gamma_a", self.gamma_a), ("gamma_b", self.gamma_b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.gamma_l >= 0.0) || !self.delta.is_finite() {
            return Err(Error::Domain("gamma_l must be >= 0 and delta finite".into()));
        }
        Ok(())
    }

    /// `(1/4) √(ξ_a ξ_b Q_a Q_b)`.
    pub fn bound(&self) -> f64 {
        0.25 * (self.xi_a * self.xi_b * self.q_a * self.q_b).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    pub bound: f64,
    /// `2G / √(γ_a γ_b)`.
    pub coupling_ratio: f64,
    /// `δ / γ_a`, `δ / γ_b`.
    pub detuning_ratios: (f64, f64),
    pub coupling_ok: bool,
    pub detuning_ok: bool,
    pub feasible: bool,
    pub loss_ratio: f64,
}

/// Evaluates `2G/√(γ_aγ_b) ≤ bound` and `1 < δ/γ_{a,b} ≤ bound`.
pub fn feasibility_check(f: &FeasibilityInput, target_g: f64) -> FeasibilityReport {
    let bound = f.bound();
    let coupling_ratio = 2.0 * target_g / (f.gamma_a * f.gamma_b).sqrt();
    let detuning_ratios = (f.delta / f.gamma_a, f.delta / f.gamma_b);
    let coupling_ok = coupling_ratio <= bound;
    let detuning_ok = [detuning_ratios.0, detuning_ratios.1].iter().all(|r| 1.0 < *r && *r <= bound);
    FeasibilityReport {
        bound,
        coupling_ratio,
        detuning_ratios,
        coupling_ok,
        detuning_ok,
        feasible: coupling_ok && detuning_ok,
        loss_ratio: f.gamma_l / f.gamma_a.min(f.gamma_b),
    }
}
