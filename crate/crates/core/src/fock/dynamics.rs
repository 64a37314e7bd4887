// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Unitary dynamics of the driven mixer, in the full interaction picture and in the
//! effective rotating frame, integrated with an adaptive Dormand–Prince 5(4) scheme.
//!
//! Interaction picture, stiff pumps at `ω_B = ω_a + ω_b + 2δ` and `ω_R = ω_a − ω_b`:
//!
//! ```text
//! H_IP(t) = G_B (ab e^{-2i(ω_a+ω_b+δ)t} + ab† e^{-2i(ω_a+δ)t} + a†b e^{-2i(ω_b+δ)t} + a†b† e^{-2iδt})
//!         + G_R (ab e^{-2iω_a t} + ab† e^{-2i(ω_a−ω_b)t} + a†b + a†b† e^{2iω_b t}) + h.c.
//! ```
//!
//! Effective frame: `H_eff = δ(a†a + b†b) + G_B(a†b† + ab) + G_R(a†b + ab†)`.
//!
//! Removing the `2δ` oscillation with `ψ_IP = e^{-iδNt} ψ'` leaves
//! `H' = −δN + G_B(a†b† + ab) + G_R(a†b + ab†)`, and `H' = −P_b H_eff P_b` with the parity
//! `P_b: b → −b`. For a real initial state `ψ_eff(t) = K P_b ψ'(t)`, `K` being complex
//! conjugation in the Fock basis. On covariances the map is: rotate both modes by `+δt`,
//! then reflect `(X_a, Y_a, X_b, Y_b) → (X_a, −Y_a, −X_b, Y_b)`.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use super::{FockConfig, Ladder, SparseOp, TwoModeSpace};
use crate::error::{Error, Result};
use crate::quad::{rotate_quadrature, CovarianceMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Every oscillating three-wave-mixing term kept.
    InteractionPictureFull,
    /// Time-independent rotating-wave Hamiltonian.
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDependentSpec {
    pub omega_a: f64,
    pub omega_b: f64,
    pub delta: f64,
    pub g_blue: f64,
    pub g_red: f64,
    pub duration: f64,
    /// Relative tolerance of the step controller; absolute tolerance is 1e-3 of it.
    pub tolerance: f64,
    /// Number of evenly spaced output times including `t = 0` and `t = duration`.
    pub samples: usize,
    pub frame: Frame,
}

impl TimeDependentSpec {
    /// Desk-scale validation point: `(ω_a, ω_b) = (40δ, 27δ)`, `G = 0.2δ`, one period `2π/δ`.
    pub fn validation(delta: f64, scale: f64, frame: Frame) -> Self {
        TimeDependentSpec {
            omega_a: 40.0 * scale * delta,
            omega_b: 27.0 * scale * delta,
            delta,
            g_blue: 0.2 * delta,
            g_red: 0.2 * delta,
            duration: std::f64::consts::TAU / delta,
            tolerance: 1e-10,
            samples: 101,
            frame,
        }
    }

    /// Fastest phase rotation in the Hamiltonian, used to seed the step size.
    fn fastest_frequency(&self) -> f64 {
        match self.frame {
            Frame::InteractionPictureFull => 2.0 * (self.omega_a + self.omega_b + self.delta).abs(),
            Frame::Effective => self.delta.abs() + self.g_blue.abs() + self.g_red.abs(),
        }
    }
}

/// `g (e^{-iνt} O + e^{iνt} O†)`.
struct OscillatingTerm {
    g: f64,
    nu: f64,
    op: SparseOp,
    op_dag: SparseOp,
}

struct Hamiltonian {
    static_part: SparseOp,
    terms: Vec<OscillatingTerm>,
}

impl Hamiltonian {
    fn build(space: &TwoModeSpace, spec: &TimeDependentSpec) -> Self {
        use Ladder::*;
        let term = |g: f64, nu: f64, ops: &[Ladder]| OscillatingTerm {
            g,
            nu,
            op: space.monomial(ops),
            op_dag: space.monomial_adjoint(ops),
        };
        let (wa, wb, d) = (spec.omega_a, spec.omega_b, spec.delta);
        let (gb, gr) = (spec.g_blue, spec.g_red);
        match spec.frame {
            Frame::InteractionPictureFull => Hamiltonian {
                static_part: SparseOp::zeros(space.dim()),
                terms: vec![
                    term(gb, 2.0 * (wa + wb + d), &[A, B]),
                    term(gb, 2.0 * (wa + d), &[A, Bdag]),
                    term(gb, 2.0 * (wb + d), &[Adag, B]),
                    term(gb, 2.0 * d, &[Adag, Bdag]),
                    term(gr, 2.0 * wa, &[A, B]),
                    term(gr, 2.0 * (wa - wb), &[A, Bdag]),
                    term(gr, 0.0, &[Adag, B]),
                    term(gr, -2.0 * wb, &[Adag, Bdag]),
                ],
            },
            Frame::Effective => {
                let mut h = SparseOp::zeros(space.dim());
                h.add_scaled(d, &space.monomial(&[Adag, A]));
                h.add_scaled(d, &space.monomial(&[Bdag, B]));
                h.add_scaled(gb, &space.monomial(&[Adag, Bdag]));
                h.add_scaled(gb, &space.monomial(&[A, B]));
                h.add_scaled(gr, &space.monomial(&[Adag, B]));
                h.add_scaled(gr, &space.monomial(&[A, Bdag]));
                Hamiltonian { static_part: h, terms: Vec::new() }
            }
        }
    }

    /// `out = H(t) ψ`.
    fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        self.static_part.accumulate(Complex64::new(1.0, 0.0), psi, out);
        for term in &self.terms {
            if term.g == 0.0 {
                continue;
            }
            let phase = Complex64::from_polar(term.g, -term.nu * t);
            term.op.accumulate(phase, psi, out);
            term.op_dag.accumulate(phase.conj(), psi, out);
        }
    }

    fn energy(&self, t: f64, psi: &[Complex64]) -> f64 {
        let mut h_psi = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(t, psi, &mut h_psi);
        psi.iter().zip(&h_psi).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub frame: Frame,
    pub times: Vec<f64>,
    /// Covariance in the trajectory's own frame.
    pub covariances: Vec<CovarianceMatrix>,
    pub norms: Vec<f64>,
    /// `⟨H(t)⟩` at each sample.
    pub energies: Vec<f64>,
    pub tail_populations: Vec<f64>,
    pub steps: usize,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `i dψ/dt = H(t) ψ` from `initial` and samples covariances.
pub fn integrate_dynamics(spec: &TimeDependentSpec, cfg: &FockConfig, initial: &[Complex64]) -> Result<Trajectory> {
    cfg.validate()?;
    let space = TwoModeSpace { n_max: cfg.n_max };
    if initial.len() != space.dim() {
        return Err(Error::Domain(format!("initial state has length {}, expected {}", initial.len(), space.dim())));
    }
    let norm0: f64 = initial.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("initial state must be normalized, norm = {norm0}")));
    }
    if !(spec.duration > 0.0) || spec.samples < 2 || !(spec.tolerance > 0.0) {
        return Err(Error::Domain("need duration > 0, samples >= 2, tolerance > 0".into()));
    }

    let h = Hamiltonian::build(&space, spec);
    let rhs = |t: f64, y: &[Complex64], out: &mut [Complex64]| {
        h.apply(t, y, out);
        out.iter_mut().for_each(|z| *z *= Complex64::new(0.0, -1.0));
    };

    let rtol = spec.tolerance;
    let atol = spec.tolerance * 1e-3;
    let dim = space.dim();
    let outputs: Vec<f64> = (0..spec.samples).map(|i| spec.duration * i as f64 / (spec.samples - 1) as f64).collect();

    let mut traj = Trajectory {
        frame: spec.frame,
        times: Vec::with_capacity(spec.samples),
        covariances: Vec::with_capacity(spec.samples),
        norms: Vec::with_capacity(spec.samples),
        energies: Vec::with_capacity(spec.samples),
        tail_populations: Vec::with_capacity(spec.samples),
        steps: 0,
    };
    let record = |t: f64, y: &[Complex64], steps: usize, traj: &mut Trajectory| {
        traj.times.push(t);
        traj.covariances.push(space.covariance(y));
        traj.norms.push(y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
        traj.energies.push(h.energy(t, y));
        traj.tail_populations.push(space.tail_population(cfg, y));
        traj.steps = steps;
    };

    let mut y = initial.to_vec();
    let mut t = 0.0;
    record(t, &y, 0, &mut traj);
    let mut h_step = 0.05 / spec.fastest_frequency().max(1.0 / spec.duration);
    let h_min = 1e-13 * spec.duration;
    let mut k = vec![vec![Complex64::new(0.0, 0.0); dim]; 7];
    let mut stage = vec![Complex64::new(0.0, 0.0); dim];
    let mut y5 = vec![Complex64::new(0.0, 0.0); dim];
    rhs(t, &y, &mut k[0]);
    let mut steps = 0usize;

    for &target in &outputs[1..] {
        while t < target {
            let last = target - t <= h_step * (1.0 + 1e-12);
            let hs = if last { target - t } else { h_step };
            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += kj[i] * A[s][j];
                    }
                    stage[i] = y[i] + acc * hs;
                }
                let (done, rest) = k.split_at_mut(s);
                let _ = done;
                rhs(t + C[s] * hs, &stage, &mut rest[0]);
            }
            // Stage 7 is evaluated at the 5th-order solution (FSAL).
            let mut err2 = 0.0;
            for i in 0..dim {
                let mut hi = Complex64::new(0.0, 0.0);
                let mut lo = Complex64::new(0.0, 0.0);
                for j in 0..7 {
                    hi += k[j][i] * B5[j];
                    lo += k[j][i] * B4[j];
                }
                y5[i] = y[i] + hi * hs;
                let sc = atol + rtol * y[i].norm().max(y5[i].norm());
                err2 += ((hi - lo) * hs / sc).norm_sqr();
            }
            let err = (err2 / dim as f64).sqrt();
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                std::mem::swap(&mut y, &mut y5);
                k.swap(0, 6);
                steps += 1;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 && last {
                // Keep the controller's step rather than the clipped one.
                h_step = h_step.max(hs * factor);
            } else {
                h_step = hs * factor;
            }
            if h_step < h_min {
                return Err(Error::Integrator { reached: t, suggested_duration: t.max(h_min) });
            }
        }
        record(t, &y, steps, &mut traj);
    }
    Ok(traj)
}

/// Comparison of the full and effective dynamics from the vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameComparison {
    pub full: Trajectory,
    pub effective: Trajectory,
    /// Full-frame covariances mapped into the effective frame.
    pub full_in_effective_frame: Vec<CovarianceMatrix>,
    /// `‖V_full − V_eff‖_F / ‖V_eff‖_F` at each sample.
    pub discrepancy: Vec<f64>,
}

impl FrameComparison {
    pub fn max_discrepancy(&self) -> f64 {
        self.discrepancy.iter().copied().fold(0.0, f64::max)
    }
}

/// Maps an interaction-picture covariance at time `t` into the effective frame.
/// Valid for trajectories started from a real state such as the vacuum.
pub fn to_effective_frame(v: &CovarianceMatrix, delta: f64, t: f64) -> CovarianceMatrix {
    let rotated = rotate_quadrature(v, delta * t, delta * t);
    let reflect = Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, 1.0));
    CovarianceMatrix::new(reflect * rotated.matrix() * reflect)
}

/// Runs both frames from the vacuum and measures the rotating-wave error.
pub fn compare_frames(spec: &TimeDependentSpec, cfg: &FockConfig) -> Result<FrameComparison> {
    let space = TwoModeSpace { n_max: cfg.n_max };
    let mut vacuum = vec![Complex64::new(0.0, 0.0); space.dim()];
    vacuum[0] = Complex64::new(1.0, 0.0);
    let full = integrate_dynamics(&TimeDependentSpec { frame: Frame::InteractionPictureFull, ..*spec }, cfg, &vacuum)?;
    let effective = integrate_dynamics(&TimeDependentSpec { frame: Frame::Effective, ..*spec }, cfg, &vacuum)?;
    let mapped: Vec<CovarianceMatrix> = full
        .times
        .iter()
        .zip(&full.covariances)
        .map(|(t, v)| to_effective_frame(v, spec.delta, *t))
        .collect();
    let discrepancy = mapped
        .iter()
        .zip(&effective.covariances)
        .map(|(f, e)| (f.matrix() - e.matrix()).norm() / e.matrix().norm())
        .collect();
    Ok(FrameComparison { full, effective, full_in_effective_frame: mapped, discrepancy })
}
