// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force oracle in a truncated Fock space.
//!
//! Nothing here reuses the Gaussian machinery of [`crate::groundstate`]: Hamiltonians are
//! built as explicit sparse matrices over `|n_a, n_b⟩`, ground states come from Lanczos
//! (two modes) or dense diagonalization (one mode), and covariances are assembled from
//! expectation values.

mod dynamics;
mod lanczos;

pub use dynamics::{
    compare_frames, integrate_dynamics, to_effective_frame, Frame, FrameComparison, TimeDependentSpec, Trajectory,
};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::groundstate::GroundStateParams;
use crate::quad::CovarianceMatrix;

/// Largest tail population still considered converged.
pub const TAIL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockConfig {
    /// Highest photon number kept per mode.
    pub n_max: usize,
    /// Number of top levels whose population measures truncation error.
    pub convergence_pad: usize,
}

impl FockConfig {
    pub fn new(n_max: usize) -> Self {
        FockConfig { n_max, convergence_pad: 5 }
    }

    fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::Domain(format!("n_max must be >= 2, got {}", self.n_max)));
        }
        Ok(())
    }

    /// First level counted as tail.
    fn tail_start(&self) -> usize {
        (self.n_max + 1).saturating_sub(self.convergence_pad).max(1)
    }
}

/// Ladder operator of mode a or b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    A,
    Adag,
    B,
    Bdag,
}

impl Ladder {
    fn dagger(self) -> Self {
        match self {
            Ladder::A => Ladder::Adag,
            Ladder::Adag => Ladder::A,
            Ladder::B => Ladder::Bdag,
            Ladder::Bdag => Ladder::B,
        }
    }
}

/// Product space of two modes truncated at `n_max` photons each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoModeSpace {
    pub n_max: usize,
}

impl TwoModeSpace {
    pub fn levels(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        self.levels() * self.levels()
    }

    pub fn index(&self, na: usize, nb: usize) -> usize {
        na * self.levels() + nb
    }

    pub fn occupation(&self, i: usize) -> (usize, usize) {
        (i / self.levels(), i % self.levels())
    }

    /// Matrix of the operator product `ops[0] · ops[1] · …` (rightmost acts first).
    pub fn monomial(&self, ops: &[Ladder]) -> SparseOp {
        let mut entries = Vec::new();
        for col in 0..self.dim() {
            let (mut na, mut nb) = self.occupation(col);
            let mut amp = 1.0;
            let mut alive = true;
            for op in ops.iter().rev() {
                let n = match op {
                    Ladder::A | Ladder::Adag => &mut na,
                    Ladder::B | Ladder::Bdag => &mut nb,
                };
                match op {
                    Ladder::A | Ladder::B => {
                        if *n == 0 {
                            alive = false;
                            break;
                        }
                        amp *= (*n as f64).sqrt();
                        *n -= 1;
                    }
                    Ladder::Adag | Ladder::Bdag => {
                        if *n == self.n_max {
                            alive = false;
                            break;
                        }
                        *n += 1;
                        amp *= (*n as f64).sqrt();
                    }
                }
            }
            if alive {
                entries.push((self.index(na, nb), col, amp));
            }
        }
        SparseOp { dim: self.dim(), entries }
    }

    /// Adjoint of a monomial, built by reversing and daggering the factors.
    pub fn monomial_adjoint(&self, ops: &[Ladder]) -> SparseOp {
        let rev: Vec<Ladder> = ops.iter().rev().map(|o| o.dagger()).collect();
        self.monomial(&rev)
    }

    /// Probability of finding either mode at or above the tail start level.
    pub fn tail_population(&self, cfg: &FockConfig, psi: &[Complex64]) -> f64 {
        let start = cfg.tail_start();
        psi.iter()
            .enumerate()
            .filter(|(i, _)| {
                let (na, nb) = self.occupation(*i);
                na >= start || nb >= start
            })
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    /// Covariance of `(X_a, Y_a, X_b, Y_b)` from expectation values in `psi`.
    pub fn covariance(&self, psi: &[Complex64]) -> CovarianceMatrix {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let apply = |op: Ladder| self.monomial(&[op]).apply_complex(psi);
        let (a, ad, b, bd) = (apply(Ladder::A), apply(Ladder::Adag), apply(Ladder::B), apply(Ladder::Bdag));
        let x = |u: &[Complex64], v: &[Complex64]| -> Vec<Complex64> { u.iter().zip(v).map(|(p, q)| (p + q) * r).collect() };
        let y = |u: &[Complex64], v: &[Complex64]| -> Vec<Complex64> {
            u.iter().zip(v).map(|(p, q)| (p - q) * Complex64::new(0.0, -r)).collect()
        };
        let q = [x(&a, &ad), y(&a, &ad), x(&b, &bd), y(&b, &bd)];
        let dot = |u: &[Complex64], v: &[Complex64]| -> Complex64 { u.iter().zip(v).map(|(p, q)| p.conj() * q).sum() };
        let mean: Vec<f64> = q.iter().map(|qi| dot(psi, qi).re).collect();
        let mut m = nalgebra::Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = dot(&q[i], &q[j]).re - mean[i] * mean[j];
            }
        }
        CovarianceMatrix::new(m)
    }
}

/// Sparse real matrix stored as `(row, col, value)` triplets; duplicates add up.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseOp {
    pub fn zeros(dim: usize) -> Self {
        SparseOp { dim, entries: Vec::new() }
    }

    pub fn add_scaled(&mut self, coeff: f64, other: &SparseOp) {
        assert_eq!(self.dim, other.dim);
        self.entries.extend(other.entries.iter().map(|&(r, c, v)| (r, c, coeff * v)));
    }

    pub fn apply_real(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(r, c, v) in &self.entries {
            out[r] += v * x[c];
        }
    }

    pub fn apply_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.accumulate(Complex64::new(1.0, 0.0), x, &mut out);
        out
    }

    /// `out += coeff · (self x)`.
    pub fn accumulate(&self, coeff: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        for &(r, c, v) in &self.entries {
            out[r] += coeff * (v * x[c]);
        }
    }

    /// Row-sum bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        let mut rows = vec![0.0; self.dim];
        for &(r, _, v) in &self.entries {
            rows[r] += v.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }
}

/// Truncated matrix of `ω_α a†a + ω_β b†b + G (a + a†)(b + b†)`.
pub fn usc_hamiltonian(space: &TwoModeSpace, p: &GroundStateParams) -> SparseOp {
    use Ladder::*;
    let mut h = SparseOp::zeros(space.dim());
    h.add_scaled(p.omega_alpha, &space.monomial(&[Adag, A]));
    h.add_scaled(p.omega_beta, &space.monomial(&[Bdag, B]));
    for ops in [[A, B], [A, Bdag], [Adag, B], [Adag, Bdag]] {
        h.add_scaled(p.coupling, &space.monomial(&ops));
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockGroundState {
    pub energy: f64,
    pub state: Vec<f64>,
    pub covariance: CovarianceMatrix,
    pub tail_population: f64,
    pub converged: bool,
}

/// Lowest eigenvector of the truncated Hamiltonian and its covariance.
///
/// An insufficient truncation is reported through `converged == false` together with the
/// tail population, not as an error.
pub fn fock_ground_state(p: &GroundStateParams, cfg: &FockConfig) -> Result<FockGroundState> {
    cfg.validate()?;
    let space = TwoModeSpace { n_max: cfg.n_max };
    let h = usc_hamiltonian(&space, p);
    let mut start = vec![0.0; space.dim()];
    start[0] = 1.0;
    let (energy, state) = lanczos::lowest_eigenpair(&h, &start, 1e-13);
    let psi: Vec<Complex64> = state.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let tail_population = space.tail_population(cfg, &psi);
    Ok(FockGroundState {
        energy,
        covariance: space.covariance(&psi),
        state,
        tail_population,
        converged: tail_population < TAIL_TOLERANCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleModeGroundState {
    pub var_x: f64,
    pub var_p: f64,
    pub energy: f64,
    pub tail_population: f64,
    pub converged: bool,
}

/// Ground state of `Ω c†c + (λ/2)(c² + c†²)` by dense diagonalization.
pub fn fock_collective_ground_state(frequency: f64, squeezing: f64, cfg: &FockConfig) -> Result<SingleModeGroundState> {
    cfg.validate()?;
    if !(squeezing.abs() < frequency) {
        return Err(Error::Domain(format!(
            "spectrum unbounded below: need |lambda| < Omega, got Omega = {frequency}, lambda = {squeezing}"
        )));
    }
    let levels = cfg.n_max + 1;
    let mut h = DMatrix::<f64>::zeros(levels, levels);
    for n in 0..levels {
        h[(n, n)] = frequency * n as f64;
        if n + 2 < levels {
            let amp = 0.5 * squeezing * ((n + 1) as f64 * (n + 2) as f64).sqrt();
            h[(n, n + 2)] = amp;
            h[(n + 2, n)] = amp;
        }
    }
    let eig = SymmetricEigen::new(h);
    let k = eig.eigenvalues.imin();
    let psi = eig.eigenvectors.column(k).into_owned();

    // c ψ and c† ψ in the truncated space.
    let mut lower = vec![0.0; levels];
    let mut raise = vec![0.0; levels];
    for n in 0..levels {
        if n > 0 {
            lower[n - 1] += (n as f64).sqrt() * psi[n];
        }
        if n + 1 < levels {
            raise[n + 1] += ((n + 1) as f64).sqrt() * psi[n];
        }
    }
    let norm2 = |v: Vec<f64>| v.iter().map(|x| x * x).sum::<f64>() * 0.5;
    // Parity symmetry makes ⟨X⟩ = ⟨P⟩ = 0.
    let var_x = norm2(lower.iter().zip(&raise).map(|(l, r)| l + r).collect());
    let var_p = norm2(lower.iter().zip(&raise).map(|(l, r)| l - r).collect());
    let start = cfg.tail_start();
    let tail_population: f64 = psi.iter().skip(start).map(|x| x * x).sum();
    Ok(SingleModeGroundState {
        var_x,
        var_p,
        energy: eig.eigenvalues[k],
        tail_population,
        converged: tail_population < TAIL_TOLERANCE,
    })
}
