// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unphysical covariance matrix: symplectic eigenvalue #{index} = {value:.6e} is below 1/2")]
    Unphysical { index: usize, value: f64 },

    #[error("model invalid: Hopfield eigenvalue {re:.6e}{im:+.6e}i is not real and strictly positive")]
    ModelInvalid { re: f64, im: f64 },

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("unstable dynamics: drift matrix has an eigenvalue with real part {margin:.6e} >= 0")]
    Unstable { margin: f64 },

    #[error("numerically singular system at omega = {omega:.6e}")]
    Singular { omega: f64 },

    #[error("rotating-wave regime violated: {0}")]
    Regime(String),

    #[error("integrator failed at t = {reached:.6e} (step size underflow); retry with duration <= {suggested_duration:.6e}")]
    Integrator {
        reached: f64,
        suggested_duration: f64,
    },
}
