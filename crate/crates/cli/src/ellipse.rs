// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! 1-σ ellipses of the Gaussian marginals, as plot-ready numbers.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

use uscsim_core::{CovarianceMatrix, Result};

use crate::RunError;

/// Quadrature pairs, as coefficient vectors over `(X_a, Y_a, X_b, Y_b)`.
const BLOCKS: [(&str, [f64; 4], [f64; 4]); 4] = [
    ("a", [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]),
    ("b", [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]),
    // ((X_a − X_b)/√2, (Y_a + Y_b)/√2)
    ("minus_plus", [FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2, 0.0], [0.0, FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]),
    // ((X_a + X_b)/√2, (Y_a − Y_b)/√2)
    ("plus_minus", [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0], [0.0, FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2]),
];

/// Relative eigenvalue gap below which an ellipse is reported as a circle.
const CIRCLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub block: &'static str,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Major-axis angle from the first quadrature, in (−π/2, π/2]; 0 for circles.
    pub angle: f64,
}

fn ellipse_of(block: &'static str, m11: f64, m12: f64, m22: f64) -> Ellipse {
    let mean = 0.5 * (m11 + m22);
    let half_gap = (0.25 * (m11 - m22).powi(2) + m12 * m12).sqrt();
    let (major, minor) = (mean + half_gap, (mean - half_gap).max(0.0));
    let angle = if half_gap <= CIRCLE_TOLERANCE * mean.abs() {
        0.0
    } else {
        let a = 0.5 * (2.0 * m12).atan2(m11 - m22);
        // atan2 gives (−π/2, π/2]; the only edge case is exactly −π/2.
        if a <= -std::f64::consts::FRAC_PI_2 { a + std::f64::consts::PI } else { a }
    };
    Ellipse { block, semi_major: major.sqrt(), semi_minor: minor.sqrt(), angle }
}

/// Ellipses for `(X_a, Y_a)`, `(X_b, Y_b)` and both normalized two-mode pairs.
pub fn ellipses(v: &CovarianceMatrix) -> Result<Vec<Ellipse>> {
    v.check_physical()?;
    Ok(BLOCKS
        .iter()
        .map(|(name, u, w)| {
            let m = v.pair_block(*u, *w);
            ellipse_of(name, m[(0, 0)], m[(0, 1)], m[(1, 1)])
        })
        .collect())
}

/// Writes one CSV row per block, each prefixed by `label` (the sweep coordinate).
pub fn write_ellipses<W: Write>(
    out: &mut csv::Writer<W>,
    label: f64,
    v: &CovarianceMatrix,
) -> std::result::Result<(), RunError> {
    for e in ellipses(v)? {
        out.write_record([fmt(label), e.block.to_string(), fmt(e.semi_major), fmt(e.semi_minor), fmt(e.angle)])?;
    }
    Ok(())
}

/// Writes the ellipses of a single covariance matrix to `path`.
pub fn emit_ellipses(v: &CovarianceMatrix, path: &std::path::Path) -> std::result::Result<(), RunError> {
    let list = ellipses(v)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["block", "semi_major", "semi_minor", "angle_rad"])?;
    for e in list {
        w.write_record([e.block.to_string(), fmt(e.semi_major), fmt(e.semi_minor), fmt(e.angle)])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:?}")
    }
}
