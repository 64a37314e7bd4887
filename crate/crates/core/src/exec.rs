// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Execution policy for sweeps.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How independent rows of a sweep are evaluated.
///
/// Output order always follows input order, and each row is a pure function of its
/// input, so both policies produce bitwise-identical results. Without the `parallel`
/// feature, `Parallel` falls back to sequential evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree_and_keep_order() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.37).collect();
        let f = |x: &f64| (x.sin() * 1e3).exp2().ln();
        let a = Execution::Parallel.map(&xs, f);
        let b = Execution::Sequential.map(&xs, f);
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
