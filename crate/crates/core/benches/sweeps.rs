// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use uscsim_core::groundstate::{ground_state_sweep, GroundStateParams};
use uscsim_core::spectra::{default_grid, spectra_sweep, SimParams};
use uscsim_core::Execution;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn spectra(c: &mut Criterion) {
    let p = SimParams::josephson_mixer(0.3);
    let grid = default_grid(p.delta);
    let mut group = c.benchmark_group("spectra_sweep_2001");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| spectra_sweep(black_box(&p), black_box(&grid), exec).unwrap())
        });
    }
    group.finish();
}

fn ground_state(c: &mut Criterion) {
    let template = GroundStateParams::degenerate(1.0, 0.0).unwrap();
    let couplings: Vec<f64> = (0..2000).map(|i| 0.499 * i as f64 / 1999.0).collect();
    let mut group = c.benchmark_group("ground_state_sweep_2000");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| ground_state_sweep(black_box(&template), black_box(&couplings), exec))
        });
    }
    group.finish();
}

criterion_group!(benches, spectra, ground_state);
criterion_main!(benches);
