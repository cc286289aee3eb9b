//! Shared workloads for the benchmarks.

use amra_core::amra::shearlet_plan_2d;
use amra_core::bankgen::SeedName;
use amra_core::{Signal, TreePlan};

/// Deterministic `n × n` test image.
pub fn image(n: usize) -> Signal {
    let data: Vec<f64> = (0..n * n).map(|i| ((i * 7919 + 13) % 257) as f64 / 257.0).collect();
    Signal::from_real(vec![0, 0], vec![n, n], &data).expect("square raster")
}

/// Three-level shearlet plan with mixed-parity shears.
pub fn shearlet_plan(seed: SeedName) -> TreePlan {
    shearlet_plan_2d(&[vec![-1, 0, 1], vec![-2, 1], vec![0, 2]], seed).expect("certified plan")
}
