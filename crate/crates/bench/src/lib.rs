//! Shared fixtures for the benchmarks.

use cake_core::jisp::JispInstance;
use cake_core::random::{random_instance, random_jisp, rng};
use cake_core::{CakeInstance, Rat};

/// Fixed-seed instances with `n` agents and up to five density pieces.
pub fn instances(n: usize, count: u64) -> Vec<CakeInstance> {
    (0..count).map(|s| random_instance(100 + s, n, 5)).collect()
}

pub fn scheduling(jobs: usize, points: usize) -> JispInstance<Rat> {
    random_jisp(&mut rng(3), jobs, points, points, 20)
}
