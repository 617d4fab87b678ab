//! Fixtures shared by the benchmarks.

use faultsense_core::{Dataset, FaultClass};

/// Deterministic pseudo-signal in roughly [-2, 2].
pub fn wave(len: usize, phase: f64) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let t = i as f64 + phase;
            (t * 0.37).sin() + 0.8 * (t * 1.93).cos() * (t * 0.011).sin()
        })
        .collect()
}

/// `n` labelled rows of `dim` features, classes in rotation.
pub fn dataset(n: usize, dim: usize) -> Dataset {
    let values = wave(n * dim, 0.5);
    let labels = (0..n).map(|i| FaultClass::ALL[i % 3]).collect();
    Dataset::new(dim, values, labels).expect("consistent shapes")
}
