//! Seeded inputs shared by the benchmarks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subgauss_core::{IndexSet, MetricOnT};

/// Random cost matrix with uniform margins.
pub fn transport_instance(k: usize, l: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cost = DMatrix::from_fn(k, l, |_, _| rng.random_range(0.0..1.0));
    (cost, vec![1.0 / k as f64; k], vec![1.0 / l as f64; l])
}

/// Euclidean distances between `n` random points in the unit square.
pub fn planar_metric(n: usize, seed: u64) -> MetricOnT {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let dist = DMatrix::from_fn(n, n, |i, j| ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt());
    MetricOnT::new(IndexSet::numbered(n).expect("n > 0"), dist).expect("euclidean distances form a metric")
}
