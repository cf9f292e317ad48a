//! Workload generators shared by the benchmarks.

use gausscov::simulation::gaussian_matrix;
use gausscov::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Gaussian design with a response driven by the first `active` columns.
pub fn sparse_linear(n: usize, k: usize, active: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = gaussian_matrix(&mut rng, n, k);
    let y = (0..n)
        .map(|i| {
            let signal: f64 = (0..active.min(k)).map(|j| x.get(i, j)).sum();
            signal + rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    Dataset::new(y, x).expect("generated data is finite")
}

/// Two-class response on a wide design, 72 x 3571 by default.
pub fn two_class(n: usize, k: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = gaussian_matrix(&mut rng, n, k);
    let y = (0..n)
        .map(|i| {
            let score = 2.0 * x.get(i, 0) + x.get(i, 1) - x.get(i, 2);
            if score + rng.sample::<f64, _>(StandardNormal) > 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Dataset::new(y, x).expect("generated data is finite")
}
