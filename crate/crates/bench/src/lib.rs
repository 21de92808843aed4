//! Workload generators shared by the benchmarks.

use lesionkit::model::Design;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two correlated scorers over `n` cases with roughly balanced labels.
pub fn scored_cases(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2 == 0;
        let shift = if label { 1.0 } else { 0.0 };
        let common: f64 = rng.gen::<f64>() - 0.5;
        a.push(shift + common + rng.gen::<f64>() - 0.5);
        b.push(0.8 * shift + common + rng.gen::<f64>() - 0.5);
        y.push(label);
    }
    (a, b, y)
}

/// A design with `signal` informative columns followed by noise columns.
pub fn planted_design(n: usize, signal: usize, noise: usize, seed: u64) -> (Design, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = signal + noise;
    let names = (0..p).map(|j| format!("x{j}")).collect();
    let mut columns = vec![Vec::with_capacity(n); p];
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut eta = 0.0;
        for (j, col) in columns.iter_mut().enumerate() {
            let v = rng.gen::<f64>() * 2.0 - 1.0;
            if j < signal {
                eta += 1.5 * v;
            }
            col.push(v);
        }
        y.push(rng.gen::<f64>() < 1.0 / (1.0 + (-eta).exp()));
    }
    (Design::new(names, columns), y)
}
