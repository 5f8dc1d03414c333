#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| StandardNormal.sample(&mut r)).collect()
}

/// AR(p) with unit Gaussian innovations after a burn-in of 500 steps.
pub fn ar_series(coef: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let burn = 500;
    let e = normals(n + burn, seed);
    let mut y = vec![0.0; n + burn];
    for t in 0..n + burn {
        let mut v = e[t];
        for (i, a) in coef.iter().enumerate() {
            if t > i {
                v += a * y[t - i - 1];
            }
        }
        y[t] = v;
    }
    y.split_off(burn)
}

/// `Y(t) = σ(t) ε(t)` with `σ²(t) = a0 + a1 Y(t−1)²`.
pub fn arch_series(a0: f64, a1: f64, n: usize, seed: u64) -> Vec<f64> {
    let burn = 500;
    let e = normals(n + burn, seed);
    let mut y = vec![0.0; n + burn];
    for t in 1..n + burn {
        y[t] = (a0 + a1 * y[t - 1] * y[t - 1]).sqrt() * e[t];
    }
    y.split_off(burn)
}

/// VAR(1) `X(t) = a X(t−1) + ε(t)` per column with independent columns.
pub fn diagonal_var1(a: f64, k: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..k).map(|c| ar_series(&[a], n, seed + c as u64)).collect()
}

pub fn uniform_probs(n: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| r.random::<f64>()).collect()
}
