//! Shared fixtures for the criterion benchmarks.

use gre_core::sample::dirichlet;
use gre_core::ProbVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn random_vectors(n: usize, s: usize, seed: u64) -> Vec<ProbVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| dirichlet(&mut rng, s)).collect()
}

pub fn random_items(n: usize, s: usize, seed: u64) -> Vec<(usize, ProbVector)> {
    random_vectors(n, s, seed).into_iter().enumerate().collect()
}
