#![allow(dead_code)]

use kronalign::motifs::Graph;
use kronalign::tensor::MotifTensor;
use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random weighted motif tensor: each k-subset of `0..dim` is present with
/// probability `density`, with a weight in [0.5, 2).
pub fn random_tensor<R: Rng>(order: usize, dim: usize, density: f64, rng: &mut R) -> MotifTensor {
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    let mut idx: Vec<usize> = (0..order).collect();
    if order <= dim {
        loop {
            if rng.random::<f64>() < density {
                edges.push(idx.clone());
                weights.push(rng.random_range(0.5..2.0));
            }
            // next k-subset in lexicographic order
            let mut p = order;
            while p > 0 && idx[p - 1] == dim - order + p - 1 {
                p -= 1;
            }
            if p == 0 {
                break;
            }
            idx[p - 1] += 1;
            for q in p..order {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    MotifTensor::new(order, dim, edges, Some(weights)).unwrap()
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                pairs.push((u, v));
            }
        }
    }
    Graph::new(n, pairs).unwrap()
}

/// A random permutation of `0..n`.
pub fn permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    sample(rng, n, n).into_vec()
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
