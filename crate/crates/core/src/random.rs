//! Seeded generators for graphs and signals.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::graph::{GraphSignalSpace, Signal};

/// Unit-weight adjacency of a connected graph: a random spanning tree plus
/// every other pair independently with probability `p`.
pub fn random_connected_adjacency<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for k in 1..n {
        let parent = order[rng.random_range(0..k)];
        let v = order[k];
        a[(v, parent)] = 1.0;
        a[(parent, v)] = 1.0;
    }
    for i in 0..n {
        for j in i + 1..n {
            if a[(i, j)] == 0.0 && rng.random_bool(p.clamp(0.0, 1.0)) {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    a
}

/// Standard Gaussian signal, real or complex.
pub fn random_signal<R: Rng + ?Sized>(space: &Arc<GraphSignalSpace>, real: bool, rng: &mut R) -> Signal {
    let n = space.size();
    let values = DVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if real { 0.0 } else { rng.sample(StandardNormal) };
        Complex64::new(re, im)
    });
    Signal::new(space, values).expect("length matches space")
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// `P A Pᵀ` for the relabeling `i ↦ perm[i]` used by [`Signal::permuted`].
pub fn permute_adjacency(a: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(perm[i], perm[j])])
}
