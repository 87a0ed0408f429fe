//! Seeded random test inputs.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, WeightedEdgeList};

/// `m × n` matrix with `round(density·m·n)` nonzeros at distinct uniform
/// positions, values uniform in `(0, 1]`.
pub fn random_sparse(m: usize, n: usize, density: f64, seed: u64) -> Result<SparseMatrix> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Config(format!("density must lie in [0, 1], got {density}")));
    }
    let total = m * n;
    let nnz = ((density * total as f64).round() as usize).min(total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = index::sample(&mut rng, total, nnz).into_vec();
    positions.sort_unstable();
    let triplets: Vec<_> = positions
        .into_iter()
        .map(|p| (p % m, p / m, 1.0 - rng.random::<f64>()))
        .collect();
    SparseMatrix::from_triplets(m, n, triplets)
}

/// Simple graph on `n` vertices with `edges` distinct edges, weights
/// uniform in `[0.5, 2)`.
pub fn random_graph(n: usize, edges: usize, seed: u64) -> Result<WeightedEdgeList> {
    let max = n * n.saturating_sub(1) / 2;
    if edges > max {
        return Err(Error::Config(format!("a simple graph on {n} vertices has at most {max} edges")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut list = Vec::with_capacity(edges);
    while list.len() < edges {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v || !seen.insert((u.min(v), u.max(v))) {
            continue;
        }
        list.push((u, v, rng.random_range(0.5..2.0)));
    }
    WeightedEdgeList::new(n, list)
}
