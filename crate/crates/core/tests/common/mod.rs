#![allow(dead_code)]

use std::path::PathBuf;

use hypercoarse::generate::random_sparse;
use hypercoarse::SparseMatrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Dense = DMatrix<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random sparse matrix with m, n ∈ [20, 200] and density in [2%, 10%].
pub fn family_member(index: u64) -> SparseMatrix {
    let mut r = rng(0xA11CE ^ index.wrapping_mul(0x9E37_79B9));
    let m = r.random_range(20..=200);
    let n = r.random_range(20..=200);
    let density = r.random_range(0.02..=0.10);
    random_sparse(m, n, density, r.random()).unwrap()
}

pub fn gaussian(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> Dense {
    Dense::from_fn(rows, cols, |_, _| r.sample(StandardNormal))
}

pub fn unit_vector(m: usize, r: &mut ChaCha8Rng) -> nalgebra::DVector<f64> {
    let x = nalgebra::DVector::from_fn(m, |_, _| r.sample::<f64, _>(StandardNormal));
    let n = x.norm();
    x / n
}

/// Orthonormal basis from Householder QR of a Gaussian matrix.
pub fn random_orthonormal(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> Dense {
    gaussian(rows, cols, r).qr().q()
}

/// Eigenpairs of the smaller Gram matrix, largest first. Independent of any
/// SVD routine, accurate for the leading part of the spectrum.
fn gram_eigen(a: &Dense) -> (Vec<f64>, Dense, bool) {
    let wide = a.nrows() < a.ncols();
    let g = if wide { a * a.transpose() } else { a.transpose() * a };
    let eig = g.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let vecs = Dense::from_fn(eig.eigenvectors.nrows(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs, wide)
}

/// Singular values in descending order.
pub fn singular_values(a: &Dense) -> Vec<f64> {
    gram_eigen(a).0.into_iter().map(f64::sqrt).collect()
}

/// Best rank-k approximation, projecting onto the leading Gram eigenvectors.
pub fn best_rank_k(a: &Dense, k: usize) -> Dense {
    let (_, vecs, wide) = gram_eigen(a);
    let w = vecs.columns(0, k.min(vecs.ncols()));
    if wide {
        &w * (w.transpose() * a)
    } else {
        (a * &w) * w.transpose()
    }
}

/// `(‖A − A_k‖_F², σ_{k+1}²)`.
pub fn optimal_tail(a: &Dense, k: usize) -> (f64, f64) {
    let s = singular_values(a);
    (s.iter().skip(k).map(|x| x * x).sum(), s.get(k).map_or(0.0, |x| x * x))
}

/// `A − HHᵀA`, formed densely.
pub fn residual(a: &Dense, h: &Dense) -> Dense {
    a - h * (h.transpose() * a)
}

/// Result of the brute-force matcher.
pub struct OracleMatch {
    pub kept: Vec<usize>,
    pub partner: Vec<Option<usize>>,
    pub coarse: Dense,
}

/// One level of column matching in natural visit order, computed from the
/// dense matrix by scanning every pair.
pub fn brute_force_match(a: &Dense, eps: f64, scaled: bool, heaviest: bool) -> OracleMatch {
    let (m, n) = a.shape();
    let norm2: Vec<f64> = (0..n).map(|j| (0..m).map(|r| a[(r, j)] * a[(r, j)]).sum()).collect();
    let nnz: Vec<usize> = (0..n).map(|j| (0..m).filter(|&r| a[(r, j)] != 0.0).count()).collect();
    let threshold = 1.0 / (1.0 + eps * eps);
    let mut taken = vec![false; n];
    let (mut kept, mut partner, mut cols) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let mut best: Option<(usize, f64)> = None;
        if norm2[i] > 0.0 {
            for j in 0..n {
                if taken[j] || !(0..m).any(|r| a[(r, i)] != 0.0 && a[(r, j)] != 0.0) {
                    continue;
                }
                let mut ip = 0.0;
                for r in 0..m {
                    if a[(r, i)] != 0.0 && a[(r, j)] != 0.0 {
                        ip += a[(r, i)] * a[(r, j)];
                    }
                }
                if best.is_none_or(|(_, b)| ip.abs() > b) {
                    best = Some((j, ip.abs()));
                }
            }
        }
        let chosen = best.and_then(|(j, ip)| {
            let csq = (ip * ip / (norm2[i] * norm2[j])).min(1.0);
            let ok = if heaviest { csq > 0.0 } else { csq >= threshold };
            ok.then_some((j, csq))
        });
        match chosen {
            Some((j, csq)) => {
                taken[j] = true;
                let (keep, other) = if nnz[j] > nnz[i] { (j, i) } else { (i, j) };
                let f = if scaled { (1.0 + csq).sqrt() } else { 1.0 };
                kept.push(keep);
                partner.push(Some(other));
                cols.push(a.column(keep) * f);
            }
            None => {
                kept.push(i);
                partner.push(None);
                cols.push(a.column(i).into_owned());
            }
        }
    }
    let coarse = if cols.is_empty() {
        Dense::zeros(m, 0)
    } else {
        Dense::from_columns(&cols)
    };
    OracleMatch { kept, partner, coarse }
}

/// Directory holding downloaded SuiteSparse matrices, if configured.
pub fn data_dir() -> Option<PathBuf> {
    std::env::var_os("HYPERCOARSE_DATA_DIR").map(PathBuf::from)
}

pub fn require_dataset(name: &str) -> PathBuf {
    let dir = data_dir().unwrap_or_else(|| panic!("set HYPERCOARSE_DATA_DIR to a directory containing {name}"));
    let path = dir.join(name);
    assert!(path.exists(), "{} not found", path.display());
    path
}
