//! Randomized column and row sampling baselines.
//!
//! * column-norm sampling with `p_i ∝ β‖a⁽ⁱ⁾‖²`, scaled by `1/√(c p_i)`;
//! * uniform sampling without replacement;
//! * leverage-score sampling from the top-k singular vectors, on columns
//!   (CSSP) or rows (graph sparsification);
//! * the hybrid that half-samples uniformly and then coarsens.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coarsening::{coarsen_from_base, CoarseningHierarchy, CoarsenConfig, ColumnMap};
use crate::error::{dim_err, Error, Result};
use crate::sparse::SparseMatrix;
use crate::svd::{orthonormality_defect, SvdBackend};
use crate::DenseMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingConfig {
    pub c: usize,
    pub beta: f64,
    pub seed: u64,
    pub with_replacement: bool,
    pub scale_columns: bool,
}

impl SamplingConfig {
    pub fn new(c: usize, seed: u64) -> Self {
        Self {
            c,
            beta: 1.0,
            seed,
            with_replacement: true,
            scale_columns: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c == 0 {
            return Err(Error::Config("sample count c must be at least 1".into()));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Config(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        Ok(())
    }
}

/// Columns (or rows) drawn from a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    /// Sampled matrix; rows are sampled when `indices` refer to rows.
    pub matrix: SparseMatrix,
    /// Source index of every sampled column (or row), in draw order.
    pub indices: Vec<usize>,
    /// Normalized probability of every drawn index.
    pub probabilities: Vec<f64>,
}

impl Sample {
    pub fn to_map(&self) -> ColumnMap {
        ColumnMap::for_indices(&self.indices)
    }
}

/// `p_i = β‖a⁽ⁱ⁾‖² / ‖A‖_F²`, renormalized to sum to one.
pub fn column_norm_probabilities(a: &SparseMatrix, beta: f64) -> Result<Vec<f64>> {
    let norms2 = a.column_norms_squared();
    let total: f64 = norms2.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Sampling("matrix has no nonzero entries".into()));
    }
    let raw: Vec<f64> = norms2.iter().map(|v| beta * v / total).collect();
    let z: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|p| p / z).collect())
}

fn draw(weights: &[f64], c: usize, with_replacement: bool, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    if with_replacement {
        let dist = WeightedIndex::new(weights).map_err(|e| Error::Sampling(e.to_string()))?;
        Ok((0..c).map(|_| dist.sample(rng)).collect())
    } else {
        let positive = weights.iter().filter(|&&w| w > 0.0).count();
        if c > positive {
            return Err(Error::Sampling(format!(
                "cannot draw {c} distinct indices from {positive} with positive weight"
            )));
        }
        let picked = index::sample_weighted(rng, weights.len(), |i| weights[i], c)
            .map_err(|e| Error::Sampling(e.to_string()))?;
        Ok(picked.into_vec())
    }
}

/// Builds a column sample, optionally scaling column `j` by `1/√(c p_j)`.
fn gather_columns(a: &SparseMatrix, indices: Vec<usize>, probs: &[f64], scale: bool) -> Result<Sample> {
    let c = indices.len() as f64;
    let probabilities: Vec<f64> = indices.iter().map(|&i| probs[i]).collect();
    let mut matrix = a.select_columns(&indices)?;
    if scale {
        let factors: Vec<f64> = probabilities.iter().map(|p| 1.0 / (c * p).sqrt()).collect();
        matrix = matrix.scale_columns(&factors)?;
    }
    Ok(Sample {
        matrix,
        indices,
        probabilities,
    })
}

/// Column-norm sampling.
pub fn column_norm_sample(a: &SparseMatrix, cfg: &SamplingConfig) -> Result<Sample> {
    cfg.validate()?;
    let probs = column_norm_probabilities(a, cfg.beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let indices = draw(&probs, cfg.c, cfg.with_replacement, &mut rng)?;
    gather_columns(a, indices, &probs, cfg.scale_columns)
}

/// `c` distinct columns chosen uniformly, unscaled.
pub fn uniform_sample(a: &SparseMatrix, c: usize, seed: u64) -> Result<Sample> {
    let n = a.ncols();
    if c > n {
        return Err(dim_err(format!("cannot sample {c} of {n} columns")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = index::sample(&mut rng, n, c).into_vec();
    let p = 1.0 / n as f64;
    let probs = vec![p; n];
    gather_columns(a, indices, &probs, false)
}

/// Per-index sampling weights from singular vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct LeverageScores {
    pub scores: Vec<f64>,
    pub k: usize,
}

fn check_orthonormal(v: &DenseMatrix) -> Result<()> {
    let defect = orthonormality_defect(v);
    if defect > 1e-8 {
        return Err(Error::Precondition(format!(
            "singular vector block is not orthonormal (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Column leverage scores `ℓ_i = ‖V_k(i,:)‖² / k`; they sum to one.
pub fn leverage_scores(v: &DenseMatrix, k: usize) -> Result<LeverageScores> {
    if k == 0 || k != v.ncols() {
        return Err(dim_err(format!("rank {k} does not match {} singular vectors", v.ncols())));
    }
    check_orthonormal(v)?;
    let kf = k as f64;
    Ok(LeverageScores {
        scores: v.row_iter().map(|r| r.norm_squared() / kf).collect(),
        k,
    })
}

/// Row leverage scores `ℓ_i = ‖U(i,:)‖² ≤ 1` used for sparsifiers.
pub fn row_leverage_scores(u: &DenseMatrix) -> Result<LeverageScores> {
    check_orthonormal(u)?;
    Ok(LeverageScores {
        scores: u.row_iter().map(|r| r.norm_squared()).collect(),
        k: u.ncols(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Columns,
    Rows,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeverageMode {
    /// Distinct indices, kept unscaled.
    Cssp,
    /// Draws with replacement, scaled by `1/√(c p_i)`.
    Sketch,
}

/// Leverage-score sampling of columns or rows.
///
/// The scores are normalized into a multinomial distribution before drawing.
pub fn leverage_sample(
    a: &SparseMatrix,
    c: usize,
    k: usize,
    axis: Axis,
    mode: LeverageMode,
    seed: u64,
    backend: &SvdBackend,
) -> Result<Sample> {
    if c == 0 {
        return Err(Error::Config("sample count c must be at least 1".into()));
    }
    if k == 0 || k > a.nrows().min(a.ncols()) {
        return Err(dim_err(format!(
            "rank {k} must lie in 1..={}",
            a.nrows().min(a.ncols())
        )));
    }
    let svd = backend.top_k(a, k)?;
    let scores = match axis {
        Axis::Columns => leverage_scores(&svd.v, svd.rank())?,
        Axis::Rows => row_leverage_scores(&svd.u)?,
    };
    let total: f64 = scores.scores.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Sampling("all leverage scores are zero".into()));
    }
    let probs: Vec<f64> = scores.scores.iter().map(|s| s / total).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = draw(&probs, c, mode == LeverageMode::Sketch, &mut rng)?;
    let scale = mode == LeverageMode::Sketch;
    match axis {
        Axis::Columns => gather_columns(a, indices, &probs, scale),
        Axis::Rows => {
            let s = gather_columns(&a.transpose(), indices, &probs, scale)?;
            Ok(Sample {
                matrix: s.matrix.transpose(),
                ..s
            })
        }
    }
}

/// Uniformly samples `⌈n/2⌉` columns, then coarsens them with `cfg`.
///
/// The hierarchy's base is the half-sample and `base_columns` records the
/// sampled original indices in increasing order.
pub fn rand_plus_coarsen(a: &SparseMatrix, cfg: &CoarsenConfig, seed: u64) -> Result<CoarseningHierarchy> {
    let n = a.ncols();
    if n < 2 {
        return Err(dim_err("the hybrid needs at least two columns"));
    }
    let mut indices = uniform_sample(a, n.div_ceil(2), seed)?.indices;
    indices.sort_unstable();
    let base = a.select_columns(&indices)?;
    coarsen_from_base(base, indices, cfg)
}
