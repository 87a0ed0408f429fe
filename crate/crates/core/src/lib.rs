//! Sparse matrix sketching by hypergraph coarsening.
//!
//! Columns of a sparse matrix are matched pairwise when they are nearly
//! parallel, and each pair is replaced by one rescaled column. Repeating this
//! gives a multilevel hierarchy of smaller matrices whose `CCᵀ` stays close
//! to `AAᵀ`. The coarse matrices feed a partial SVD, column subset selection,
//! and spectral graph sparsification, alongside the usual randomized
//! sampling baselines.

pub mod coarsening;
pub mod error;
pub mod generate;
pub mod metrics;
pub mod mmio;
pub mod sampling;
pub mod sparse;
pub mod svd;

/// Column-major dense matrix used for singular vectors and small blocks.
pub type DenseMatrix = nalgebra::DMatrix<f64>;

pub use coarsening::{
    coarsen_level, coarsen_multilevel, coarsen_rows, cssp_select, CoarseningHierarchy, CoarsenConfig, ColumnMap,
    ColumnScaling, LevelOptions, MatchCriterion, MatchingResult, VisitOrder,
};
pub use error::{Error, Result};
pub use sparse::{incidence_matrix, laplacian, SparseMatrix, WeightedEdgeList};
pub use svd::{PartialSvd, SvdBackend};
