//! Hypergraph coarsening by column matching.
//!
//! The matrix is read as a row-net hypergraph: columns are vertices and each
//! row is a net joining the columns it touches. One coarsening level visits
//! the unmatched columns, accumulates the inner products of the visited
//! column with every column it shares a row with, and merges it with the
//! best candidate when `cos²θ ≥ 1/(1+ε²)` (equivalently `tan θ ≤ ε`).
//!
//! The retained column of a pair is the denser one. In scaled mode it is
//! multiplied by `√(1+cos²θ)` so that `CCᵀ` tracks `AAᵀ`; in unscaled mode
//! it is copied verbatim, which turns the coarse matrix into a column subset.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnScaling {
    /// Retained column multiplied by `√(1+cos²θ)`.
    Scaled,
    /// Retained column copied verbatim (column subset selection).
    Unscaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisitOrder {
    /// Seeded random permutation of the columns.
    Random,
    /// Columns in storage order.
    Natural,
}

/// Which candidate pairs are allowed to merge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchCriterion {
    /// Merge only when `cos²θ ≥ 1/(1+ε²)`.
    Angle,
    /// Plain maximum-inner-product matching: any structurally overlapping
    /// candidate with a nonzero inner product merges. The approximation bound
    /// does not apply in this mode.
    Heaviest,
}

/// Settings for a single coarsening level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelOptions {
    pub epsilon: f64,
    pub scaling: ColumnScaling,
    pub visit_order: VisitOrder,
    pub seed: u64,
    /// Take the first candidate (in increasing column index) that clears the
    /// threshold instead of the one with the largest inner product.
    pub early_exit: bool,
    pub criterion: MatchCriterion,
}

impl LevelOptions {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            scaling: ColumnScaling::Scaled,
            visit_order: VisitOrder::Random,
            seed: 0,
            early_exit: false,
            criterion: MatchCriterion::Angle,
        }
    }

    pub fn scaling(mut self, scaling: ColumnScaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn visit_order(mut self, order: VisitOrder) -> Self {
        self.visit_order = order;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn early_exit(mut self, on: bool) -> Self {
        self.early_exit = on;
        self
    }

    pub fn criterion(mut self, criterion: MatchCriterion) -> Self {
        self.criterion = criterion;
        self
    }

    fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("epsilon must lie strictly in (0, 1), got {eps}")))
    }
}

/// Multilevel coarsening configuration. One level per schedule entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarsenConfig {
    pub epsilon_schedule: Vec<f64>,
    pub scaling: ColumnScaling,
    pub visit_order: VisitOrder,
    pub seed: u64,
    #[serde(default)]
    pub early_exit: bool,
    pub criterion: MatchCriterion,
}

impl CoarsenConfig {
    pub fn new(epsilon_schedule: Vec<f64>, seed: u64) -> Self {
        Self {
            epsilon_schedule,
            scaling: ColumnScaling::Scaled,
            visit_order: VisitOrder::Random,
            seed,
            early_exit: false,
            criterion: MatchCriterion::Angle,
        }
    }

    pub fn levels(&self) -> usize {
        self.epsilon_schedule.len()
    }

    pub fn validate(&self) -> Result<()> {
        for &eps in &self.epsilon_schedule {
            check_epsilon(eps)?;
        }
        if self.epsilon_schedule.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config(format!(
                "epsilon schedule must be nondecreasing, got {:?}",
                self.epsilon_schedule
            )));
        }
        Ok(())
    }

    /// Options for level `level` (0-based), with the derived sub-seed.
    pub fn level_options(&self, level: usize) -> LevelOptions {
        LevelOptions {
            epsilon: self.epsilon_schedule[level],
            scaling: self.scaling,
            visit_order: self.visit_order,
            seed: level_seed(self.seed, level),
            early_exit: self.early_exit,
            criterion: self.criterion,
        }
    }
}

/// Sub-seed for a level: the master seed mixed with the level index through
/// the SplitMix64 finalizer.
pub fn level_seed(master: u64, level: usize) -> u64 {
    let mut z = master ^ (level as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One level of column matching.
///
/// Coarse column `ℓ` is `kept[ℓ]` of the input (scaled or not); `partner[ℓ]`
/// is the column absorbed into it, if any, and `cos2_theta[ℓ]` the squared
/// cosine of their angle.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchingResult {
    pub level: usize,
    pub epsilon: f64,
    pub coarse: SparseMatrix,
    pub kept: Vec<usize>,
    pub partner: Vec<Option<usize>>,
    pub cos2_theta: Vec<Option<f64>>,
    pub warnings: Vec<String>,
}

impl MatchingResult {
    pub fn num_matches(&self) -> usize {
        self.partner.iter().filter(|p| p.is_some()).count()
    }

    /// `(retained, absorbed, cos²θ)` for every matched pair.
    pub fn matched_pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.kept
            .iter()
            .zip(&self.partner)
            .zip(&self.cos2_theta)
            .filter_map(|((&k, p), c)| Some((k, (*p)?, (*c)?)))
    }

    pub fn to_map(&self) -> ColumnMap {
        ColumnMap {
            level: self.level,
            epsilon: Some(self.epsilon),
            kept: self.kept.clone(),
            partner: Some(self.partner.clone()),
            cos2theta: Some(self.cos2_theta.clone()),
        }
    }
}

/// JSON form of a level's column provenance. Sampling results reuse it with
/// the partner fields absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub level: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
    pub kept: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub partner: Option<Vec<Option<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cos2theta: Option<Vec<Option<f64>>>,
}

impl ColumnMap {
    pub fn for_indices(indices: &[usize]) -> Self {
        Self {
            level: 0,
            epsilon: None,
            kept: indices.to_vec(),
            partner: None,
            cos2theta: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Runs one level of hypergraph coarsening by column matching.
pub fn coarsen_level(a: &SparseMatrix, opts: &LevelOptions) -> Result<MatchingResult> {
    opts.validate()?;
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return Err(Error::InvalidInput("cannot coarsen an empty matrix".into()));
    }

    let norms2 = a.column_norms_squared();
    let threshold = 1.0 / (1.0 + opts.epsilon * opts.epsilon);
    let qualifies = |csq: f64| match opts.criterion {
        MatchCriterion::Angle => csq >= threshold,
        MatchCriterion::Heaviest => csq > 0.0,
    };

    let mut order: Vec<usize> = (0..n).collect();
    if opts.visit_order == VisitOrder::Random {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
    }

    let mut unmatched = vec![true; n];
    let mut ip = vec![0.0f64; n];
    let mut marked = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();

    let mut kept = Vec::with_capacity(n);
    let mut partner = Vec::with_capacity(n);
    let mut cos2 = Vec::with_capacity(n);
    let mut factors = Vec::with_capacity(n);

    for &i in &order {
        if !unmatched[i] {
            continue;
        }
        unmatched[i] = false;

        let mut chosen: Option<(usize, f64)> = None;
        if norms2[i] > 0.0 {
            // row i of AᵀA as Σ_{a_ji ≠ 0} a_ji · a_{j,:}, restricted to unmatched columns
            let (rows, vals) = a.column(i);
            for (&j, &a_ji) in rows.iter().zip(vals) {
                let (cols, rvals) = a.row(j);
                for (&k, &a_jk) in cols.iter().zip(rvals) {
                    if !unmatched[k] {
                        continue;
                    }
                    if !marked[k] {
                        marked[k] = true;
                        touched.push(k);
                    }
                    ip[k] += a_ji * a_jk;
                }
            }

            let csq_of = |k: usize| ((ip[k] * ip[k]) / (norms2[i] * norms2[k])).min(1.0);
            if opts.early_exit {
                touched.sort_unstable();
                chosen = touched
                    .iter()
                    .map(|&k| (k, csq_of(k)))
                    .find(|&(_, csq)| qualifies(csq));
            } else {
                let mut best: Option<(usize, f64)> = None;
                for &k in &touched {
                    let v = ip[k].abs();
                    match best {
                        Some((bk, bv)) if v < bv || (v == bv && k > bk) => {}
                        _ => best = Some((k, v)),
                    }
                }
                if let Some((k, _)) = best {
                    let csq = csq_of(k);
                    if qualifies(csq) {
                        chosen = Some((k, csq));
                    }
                }
            }

            for &k in &touched {
                ip[k] = 0.0;
                marked[k] = false;
            }
            touched.clear();
        }

        match chosen {
            Some((j, csq)) => {
                unmatched[j] = false;
                let (keep, absorbed) = if a.column_nnz(j) > a.column_nnz(i) { (j, i) } else { (i, j) };
                kept.push(keep);
                partner.push(Some(absorbed));
                cos2.push(Some(csq));
                factors.push(match opts.scaling {
                    ColumnScaling::Scaled => (1.0 + csq).sqrt(),
                    ColumnScaling::Unscaled => 1.0,
                });
            }
            None => {
                kept.push(i);
                partner.push(None);
                cos2.push(None);
                factors.push(1.0);
            }
        }
    }

    let mut warnings = Vec::new();
    if norms2.iter().all(|&v| v == 0.0) {
        let msg = "matrix has no nonzero columns; nothing was matched".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let coarse = a.select_columns(&kept)?;
    let coarse = if factors.iter().all(|&f| f == 1.0) {
        coarse
    } else {
        coarse.scale_columns(&factors)?
    };

    Ok(MatchingResult {
        level: 1,
        epsilon: opts.epsilon,
        coarse,
        kept,
        partner,
        cos2_theta: cos2,
        warnings,
    })
}

/// Sequence of coarsening levels on top of a base matrix.
///
/// `base_columns[c]` is the column of the original matrix that base column
/// `c` came from: the identity for plain coarsening, the sampled indices for
/// the sample-then-coarsen hybrid.
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseningHierarchy {
    pub base: SparseMatrix,
    pub base_columns: Vec<usize>,
    pub levels: Vec<MatchingResult>,
    /// Level (1-based) that produced no matches and ended the recursion.
    pub stopped_at: Option<usize>,
}

impl CoarseningHierarchy {
    /// The coarsest matrix.
    pub fn coarsest(&self) -> &SparseMatrix {
        self.levels.last().map_or(&self.base, |l| &l.coarse)
    }

    /// Original column behind every column of the coarsest matrix.
    pub fn original_columns(&self) -> Vec<usize> {
        let mut map = self.base_columns.clone();
        for level in &self.levels {
            map = level.kept.iter().map(|&k| map[k]).collect();
        }
        map
    }

    /// Column counts: base first, then one per level.
    pub fn column_counts(&self) -> Vec<usize> {
        std::iter::once(self.base.ncols())
            .chain(self.levels.iter().map(|l| l.coarse.ncols()))
            .collect()
    }
}

/// Applies [`coarsen_level`] once per schedule entry, each level working on
/// the previous level's coarse matrix. Stops after a level that matched nothing.
pub fn coarsen_multilevel(a: &SparseMatrix, cfg: &CoarsenConfig) -> Result<CoarseningHierarchy> {
    coarsen_from_base(a.clone(), (0..a.ncols()).collect(), cfg)
}

pub(crate) fn coarsen_from_base(
    base: SparseMatrix,
    base_columns: Vec<usize>,
    cfg: &CoarsenConfig,
) -> Result<CoarseningHierarchy> {
    cfg.validate()?;
    let mut levels: Vec<MatchingResult> = Vec::with_capacity(cfg.levels());
    let mut stopped_at = None;
    for level in 0..cfg.levels() {
        let input = levels.last().map_or(&base, |l| &l.coarse);
        let mut result = coarsen_level(input, &cfg.level_options(level))?;
        result.level = level + 1;
        let matched_nothing = result.num_matches() == 0;
        levels.push(result);
        if matched_nothing {
            stopped_at = Some(level + 1);
            break;
        }
    }
    Ok(CoarseningHierarchy {
        base,
        base_columns,
        levels,
        stopped_at,
    })
}

/// Row coarsening of an (incidence) matrix, done by coarsening its transpose.
#[derive(Clone, Debug)]
pub struct RowCoarsening {
    /// Hierarchy over `Bᵀ`.
    pub hierarchy: CoarseningHierarchy,
    /// `B̃`, with one row per surviving (possibly scaled) row of `B`.
    pub reduced: SparseMatrix,
    /// Original row of `B` behind every row of `B̃`.
    pub rows: Vec<usize>,
}

pub fn coarsen_rows(b: &SparseMatrix, cfg: &CoarsenConfig) -> Result<RowCoarsening> {
    let hierarchy = coarsen_multilevel(&b.transpose(), cfg)?;
    let reduced = hierarchy.coarsest().transpose();
    let rows = hierarchy.original_columns();
    Ok(RowCoarsening {
        hierarchy,
        reduced,
        rows,
    })
}

/// Column subset chosen by unscaled multilevel coarsening.
#[derive(Clone, Debug)]
pub struct CsspSelection {
    pub indices: Vec<usize>,
    pub columns: SparseMatrix,
    pub hierarchy: CoarseningHierarchy,
}

/// Selects a column subset by coarsening with scaling switched off.
pub fn cssp_select(a: &SparseMatrix, cfg: &CoarsenConfig) -> Result<CsspSelection> {
    let mut cfg = cfg.clone();
    cfg.scaling = ColumnScaling::Unscaled;
    let hierarchy = coarsen_multilevel(a, &cfg)?;
    Ok(CsspSelection {
        indices: hierarchy.original_columns(),
        columns: hierarchy.coarsest().clone(),
        hierarchy,
    })
}
