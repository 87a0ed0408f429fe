//! Error measures and run reports.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::sparse::SparseMatrix;
use crate::svd::{dense_svd, orthonormality_defect, orthonormalize, SvdBackend};
use crate::DenseMatrix;

/// Relative slack for a slightly negative `‖A‖_F² − ‖AᵀH‖_F²`.
const RADICAND_TOL: f64 = 1e-10;

fn check_basis(a: &SparseMatrix, h: &DenseMatrix) -> Result<()> {
    if h.nrows() != a.nrows() {
        return Err(dim_err(format!(
            "basis has {} rows, matrix has {}",
            h.nrows(),
            a.nrows()
        )));
    }
    Ok(())
}

/// `‖A − HHᵀA‖_F = √(‖A‖_F² − ‖AᵀH‖_F²)` for orthonormal `H`.
pub fn projection_error_frobenius(a: &SparseMatrix, h: &DenseMatrix) -> Result<f64> {
    check_basis(a, h)?;
    let total = a.frobenius_norm_squared();
    let captured = a.tr_mul_dense(h)?.norm_squared();
    let diff = total - captured;
    if diff < 0.0 {
        if -diff <= RADICAND_TOL * total.max(1.0) {
            return Ok(0.0);
        }
        return Err(Error::Metric(format!(
            "projection captures more than the matrix norm ({captured:.6e} > {total:.6e}); basis is not orthonormal"
        )));
    }
    Ok(diff.sqrt())
}

/// `‖A − HHᵀA‖₂`, computed densely.
pub fn projection_error_spectral(a: &SparseMatrix, h: &DenseMatrix) -> Result<f64> {
    check_basis(a, h)?;
    let dense = a.to_dense();
    let residual = &dense - h * (h.transpose() * &dense);
    Ok(dense_svd(&residual)?.sigma.first().copied().unwrap_or(0.0))
}

/// Best rank-k residuals `(‖A − A_k‖_F², σ_{k+1}²)` from the dense SVD.
pub fn optimal_residuals(a: &SparseMatrix, k: usize) -> Result<(f64, f64)> {
    let s = dense_svd(&a.to_dense())?.sigma;
    let tail: f64 = s.iter().skip(k).map(|x| x * x).sum();
    let next = s.get(k).map_or(0.0, |x| x * x);
    Ok((tail, next))
}

/// `(1/k) Σ |σ̃_i − σ_i| / σ_i` over the first `k` values.
pub fn mean_sv_error(reference: &[f64], approx: &[f64], k: usize) -> Result<f64> {
    if k == 0 || reference.len() < k || approx.len() < k {
        return Err(Error::Metric(format!(
            "need {k} singular values, have {} reference and {} approximate",
            reference.len(),
            approx.len()
        )));
    }
    let mut sum = 0.0;
    for i in 0..k {
        if !(reference[i] > 0.0) {
            return Err(Error::Metric(format!("reference singular value {i} is zero")));
        }
        sum += (approx[i] - reference[i]).abs() / reference[i];
    }
    Ok(sum / k as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayleighDeviation {
    /// Largest `|xᵀAAᵀx − xᵀCCᵀx| / ‖A‖_F²` over the probes.
    pub max: f64,
    pub mean: f64,
}

/// Compares `AAᵀ` and `CCᵀ` on random unit vectors.
pub fn rayleigh_deviation(a: &SparseMatrix, c: &SparseMatrix, probes: usize, seed: u64) -> Result<RayleighDeviation> {
    if a.nrows() != c.nrows() {
        return Err(dim_err(format!("row counts differ: {} vs {}", a.nrows(), c.nrows())));
    }
    if probes == 0 {
        return Err(Error::Config("need at least one probe".into()));
    }
    let fro2 = a.frobenius_norm_squared();
    if !(fro2 > 0.0) {
        return Err(Error::Metric("matrix has zero Frobenius norm".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = a.nrows();
    let (mut max, mut sum) = (0.0f64, 0.0);
    for _ in 0..probes {
        let x = random_unit(m, &mut rng);
        let dev = (quad_form(a, &x)? - quad_form(c, &x)?).abs() / fro2;
        max = max.max(dev);
        sum += dev;
    }
    Ok(RayleighDeviation {
        max,
        mean: sum / probes as f64,
    })
}

/// Unit vector drawn uniformly from the sphere.
pub fn random_unit(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            return x.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// `xᵀMMᵀx = ‖Mᵀx‖²`.
pub fn quad_form(m: &SparseMatrix, x: &[f64]) -> Result<f64> {
    Ok(m.tr_mul_vec(x)?.iter().map(|v| v * v).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsspErrors {
    /// `‖A − P_C A‖_F` with `P_C` the projector onto range(C).
    pub frobenius: f64,
    /// Nonzeros of `P_C A` over nonzeros of `A`.
    pub nnz_ratio: f64,
}

/// Magnitude below which an entry of `P_C A` counts as zero.
pub const NNZ_THRESHOLD: f64 = 1e-8;

/// Column subset errors. With `integer_mode` the projection is rounded to
/// the nearest integers before both measures are taken.
pub fn cssp_errors(a: &SparseMatrix, c: &SparseMatrix, integer_mode: bool) -> Result<CsspErrors> {
    if a.nrows() != c.nrows() {
        return Err(dim_err(format!("row counts differ: {} vs {}", a.nrows(), c.nrows())));
    }
    if a.nnz() == 0 {
        return Err(Error::Metric("matrix has no nonzeros".into()));
    }
    let q = orthonormalize(&c.to_dense());
    let dense = a.to_dense();
    let mut proj = &q * (q.transpose() * &dense);
    if integer_mode {
        proj.apply(|v| *v = v.round());
    }
    let frobenius = (&dense - &proj).norm();
    let nnz = proj.iter().filter(|v| v.abs() > NNZ_THRESHOLD).count();
    Ok(CsspErrors {
        frobenius,
        nnz_ratio: nnz as f64 / a.nnz() as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsifierError {
    /// `(1/r) Σ |σ_i(K̃) − σ_i(K)| / σ_i(K)` over the top `r` values.
    pub error: f64,
    pub nnz_ratio: f64,
}

pub fn sparsifier_error(k: &SparseMatrix, k_tilde: &SparseMatrix, r: usize, backend: &SvdBackend) -> Result<SparsifierError> {
    if k.nrows() != k_tilde.nrows() || k.ncols() != k_tilde.ncols() {
        return Err(dim_err("Laplacians differ in shape"));
    }
    if k.nnz() == 0 {
        return Err(Error::Metric("reference Laplacian is zero".into()));
    }
    let exact = backend.top_k(k, r)?.sigma;
    let approx = backend.top_k(k_tilde, r)?.sigma;
    let mut padded = approx;
    padded.resize(r, 0.0);
    if exact.len() < r {
        return Err(Error::Metric(format!("reference Laplacian has rank {} < {r}", exact.len())));
    }
    Ok(SparsifierError {
        error: mean_sv_error(&exact, &padded, r)?,
        nnz_ratio: k_tilde.nnz() as f64 / k.nnz() as f64,
    })
}

/// Checks that `H` has orthonormal columns within `tol`.
pub fn assert_orthonormal(h: &DenseMatrix, tol: f64) -> Result<()> {
    let d = orthonormality_defect(h);
    if d > tol {
        return Err(Error::Precondition(format!("basis orthonormality defect {d:.3e} exceeds {tol:.1e}")));
    }
    Ok(())
}

pub const REPORT_SCHEMA: &str = "hypercoarse.report.v1";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub error1_frobenius: Option<f64>,
    pub error2_mean_sv: Option<f64>,
    pub spectral_error: Option<f64>,
    pub rayleigh_max_dev: Option<f64>,
    pub cssp_frob_error: Option<f64>,
    pub cssp_nnz_error: Option<f64>,
    pub sparsifier_sv_error: Option<f64>,
    pub nnz_ratio: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub command: String,
    pub method: String,
    pub input: String,
    pub c: Option<usize>,
    pub k: Option<usize>,
    pub levels: Option<usize>,
    pub epsilons: Vec<f64>,
    pub seed: u64,
    pub refine: Option<String>,
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema: String,
    pub meta: ReportMeta,
    pub metrics: Metrics,
    pub timing: Timing,
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "command,method,input,c,k,levels,epsilons,seed,refine,\
error1_frobenius,error2_mean_sv,spectral_error,rayleigh_max_dev,cssp_frob_error,cssp_nnz_error,\
sparsifier_sv_error,nnz_ratio,wall_time_secs";

    pub fn new(meta: ReportMeta) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            meta,
            metrics: Metrics::default(),
            timing: Timing::default(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(s)?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported report schema `{}` (expected `{REPORT_SCHEMA}`)",
                report.schema
            )));
        }
        Ok(report)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// One CSV row matching [`Self::CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        let m = &self.meta;
        let x = &self.metrics;
        let eps: Vec<String> = m.epsilons.iter().map(ToString::to_string).collect();
        let fields = [
            csv_escape(&m.command),
            csv_escape(&m.method),
            csv_escape(&m.input),
            fmt_opt(&m.c),
            fmt_opt(&m.k),
            fmt_opt(&m.levels),
            eps.join(";"),
            m.seed.to_string(),
            csv_escape(m.refine.as_deref().unwrap_or("")),
            fmt_opt(&x.error1_frobenius),
            fmt_opt(&x.error2_mean_sv),
            fmt_opt(&x.spectral_error),
            fmt_opt(&x.rayleigh_max_dev),
            fmt_opt(&x.cssp_frob_error),
            fmt_opt(&x.cssp_nnz_error),
            fmt_opt(&x.sparsifier_sv_error),
            fmt_opt(&x.nnz_ratio),
            self.timing.wall_time_secs.to_string(),
        ];
        fields.join(",")
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Concatenates reports into one CSV table.
pub fn merge_reports(reports: &[MetricsReport]) -> String {
    let mut out = String::from(MetricsReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
