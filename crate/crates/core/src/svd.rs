//! Dense SVD oracle, partial SVD by subspace iteration, and SVD updating.
//!
//! The subspace iteration follows the incremental scheme: start from the
//! left singular vectors of a smaller (sampled or coarsened) matrix and run
//! a few block power steps on a fuller matrix `A_t`.
//!
//! Two updating schemes append columns `D` to a matrix with known rank-k
//! factors. The exact one takes a thin QR of the residual
//! `(I − U_kU_kᵀ)D = Û_p R` and diagonalises the small block
//!
//! ```text
//! H_D = [ Σ_k  U_kᵀD ]
//!       [  0     R   ]
//! ```
//!
//! The cheaper variant replaces `Û_p R` by a rank-l truncation `X_l S_l Y_lᵀ`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{dim_err, Error, Result};
use crate::sparse::SparseMatrix;
use crate::DenseMatrix;

/// Default cap on `min(m, n)` for the dense SVD backend.
pub const DEFAULT_DENSE_CAP: usize = 4000;

/// Columns whose norm after projection falls below this fraction of their
/// input norm are dropped during orthonormalization.
pub const DEFLATION_TOL: f64 = 1e-12;

/// A linear map that can be applied to blocks of vectors.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `A X`
    fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix>;
    /// `Aᵀ X`
    fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix>;
}

impl LinearOperator for SparseMatrix {
    fn nrows(&self) -> usize {
        SparseMatrix::nrows(self)
    }
    fn ncols(&self) -> usize {
        SparseMatrix::ncols(self)
    }
    fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.mul_dense(x)
    }
    fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.tr_mul_dense(x)
    }
}

impl LinearOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        self.shape().0
    }
    fn ncols(&self) -> usize {
        self.shape().1
    }
    fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.nrows() != self.ncols() {
            return Err(dim_err(format!("{}x{} times {}x{}", self.nrows(), self.ncols(), x.nrows(), x.ncols())));
        }
        Ok(self * x)
    }
    fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.nrows() != self.nrows() {
            return Err(dim_err(format!("({}x{})ᵀ times {}x{}", self.nrows(), self.ncols(), x.nrows(), x.ncols())));
        }
        Ok(self.tr_mul(x))
    }
}

/// Rank-k factorization `A ≈ U diag(σ) Vᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSvd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl PartialSvd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Leading `k` triplets.
    pub fn truncate(&self, k: usize) -> PartialSvd {
        let k = k.min(self.rank());
        PartialSvd {
            u: self.u.columns(0, k).into_owned(),
            sigma: self.sigma[..k].to_vec(),
            v: self.v.columns(0, k).into_owned(),
        }
    }

    /// `U diag(σ) Vᵀ`
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    /// Largest deviation of `UᵀU` and `VᵀV` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.u).max(orthonormality_defect(&self.v))
    }

    /// Flips each triplet so the largest-magnitude entry of its left vector
    /// is nonnegative.
    fn normalize_signs(&mut self) {
        for j in 0..self.rank() {
            let col = self.u.column(j);
            let mut best = 0usize;
            for i in 1..col.len() {
                if col[i].abs() > col[best].abs() {
                    best = i;
                }
            }
            if !col.is_empty() && col[best] < 0.0 {
                self.u.column_mut(j).neg_mut();
                self.v.column_mut(j).neg_mut();
            }
        }
    }
}

/// `max |QᵀQ − I|` entrywise.
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = q.tr_mul(q);
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Thin QR factorization with deflation.
#[derive(Clone, Debug)]
pub struct ThinQr {
    /// Orthonormal columns, one per retained input direction.
    pub q: DenseMatrix,
    /// `ncols(q) × ncols(input)`, upper triangular in the retained columns.
    pub r: DenseMatrix,
    /// Number of input columns that were dropped as dependent.
    pub deflated: usize,
}

/// Orthonormalizes the columns of `x`, optionally against an orthonormal
/// `basis` first, by classical Gram–Schmidt with one reorthogonalization pass.
///
/// `R` only records coefficients on the new directions: with a `basis`, the
/// result factors `(I − BBᵀ)X = QR`.
pub fn thin_qr(x: &DenseMatrix, basis: Option<&DenseMatrix>) -> ThinQr {
    let (m, p) = x.shape();
    let mut q_cols: Vec<DVector<f64>> = Vec::with_capacity(p);
    let mut r = DenseMatrix::zeros(p, p);
    let mut deflated = 0;
    for j in 0..p {
        let mut v = x.column(j).into_owned();
        let norm0 = v.norm();
        if norm0 == 0.0 {
            deflated += 1;
            continue;
        }
        for _ in 0..2 {
            if let Some(b) = basis {
                let c = b.tr_mul(&v);
                v -= b * c;
            }
            for (t, q) in q_cols.iter().enumerate() {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
                r[(t, j)] += c;
            }
        }
        let nv = v.norm();
        if nv > DEFLATION_TOL * norm0 {
            r[(q_cols.len(), j)] = nv;
            q_cols.push(v / nv);
        } else {
            deflated += 1;
        }
    }
    let rank = q_cols.len();
    let q = if rank == 0 {
        DenseMatrix::zeros(m, 0)
    } else {
        DenseMatrix::from_columns(&q_cols)
    };
    ThinQr {
        q,
        r: r.rows(0, rank).into_owned(),
        deflated,
    }
}

/// Orthonormal basis for the range of `x`.
pub fn orthonormalize(x: &DenseMatrix) -> DenseMatrix {
    thin_qr(x, None).q
}

/// Full thin SVD through the dense backend, sorted nonincreasing.
pub fn dense_svd(a: &DenseMatrix) -> Result<PartialSvd> {
    dense_svd_with_cap(a, DEFAULT_DENSE_CAP)
}

pub fn dense_svd_with_cap(a: &DenseMatrix, cap: usize) -> Result<PartialSvd> {
    let (m, n) = a.shape();
    let r = m.min(n);
    if r > cap {
        return Err(Error::Size { dim: r, cap });
    }
    if r == 0 {
        return Ok(PartialSvd {
            u: DenseMatrix::zeros(m, 0),
            sigma: Vec::new(),
            v: DenseMatrix::zeros(n, 0),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite entry in dense SVD input".into()));
    }
    // nalgebra's bidiagonal SVD loses consistency between U, Σ and V on
    // exactly rank-deficient input, so the dense path goes through faer
    let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let svd = fa
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("dense SVD did not converge: {e:?}")))?;
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let mut out = PartialSvd {
        u: DenseMatrix::from_fn(m, r, |i, j| u[(i, j)]),
        sigma: (0..r).map(|i| s[i]).collect(),
        v: DenseMatrix::from_fn(n, r, |i, j| v[(i, j)]),
    };
    out.normalize_signs();
    Ok(out)
}

/// Leading `k` triplets of a dense matrix.
pub fn dense_top_k(a: &DenseMatrix, k: usize) -> Result<PartialSvd> {
    Ok(dense_svd(a)?.truncate(k))
}

/// How to obtain leading singular triplets of a sparse matrix: densify when
/// `min(m, n) ≤ dense_cap`, otherwise subspace iteration with oversampling.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdBackend {
    pub dense_cap: usize,
    pub iters: usize,
    pub oversample: usize,
    pub seed: u64,
}

impl Default for SvdBackend {
    fn default() -> Self {
        Self {
            dense_cap: DEFAULT_DENSE_CAP,
            iters: 60,
            oversample: 10,
            seed: 0,
        }
    }
}

impl SvdBackend {
    pub fn top_k(&self, a: &SparseMatrix, k: usize) -> Result<PartialSvd> {
        let (m, n) = (a.nrows(), a.ncols());
        if k > m.min(n) {
            return Err(dim_err(format!("rank {k} exceeds min({m}, {n})")));
        }
        if m.min(n) <= self.dense_cap {
            dense_top_k(&a.to_dense(), k)
        } else {
            let block = (k + self.oversample).min(m.min(n));
            Ok(partial_svd(a, block, self.iters.max(1), self.seed)?.truncate(k))
        }
    }

    pub fn top_k_dense(&self, a: &DenseMatrix, k: usize) -> Result<PartialSvd> {
        let (m, n) = a.shape();
        if k > m.min(n) {
            return Err(dim_err(format!("rank {k} exceeds min({m}, {n})")));
        }
        if m.min(n) <= self.dense_cap {
            dense_top_k(a, k)
        } else {
            let block = (k + self.oversample).min(m.min(n));
            Ok(partial_svd(a, block, self.iters.max(1), self.seed)?.truncate(k))
        }
    }
}

/// Seeded Gaussian `rows × cols` block.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

/// Rank-k partial SVD by subspace iteration from a seeded Gaussian start.
pub fn partial_svd<A: LinearOperator + ?Sized>(a: &A, k: usize, iters: usize, seed: u64) -> Result<PartialSvd> {
    let (m, n) = (a.nrows(), a.ncols());
    if k == 0 || k > m.min(n) {
        return Err(dim_err(format!("rank {k} must lie in 1..={}", m.min(n))));
    }
    if iters == 0 {
        return Err(Error::Config("partial SVD needs at least one iteration".into()));
    }
    let start = orthonormalize(&gaussian_matrix(m, k, seed));
    subspace_iterate(&start, a, iters)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SubspaceOptions {
    /// Diagonalise `S = UᵀAV` after every iteration instead of only the last.
    pub rotate_every_iteration: bool,
}

/// Subspace iteration warm-started from `u_s`.
pub fn subspace_iterate<A: LinearOperator + ?Sized>(u_s: &DenseMatrix, a_t: &A, iters: usize) -> Result<PartialSvd> {
    subspace_iterate_with(u_s, a_t, iters, SubspaceOptions::default())
}

pub fn subspace_iterate_with<A: LinearOperator + ?Sized>(
    u_s: &DenseMatrix,
    a_t: &A,
    iters: usize,
    opts: SubspaceOptions,
) -> Result<PartialSvd> {
    if u_s.nrows() != a_t.nrows() {
        return Err(dim_err(format!(
            "start block has {} rows, matrix has {}",
            u_s.nrows(),
            a_t.nrows()
        )));
    }
    let k0 = u_s.ncols();
    let mut u = orthonormalize(u_s);
    if iters == 0 {
        let v = orthonormalize(&a_t.apply_transpose(&u)?);
        return rayleigh_ritz(a_t, u, v, k0);
    }
    for it in 0..iters {
        let vt = a_t.apply_transpose(&u)?;
        u = orthonormalize(&a_t.apply(&vt)?);
        let v = orthonormalize(&vt);
        if it + 1 == iters {
            return rayleigh_ritz(a_t, u, v, k0);
        }
        if opts.rotate_every_iteration {
            u = rayleigh_ritz(a_t, u, v, k0)?.u;
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Diagonalises `S = UᵀAV` and rotates both bases.
fn rayleigh_ritz<A: LinearOperator + ?Sized>(a: &A, u: DenseMatrix, v: DenseMatrix, requested: usize) -> Result<PartialSvd> {
    let ku = u.ncols();
    let kv = v.ncols();
    if ku < requested || kv < requested {
        log::warn!(
            "subspace iteration deflated to {} of {requested} directions",
            ku.min(kv)
        );
    }
    let av = a.apply(&v)?;
    let s = u.tr_mul(&av);
    let small = dense_svd_with_cap(&s, usize::MAX)?;
    let mut out = PartialSvd {
        u: &u * &small.u,
        sigma: small.sigma,
        v: &v * &small.v,
    };
    out.normalize_signs();
    Ok(out)
}

/// Intermediates of an SVD update.
#[derive(Clone, Debug)]
pub struct SvdUpdateWorkspace {
    /// `Û_p` (exact update) or `X_l` (low-rank update).
    pub u_hat: DenseMatrix,
    /// `R` (exact update) or `S_l Y_lᵀ` (low-rank update).
    pub r: DenseMatrix,
    pub h_d: DenseMatrix,
    pub theta: Vec<f64>,
    pub f: DenseMatrix,
    pub g: DenseMatrix,
    /// `(X_l, S_l, Y_l)` for the low-rank variant.
    pub low_rank: Option<(DenseMatrix, Vec<f64>, DenseMatrix)>,
}

fn check_update_inputs(svd: &PartialSvd, d: &SparseMatrix) -> Result<()> {
    if d.nrows() != svd.u.nrows() {
        return Err(dim_err(format!(
            "appended block has {} rows, factors have {}",
            d.nrows(),
            svd.u.nrows()
        )));
    }
    if svd.v.ncols() != svd.rank() || svd.u.ncols() != svd.rank() {
        return Err(dim_err("factor widths disagree with the number of singular values"));
    }
    Ok(())
}

/// Shared tail of both updates: SVD of `H_D` and assembly of the new factors.
fn finish_update(
    svd: &PartialSvd,
    u_hat: &DenseMatrix,
    bottom: DenseMatrix,
    utd: &DenseMatrix,
    p: usize,
    k: usize,
) -> Result<(PartialSvd, DenseMatrix, PartialSvd)> {
    let k0 = svd.rank();
    let extra = u_hat.ncols();
    let mut h = DenseMatrix::zeros(k0 + extra, k0 + p);
    for (i, s) in svd.sigma.iter().enumerate() {
        h[(i, i)] = *s;
    }
    h.view_mut((0, k0), (k0, p)).copy_from(utd);
    h.view_mut((k0, k0), (extra, p)).copy_from(&bottom);

    let small = dense_svd_with_cap(&h, usize::MAX)?.truncate(k);
    let mut basis = DenseMatrix::zeros(svd.u.nrows(), k0 + extra);
    basis.columns_mut(0, k0).copy_from(&svd.u);
    basis.columns_mut(k0, extra).copy_from(u_hat);
    let u = &basis * &small.u;

    let n_old = svd.v.nrows();
    let r = small.rank();
    let mut v = DenseMatrix::zeros(n_old + p, r);
    v.rows_mut(0, n_old).copy_from(&(&svd.v * small.v.rows(0, k0)));
    v.rows_mut(n_old, p).copy_from(&small.v.rows(k0, p));

    let mut out = PartialSvd {
        u,
        sigma: small.sigma.clone(),
        v,
    };
    out.normalize_signs();
    Ok((out, h, small))
}

/// Rank-k factors of `[A, D]` from rank-k factors of `A`.
pub fn zha_simon_update(svd: &PartialSvd, d: &SparseMatrix, k: usize) -> Result<PartialSvd> {
    Ok(zha_simon_update_with_workspace(svd, d, k)?.0)
}

pub fn zha_simon_update_with_workspace(
    svd: &PartialSvd,
    d: &SparseMatrix,
    k: usize,
) -> Result<(PartialSvd, Option<SvdUpdateWorkspace>)> {
    check_update_inputs(svd, d)?;
    let p = d.ncols();
    if p == 0 {
        return Ok((svd.clone(), None));
    }
    let utd = d.tr_mul_dense(&svd.u)?.transpose();
    let qr = thin_qr(&d.to_dense(), Some(&svd.u));
    let (out, h, small) = finish_update(svd, &qr.q, qr.r.clone(), &utd, p, k)?;
    let ws = SvdUpdateWorkspace {
        u_hat: qr.q,
        r: qr.r,
        h_d: h,
        theta: small.sigma,
        f: small.u,
        g: small.v,
        low_rank: None,
    };
    Ok((out, Some(ws)))
}

/// Update with the residual replaced by its rank-l truncation.
pub fn low_rank_update(svd: &PartialSvd, d: &SparseMatrix, k: usize, l: usize) -> Result<PartialSvd> {
    Ok(low_rank_update_with_workspace(svd, d, k, l, &SvdBackend::default())?.0)
}

pub fn low_rank_update_with_workspace(
    svd: &PartialSvd,
    d: &SparseMatrix,
    k: usize,
    l: usize,
    backend: &SvdBackend,
) -> Result<(PartialSvd, Option<SvdUpdateWorkspace>)> {
    check_update_inputs(svd, d)?;
    let p = d.ncols();
    if p == 0 {
        return Ok((svd.clone(), None));
    }
    if l == 0 || l > p {
        return Err(Error::Config(format!("update rank l = {l} must lie in 1..={p}")));
    }
    let utd = d.tr_mul_dense(&svd.u)?.transpose();
    let dd = d.to_dense();
    let mut resid = &dd - &svd.u * &utd;
    // second projection pass
    let c = svd.u.tr_mul(&resid);
    resid -= &svd.u * c;

    let l = l.min(resid.nrows());
    let trunc = backend.top_k_dense(&resid, l)?;
    // directions carrying no residual energy are dropped
    let floor = DEFLATION_TOL * dd.norm().max(f64::MIN_POSITIVE);
    let keep = trunc.sigma.iter().take_while(|&&s| s > floor).count();
    let trunc = trunc.truncate(keep);
    let mut sy = trunc.v.transpose();
    for (i, s) in trunc.sigma.iter().enumerate() {
        sy.row_mut(i).scale_mut(*s);
    }
    let (out, h, small) = finish_update(svd, &trunc.u, sy.clone(), &utd, p, k)?;
    let ws = SvdUpdateWorkspace {
        u_hat: trunc.u.clone(),
        r: sy,
        h_d: h,
        theta: small.sigma,
        f: small.u,
        g: small.v,
        low_rank: Some((trunc.u, trunc.sigma, trunc.v)),
    };
    Ok((out, Some(ws)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diagonal(&DVector::from_column_slice(values))
    }

    #[test]
    fn dense_svd_of_rank_one_tall_matrix() {
        // x yᵀ with x ∈ R^70, y ∈ R^21
        let x = DVector::from_fn(70, |i, _| ((i * 37 % 11) as f64 - 5.0) / 3.0);
        let y = DVector::from_fn(21, |i, _| ((i * 13 % 7) as f64 - 3.0) / 2.0 + 0.1);
        let a = &x * y.transpose();
        let s = dense_svd(&a).unwrap();
        assert!((s.sigma[0] - x.norm() * y.norm()).abs() < 1e-12 * s.sigma[0]);
        assert!(s.sigma[1..].iter().all(|&v| v < 1e-12 * s.sigma[0]));
        assert!((s.truncate(1).reconstruct() - &a).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn dense_svd_of_diagonal() {
        let s = dense_svd(&diag(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(s.sigma, vec![3.0, 2.0, 1.0]);
        assert!(s.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn dense_svd_of_zero() {
        let s = dense_svd(&DenseMatrix::zeros(3, 2)).unwrap();
        assert_eq!(s.sigma, vec![0.0, 0.0]);
    }

    #[test]
    fn dense_cap_enforced() {
        assert!(matches!(
            dense_svd_with_cap(&DenseMatrix::zeros(5, 5), 4),
            Err(Error::Size { dim: 5, cap: 4 })
        ));
    }

    #[test]
    fn signs_normalized() {
        let s = dense_svd(&DenseMatrix::from_row_slice(2, 2, &[0.0, -2.0, -1.0, 0.0])).unwrap();
        for j in 0..2 {
            let col = s.u.column(j);
            let big = col.iter().cloned().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(big >= 0.0);
        }
        assert!((s.reconstruct() - DenseMatrix::from_row_slice(2, 2, &[0.0, -2.0, -1.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn thin_qr_deflates_dependent_columns() {
        let x = DenseMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 1.0]);
        let qr = thin_qr(&x, None);
        assert_eq!(qr.q.ncols(), 2);
        assert_eq!(qr.deflated, 1);
        assert!((&qr.q * &qr.r - &x).norm() < 1e-14);
        assert!(orthonormality_defect(&qr.q) < 1e-15);
    }

    #[test]
    fn thin_qr_against_basis() {
        let b = DenseMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let x = DenseMatrix::from_column_slice(3, 2, &[5.0, 0.0, 0.0, 1.0, 2.0, 0.0]);
        let qr = thin_qr(&x, Some(&b));
        assert_eq!(qr.q.ncols(), 1);
        let resid = &x - &b * b.tr_mul(&x);
        assert!((&qr.q * &qr.r - resid).norm() < 1e-14);
    }

    #[test]
    fn identity_partial_svd() {
        let id = SparseMatrix::identity(6);
        for k in [1, 3, 6] {
            let s = partial_svd(&id, k, 2, 5).unwrap();
            assert_eq!(s.rank(), k);
            for v in &s.sigma {
                assert!((v - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn partial_svd_rejects_bad_rank() {
        let id = SparseMatrix::identity(3);
        assert!(matches!(partial_svd(&id, 4, 1, 0), Err(Error::Dimension(_))));
        assert!(matches!(partial_svd(&id, 0, 1, 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn leading_value_with_large_gap() {
        let mut values = vec![10.0, 1.0];
        values.extend(std::iter::repeat(0.1).take(8));
        let a = SparseMatrix::from_dense(&diag(&values)).unwrap();
        let s = partial_svd(&a, 1, 10, 11).unwrap();
        assert!((s.sigma[0] - 10.0).abs() < 1e-8);
    }

    #[test]
    fn zero_iterations_is_rayleigh_ritz() {
        let a = SparseMatrix::from_dense(&diag(&[4.0, 2.0, 1.0])).unwrap();
        let u0 = DenseMatrix::from_column_slice(3, 1, &[2.0, 0.0, 0.0]);
        let s = subspace_iterate(&u0, &a, 0).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.sigma[0] - 4.0).abs() < 1e-15);
        assert!((s.u[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn subspace_rank_collapse_deflates() {
        let a = SparseMatrix::from_triplets(4, 4, vec![(0, 0, 3.0)]).unwrap();
        let u0 = gaussian_matrix(4, 3, 1);
        let s = subspace_iterate(&u0, &a, 2).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.sigma[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn update_with_empty_block_is_identity() {
        let a = diag(&[3.0, 2.0]);
        let s = dense_svd(&a).unwrap();
        let out = zha_simon_update(&s, &SparseMatrix::zeros(2, 0), 2).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn update_with_zero_column() {
        let a = DenseMatrix::from_row_slice(3, 2, &[3.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        let s = dense_svd(&a).unwrap();
        let out = zha_simon_update(&s, &SparseMatrix::zeros(3, 1), 2).unwrap();
        for (x, y) in out.sigma.iter().zip(&s.sigma) {
            assert!((x - y).abs() < 1e-12);
        }
        let out = low_rank_update(&s, &SparseMatrix::zeros(3, 1), 2, 1).unwrap();
        for (x, y) in out.sigma.iter().zip(&s.sigma) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn update_rejects_mismatched_rows() {
        let s = dense_svd(&diag(&[1.0, 1.0])).unwrap();
        assert!(zha_simon_update(&s, &SparseMatrix::identity(3), 2).is_err());
        assert!(matches!(
            low_rank_update(&s, &SparseMatrix::identity(2), 2, 3),
            Err(Error::Config(_))
        ));
    }
}
