//! Sparse matrix storage with eager column and row adjacency.
//!
//! A [`SparseMatrix`] keeps a CSC view and a CSR view of the same nonzero
//! set. The coarsening loop walks a column, then every row touched by that
//! column, so both views are built once at construction and never mutated.

use crate::error::{dim_err, Error, Result};
use crate::DenseMatrix;

/// Immutable real sparse matrix with both column-wise and row-wise access.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<f64>,
}

/// Which side of the sparse matrix the dense operand sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `op(A) * X`
    Left,
    /// `X * op(A)`
    Right,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets.
    ///
    /// Duplicate coordinates are summed and entries that end up exactly zero
    /// are dropped. Non-finite values and out-of-range indices are rejected.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(dim_err(format!(
                    "entry ({r}, {c}) outside a {nrows}x{ncols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite value at ({r}, {c})")));
            }
            entries.push((r, c, v));
        }
        entries.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));

        let mut col_ptr = vec![0usize; ncols + 1];
        let mut col_rows = Vec::with_capacity(entries.len());
        let mut col_vals = Vec::with_capacity(entries.len());
        let mut counts = vec![0usize; ncols];
        let mut idx = 0;
        while idx < entries.len() {
            let (r, c, mut v) = entries[idx];
            idx += 1;
            while idx < entries.len() && entries[idx].0 == r && entries[idx].1 == c {
                v += entries[idx].2;
                idx += 1;
            }
            if v != 0.0 {
                col_rows.push(r);
                col_vals.push(v);
                counts[c] += 1;
            }
        }
        for c in 0..ncols {
            col_ptr[c + 1] = col_ptr[c] + counts[c];
        }
        Ok(Self::from_csc_unchecked(nrows, ncols, col_ptr, col_rows, col_vals))
    }

    /// Builds a matrix from per-column `(row, value)` lists.
    pub fn from_columns(nrows: usize, columns: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let ncols = columns.len();
        Self::from_triplets(
            nrows,
            ncols,
            columns
                .into_iter()
                .enumerate()
                .flat_map(|(c, col)| col.into_iter().map(move |(r, v)| (r, c, v))),
        )
    }

    /// Assembles both views from a valid CSC triple (sorted rows, no zeros).
    fn from_csc_unchecked(
        nrows: usize,
        ncols: usize,
        col_ptr: Vec<usize>,
        col_rows: Vec<usize>,
        col_vals: Vec<f64>,
    ) -> Self {
        let nnz = col_rows.len();
        let mut row_ptr = vec![0usize; nrows + 1];
        for &r in &col_rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut next = row_ptr.clone();
        let mut row_cols = vec![0usize; nnz];
        let mut row_vals = vec![0.0; nnz];
        // Columns are visited in increasing order, so each row list comes out sorted.
        for c in 0..ncols {
            for p in col_ptr[c]..col_ptr[c + 1] {
                let r = col_rows[p];
                let dst = next[r];
                row_cols[dst] = c;
                row_vals[dst] = col_vals[p];
                next[r] += 1;
            }
        }
        Self {
            nrows,
            ncols,
            col_ptr,
            col_rows,
            col_vals,
            row_ptr,
            row_cols,
            row_vals,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_csc_unchecked(nrows, ncols, vec![0; ncols + 1], Vec::new(), Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_csc_unchecked(n, n, (0..=n).collect(), (0..n).collect(), vec![1.0; n])
    }

    pub fn from_dense(dense: &DenseMatrix) -> Result<Self> {
        let (m, n) = dense.shape();
        Self::from_triplets(
            m,
            n,
            (0..n).flat_map(|c| (0..m).map(move |r| (r, c, dense[(r, c)]))),
        )
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            out[(r, c)] = v;
        }
        out
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.col_rows.len()
    }

    /// Row indices and values of column `j`.
    #[inline]
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.col_rows[range.clone()], &self.col_vals[range])
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.row_cols[range.clone()], &self.row_vals[range])
    }

    #[inline]
    pub fn column_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    /// All nonzeros in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |c| {
            let (rows, vals) = self.column(c);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, c, v))
        })
    }

    /// All nonzeros in row-major order, read from the row view.
    pub fn row_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// Swaps the two adjacency views. O(nnz), bit-exact.
    pub fn transpose(&self) -> Self {
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            col_ptr: self.row_ptr.clone(),
            col_rows: self.row_cols.clone(),
            col_vals: self.row_vals.clone(),
            row_ptr: self.col_ptr.clone(),
            row_cols: self.col_rows.clone(),
            row_vals: self.col_vals.clone(),
        }
    }

    /// Squared Euclidean norm of every column.
    pub fn column_norms_squared(&self) -> Vec<f64> {
        (0..self.ncols)
            .map(|j| self.column(j).1.iter().map(|v| v * v).sum())
            .collect()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.column_norms_squared().into_iter().map(f64::sqrt).collect()
    }

    pub fn frobenius_norm_squared(&self) -> f64 {
        self.col_vals.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_squared().sqrt()
    }

    /// New matrix made of the listed columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        let mut col_ptr = Vec::with_capacity(indices.len() + 1);
        col_ptr.push(0);
        let mut col_rows = Vec::new();
        let mut col_vals = Vec::new();
        for &j in indices {
            if j >= self.ncols {
                return Err(dim_err(format!("column {j} out of range ({})", self.ncols)));
            }
            let (rows, vals) = self.column(j);
            col_rows.extend_from_slice(rows);
            col_vals.extend_from_slice(vals);
            col_ptr.push(col_rows.len());
        }
        Ok(Self::from_csc_unchecked(self.nrows, indices.len(), col_ptr, col_rows, col_vals))
    }

    /// Multiplies column `j` by `factors[j]`. Zero factors drop the column's entries.
    pub fn scale_columns(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.ncols {
            return Err(dim_err(format!(
                "{} scale factors for {} columns",
                factors.len(),
                self.ncols
            )));
        }
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().map(|(r, c, v)| (r, c, v * factors[c])),
        )
    }

    /// `[self, other]`
    pub fn hstack(&self, other: &SparseMatrix) -> Result<Self> {
        if self.nrows != other.nrows {
            return Err(dim_err(format!(
                "cannot stack {} rows beside {} rows",
                self.nrows, other.nrows
            )));
        }
        let mut col_ptr = self.col_ptr.clone();
        let base = self.nnz();
        col_ptr.extend(other.col_ptr[1..].iter().map(|p| p + base));
        let mut col_rows = self.col_rows.clone();
        col_rows.extend_from_slice(&other.col_rows);
        let mut col_vals = self.col_vals.clone();
        col_vals.extend_from_slice(&other.col_vals);
        Ok(Self::from_csc_unchecked(
            self.nrows,
            self.ncols + other.ncols,
            col_ptr,
            col_rows,
            col_vals,
        ))
    }

    /// `A x` for a dense vector.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(dim_err(format!("vector of length {} for {} columns", x.len(), self.ncols)));
        }
        let mut y = vec![0.0; self.nrows];
        for (c, &xc) in x.iter().enumerate() {
            let (rows, vals) = self.column(c);
            for (&r, &v) in rows.iter().zip(vals) {
                y[r] += v * xc;
            }
        }
        Ok(y)
    }

    /// `Aᵀ x` for a dense vector.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nrows {
            return Err(dim_err(format!("vector of length {} for {} rows", x.len(), self.nrows)));
        }
        Ok((0..self.ncols)
            .map(|c| {
                let (rows, vals) = self.column(c);
                rows.iter().zip(vals).map(|(&r, &v)| v * x[r]).sum()
            })
            .collect())
    }

    /// Sparse-dense product `op(A) X` or `X op(A)` where `op` is identity or transpose.
    ///
    /// Every output entry is accumulated in a fixed order, so the result does
    /// not depend on how the work is scheduled.
    pub fn multiply_dense(&self, x: &DenseMatrix, side: Side, transpose: bool) -> Result<DenseMatrix> {
        let (xr, xc) = x.shape();
        match (side, transpose) {
            (Side::Left, false) => {
                if xr != self.ncols {
                    return Err(dim_err(format!("A is {}x{}, X is {xr}x{xc}", self.nrows, self.ncols)));
                }
                let mut out = DenseMatrix::zeros(self.nrows, xc);
                for q in 0..xc {
                    let xcol = x.column(q);
                    let mut ocol = out.column_mut(q);
                    for c in 0..self.ncols {
                        let s = xcol[c];
                        let (rows, vals) = self.column(c);
                        for (&r, &v) in rows.iter().zip(vals) {
                            ocol[r] += v * s;
                        }
                    }
                }
                Ok(out)
            }
            (Side::Left, true) => {
                if xr != self.nrows {
                    return Err(dim_err(format!("Aᵀ is {}x{}, X is {xr}x{xc}", self.ncols, self.nrows)));
                }
                let mut out = DenseMatrix::zeros(self.ncols, xc);
                for q in 0..xc {
                    let xcol = x.column(q);
                    for c in 0..self.ncols {
                        let (rows, vals) = self.column(c);
                        out[(c, q)] = rows.iter().zip(vals).map(|(&r, &v)| v * xcol[r]).sum();
                    }
                }
                Ok(out)
            }
            (Side::Right, false) => {
                if xc != self.nrows {
                    return Err(dim_err(format!("X is {xr}x{xc}, A is {}x{}", self.nrows, self.ncols)));
                }
                let mut out = DenseMatrix::zeros(xr, self.ncols);
                for c in 0..self.ncols {
                    let (rows, vals) = self.column(c);
                    let mut ocol = out.column_mut(c);
                    for (&r, &v) in rows.iter().zip(vals) {
                        ocol.axpy(v, &x.column(r), 1.0);
                    }
                }
                Ok(out)
            }
            (Side::Right, true) => {
                if xc != self.ncols {
                    return Err(dim_err(format!("X is {xr}x{xc}, Aᵀ is {}x{}", self.ncols, self.nrows)));
                }
                let mut out = DenseMatrix::zeros(xr, self.nrows);
                for r in 0..self.nrows {
                    let (cols, vals) = self.row(r);
                    let mut ocol = out.column_mut(r);
                    for (&c, &v) in cols.iter().zip(vals) {
                        ocol.axpy(v, &x.column(c), 1.0);
                    }
                }
                Ok(out)
            }
        }
    }

    /// `A X`
    pub fn mul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.multiply_dense(x, Side::Left, false)
    }

    /// `Aᵀ X`
    pub fn tr_mul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.multiply_dense(x, Side::Left, true)
    }

    /// `AᵀA`, stored in full.
    ///
    /// Column `j` of the product is `Σ_r a_rj · row_r`, accumulated over the
    /// rows of column `j` in increasing order. Entry `(i, j)` and `(j, i)`
    /// therefore sum the same products in the same order and come out
    /// bit-identical.
    pub fn gram(&self) -> SparseMatrix {
        let n = self.ncols;
        let mut acc = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut col_ptr = vec![0usize; n + 1];
        let mut col_rows = Vec::new();
        let mut col_vals = Vec::new();
        for j in 0..n {
            let (rows, vals) = self.column(j);
            for (&r, &arj) in rows.iter().zip(vals) {
                let (cols, rvals) = self.row(r);
                for (&i, &ari) in cols.iter().zip(rvals) {
                    if !seen[i] {
                        seen[i] = true;
                        touched.push(i);
                    }
                    acc[i] += arj * ari;
                }
            }
            touched.sort_unstable();
            for &i in &touched {
                if acc[i] != 0.0 {
                    col_rows.push(i);
                    col_vals.push(acc[i]);
                }
                acc[i] = 0.0;
                seen[i] = false;
            }
            touched.clear();
            col_ptr[j + 1] = col_rows.len();
        }
        Self::from_csc_unchecked(n, n, col_ptr, col_rows, col_vals)
    }
}

/// Undirected graph with positive edge weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedEdgeList {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedEdgeList {
    /// Validates vertices, weights and uniqueness of undirected edges.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!("edge ({u}, {v}) outside {n} vertices")));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!("edge ({u}, {v}) has weight {w}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidInput(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Number of connected components, isolated vertices included.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut components = self.n;
        for &(u, v, _) in &self.edges {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru] = rv;
                components -= 1;
            }
        }
        components
    }
}

/// Edge-by-vertex incidence matrix: row `e` holds `+√w` at the smaller
/// endpoint and `−√w` at the larger one.
pub fn incidence_matrix(graph: &WeightedEdgeList) -> Result<SparseMatrix> {
    let mut triplets = Vec::with_capacity(2 * graph.edges.len());
    for (e, &(u, v, w)) in graph.edges.iter().enumerate() {
        if u == v {
            return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
        }
        let s = w.sqrt();
        triplets.push((e, u.min(v), s));
        triplets.push((e, u.max(v), -s));
    }
    SparseMatrix::from_triplets(graph.edges.len(), graph.n, triplets)
}

/// Graph Laplacian `K = BᵀB` of an incidence-shaped matrix.
pub fn laplacian(b: &SparseMatrix) -> SparseMatrix {
    b.gram()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseMatrix {
        SparseMatrix::from_triplets(
            3,
            4,
            vec![(0, 0, 1.0), (2, 0, -2.0), (1, 1, 3.0), (0, 3, 4.0), (2, 3, 5.0)],
        )
        .unwrap()
    }

    #[test]
    fn views_agree() {
        let a = sample();
        let mut by_col: Vec<_> = a.triplets().collect();
        let mut by_row: Vec<_> = a.row_triplets().collect();
        by_col.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        by_row.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        assert_eq!(by_col, by_row);
        assert_eq!(a.nnz(), 5);
        assert_eq!(a.column_nnz(2), 0);
    }

    #[test]
    fn duplicates_summed_and_zeros_dropped() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0), (1, 1, -1.0)])
            .unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.column(0), (&[0usize][..], &[3.0][..]));
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(SparseMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, vec![(0, 0, f64::NAN)]).is_err());
    }

    #[test]
    fn transpose_row_vector() {
        let a = SparseMatrix::from_triplets(1, 3, vec![(0, 0, 1.0), (0, 1, 2.0), (0, 2, 3.0)]).unwrap();
        let t = a.transpose();
        assert_eq!((t.nrows(), t.ncols()), (3, 1));
        assert_eq!(t.column(0), (&[0usize, 1, 2][..], &[1.0, 2.0, 3.0][..]));
        assert_eq!(SparseMatrix::identity(4).transpose(), SparseMatrix::identity(4));
    }

    #[test]
    fn norms() {
        let id = SparseMatrix::identity(4);
        assert_eq!(id.column_norms(), vec![1.0; 4]);
        assert_eq!(id.frobenius_norm(), 2.0);
        assert_eq!(SparseMatrix::zeros(3, 3).frobenius_norm(), 0.0);
        let c = SparseMatrix::from_triplets(2, 1, vec![(0, 0, 3.0), (1, 0, 4.0)]).unwrap();
        assert_eq!(c.column_norms(), vec![5.0]);
    }

    #[test]
    fn multiply_small_cases() {
        let a = SparseMatrix::from_triplets(1, 1, vec![(0, 0, 2.0)]).unwrap();
        let x = DenseMatrix::from_element(1, 1, 3.0);
        assert_eq!(a.mul_dense(&x).unwrap()[(0, 0)], 6.0);
        let id = SparseMatrix::identity(3);
        let x = DenseMatrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64 + 0.5);
        for side in [Side::Left, Side::Right] {
            for tr in [false, true] {
                let xx = if side == Side::Right { x.transpose() } else { x.clone() };
                assert_eq!(id.multiply_dense(&xx, side, tr).unwrap(), xx);
            }
        }
        assert!(matches!(
            sample().mul_dense(&DenseMatrix::zeros(3, 1)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn select_and_stack() {
        let a = sample();
        let s = a.select_columns(&[3, 0]).unwrap();
        assert_eq!(s.column(0), a.column(3));
        let h = s.hstack(&a).unwrap();
        assert_eq!(h.ncols(), 6);
        assert_eq!(h.column(5), a.column(3));
        assert!(a.select_columns(&[7]).is_err());
    }

    #[test]
    fn single_edge_incidence() {
        let g = WeightedEdgeList::new(2, vec![(0, 1, 4.0)]).unwrap();
        let b = incidence_matrix(&g).unwrap();
        assert_eq!(b.row(0), (&[0usize, 1][..], &[2.0, -2.0][..]));
        let k = laplacian(&b).to_dense();
        assert_eq!(k, DenseMatrix::from_row_slice(2, 2, &[4.0, -4.0, -4.0, 4.0]));
    }

    #[test]
    fn triangle_laplacian() {
        let g = WeightedEdgeList::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
        let k = laplacian(&incidence_matrix(&g).unwrap()).to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(k[(i, j)], if i == j { 2.0 } else { -1.0 });
            }
        }
    }

    #[test]
    fn edge_list_validation() {
        assert!(WeightedEdgeList::new(3, vec![(1, 1, 1.0)]).is_err());
        assert!(WeightedEdgeList::new(3, vec![(0, 1, 0.0)]).is_err());
        assert!(WeightedEdgeList::new(3, vec![(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(WeightedEdgeList::new(3, vec![(0, 3, 1.0)]).is_err());
        let g = WeightedEdgeList::new(5, vec![(0, 1, 1.0), (3, 4, 1.0)]).unwrap();
        assert_eq!(g.component_count(), 3);
    }

    #[test]
    fn zero_laplacian() {
        let k = laplacian(&SparseMatrix::zeros(3, 4));
        assert_eq!(k.nnz(), 0);
        assert_eq!((k.nrows(), k.ncols()), (4, 4));
    }
}
