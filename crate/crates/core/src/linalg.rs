//! Sparse symmetric storage and column-action operators.
//!
//! [`SparseSymMatrix`] keeps both triangles in compressed-row form so a
//! Gauss-Seidel sweep reads a whole row in one pass. [`ColumnOperator`] keeps a
//! general `m x n` matrix `C` by columns, which is what the normal-equation
//! sweep needs: it touches `C^T C` only through `c_i^T r` and `r -= t c_i`.

use crate::error::{check_len, Error, Result};

/// Symmetric matrix with full row storage and a cached diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_starts: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    diag: Vec<f64>,
    // position of the diagonal entry of row i inside `values`
    diag_pos: Vec<usize>,
}

impl SparseSymMatrix {
    /// Builds a matrix from full CSR arrays, validating every structural
    /// invariant (sorted unique columns, exact symmetry, positive diagonal).
    pub fn from_csr(n: usize, row_starts: Vec<usize>, col_indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if row_starts.len() != n + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_starts has length {}, expected {}",
                row_starts.len(),
                n + 1
            )));
        }
        if row_starts[0] != 0 || row_starts[n] != col_indices.len() {
            return Err(Error::InvalidStructure("row_starts does not span the entries".into()));
        }
        if col_indices.len() != values.len() {
            return Err(Error::InvalidStructure("index/value length mismatch".into()));
        }
        let mut diag = vec![0.0; n];
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            let (lo, hi) = (row_starts[i], row_starts[i + 1]);
            if lo > hi {
                return Err(Error::InvalidStructure(format!("row {i} has negative length")));
            }
            for p in lo..hi {
                let j = col_indices[p];
                if j >= n {
                    return Err(Error::InvalidStructure(format!("column {j} out of range in row {i}")));
                }
                if p > lo && col_indices[p - 1] >= j {
                    return Err(Error::InvalidStructure(format!("columns of row {i} are not strictly increasing")));
                }
                if !values[p].is_finite() {
                    return Err(Error::InvalidStructure(format!("non-finite entry at ({i}, {j})")));
                }
                if j == i {
                    diag[i] = values[p];
                    diag_pos[i] = p;
                }
            }
        }
        for i in 0..n {
            if diag_pos[i] == usize::MAX || diag[i] <= 0.0 {
                return Err(Error::NonPositiveDiagonal { index: i, value: diag[i] });
            }
        }
        let m = Self { n, row_starts, col_indices, values, diag, diag_pos };
        m.check_symmetric()?;
        Ok(m)
    }

    /// Builds a matrix from entries of the lower triangle (`row >= col`),
    /// mirroring the strictly lower ones. Duplicate coordinates are summed.
    pub fn from_lower_triplets(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut full = Vec::with_capacity(2 * entries.len());
        for &(i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::InvalidStructure(format!("entry ({i}, {j}) outside {n}x{n}")));
            }
            if i < j {
                return Err(Error::InvalidStructure(format!("entry ({i}, {j}) lies above the diagonal")));
            }
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        Self::from_full_triplets(n, full)
    }

    fn from_full_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|a| (a.0, a.1));
        let mut row_starts = vec![0usize; n + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            row_starts[i + 1] += 1;
            col_indices.push(j);
            values.push(v);
            last = Some((i, j));
        }
        for i in 0..n {
            row_starts[i + 1] += row_starts[i];
        }
        Self::from_csr(n, row_starts, col_indices, values)
    }

    /// Builds a matrix from a dense row-major array, storing every nonzero.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            check_len(n, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 || i == j {
                    entries.push((i, j, v));
                }
            }
        }
        Self::from_full_triplets(n, entries)
    }

    fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if j == i {
                    continue;
                }
                match self.get(j, i) {
                    Some(w) if w == v => {}
                    _ => return Err(Error::Asymmetric { row: i, col: j }),
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries (both triangles).
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn min_diag(&self) -> f64 {
        self.diag.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Iterates `(column, value)` over row `i` in ascending column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_starts[i], self.row_starts[i + 1]);
        self.col_indices[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    /// Raw slices of row `i`.
    pub(crate) fn row_slices(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_starts[i], self.row_starts[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (cols, vals) = self.row_slices(i);
        cols.binary_search(&j).ok().map(|p| vals[p])
    }

    /// `y = A x`, summing each row in ascending column order.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_len(self.n, x.len())?;
        check_len(self.n, y.len())?;
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row_slices(i);
            let mut acc = 0.0;
            for (&j, &a) in cols.iter().zip(vals) {
                acc += a * x[j];
            }
            *yi = acc;
        }
        Ok(())
    }

    /// Returns `A + sigma I`; the sparsity pattern is unchanged.
    pub fn shifted(&self, sigma: f64) -> SparseSymMatrix {
        let mut out = self.clone();
        for i in 0..out.n {
            let p = out.diag_pos[i];
            out.values[p] += sigma;
            out.diag[i] = out.values[p];
        }
        out
    }

    /// Entries with `row >= col`, in row-major order.
    pub fn lower_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity((self.nnz() + self.n) / 2);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if j <= i {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }
}

/// Column access to a linear map `C: R^n -> R^m`, enough to run SOR on the
/// normal equations `C^T C x = C^T d` without forming `C^T C`.
pub trait ColumnAction {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `||c_j||^2`
    fn col_sq_norm(&self, j: usize) -> f64;
    /// `c_j . r`
    fn col_dot(&self, j: usize, r: &[f64]) -> f64;
    /// `r += alpha c_j`
    fn col_axpy(&self, j: usize, alpha: f64, r: &mut [f64]);
    /// `out = C x`
    fn apply_into(&self, x: &[f64], out: &mut [f64]);
    /// `out = C^T y`
    fn apply_transpose_into(&self, y: &[f64], out: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols(), x.len())?;
        let mut out = vec![0.0; self.rows()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows(), y.len())?;
        let mut out = vec![0.0; self.cols()];
        self.apply_transpose_into(y, &mut out);
        Ok(out)
    }

    /// `C^T (C x)` through two operator applications.
    fn normal_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let cx = self.apply(x)?;
        self.apply_transpose(&cx)
    }
}

impl<T: ColumnAction + ?Sized> ColumnAction for &T {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn col_sq_norm(&self, j: usize) -> f64 {
        (**self).col_sq_norm(j)
    }
    fn col_dot(&self, j: usize, r: &[f64]) -> f64 {
        (**self).col_dot(j, r)
    }
    fn col_axpy(&self, j: usize, alpha: f64, r: &mut [f64]) {
        (**self).col_axpy(j, alpha, r)
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).apply_into(x, out)
    }
    fn apply_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        (**self).apply_transpose_into(y, out)
    }
}

/// General sparse matrix stored by columns, with cached squared column norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnOperator {
    rows: usize,
    cols: usize,
    col_starts: Vec<usize>,
    row_indices: Vec<usize>,
    values: Vec<f64>,
    col_sq_norms: Vec<f64>,
}

impl ColumnOperator {
    /// Builds an operator from per-column `(row, value)` lists. Rows inside a
    /// column must be strictly increasing; every column must be nonzero.
    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let cols = columns.len();
        let mut col_starts = Vec::with_capacity(cols + 1);
        let mut row_indices = Vec::new();
        let mut values = Vec::new();
        let mut col_sq_norms = Vec::with_capacity(cols);
        col_starts.push(0);
        for (j, col) in columns.into_iter().enumerate() {
            let mut sq = 0.0;
            let mut prev: Option<usize> = None;
            for (i, v) in col {
                if i >= rows {
                    return Err(Error::InvalidStructure(format!("row {i} out of range in column {j}")));
                }
                if prev.is_some_and(|p| p >= i) {
                    return Err(Error::InvalidStructure(format!("rows of column {j} are not strictly increasing")));
                }
                if !v.is_finite() {
                    return Err(Error::InvalidStructure(format!("non-finite entry at ({i}, {j})")));
                }
                prev = Some(i);
                sq += v * v;
                row_indices.push(i);
                values.push(v);
            }
            if sq <= 0.0 {
                return Err(Error::ZeroColumn(j));
            }
            col_sq_norms.push(sq);
            col_starts.push(row_indices.len());
        }
        Ok(Self { rows, cols, col_starts, row_indices, values, col_sq_norms })
    }

    /// Builds an operator from a dense row-major `m x n` array.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            check_len(n, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    columns[j].push((i, v));
                }
            }
        }
        Self::from_columns(m, columns)
    }

    pub fn col_sq_norms(&self) -> &[f64] {
        &self.col_sq_norms
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.col_starts[j], self.col_starts[j + 1]);
        self.row_indices[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    /// Assembles `C^T C` explicitly. Meant for small equivalence checks: the
    /// product can be far denser than `C`.
    pub fn build_explicit_normal(&self) -> Result<SparseSymMatrix> {
        if self.cols == 0 {
            return Err(Error::InvalidParameter("operator has no columns".into()));
        }
        // row-wise view of C
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.rows];
        for j in 0..self.cols {
            for (i, v) in self.column(j) {
                by_row[i].push((j, v));
            }
        }
        let mut acc = vec![0.0; self.cols];
        let mut touched = vec![false; self.cols];
        let mut pattern = Vec::new();
        let mut row_starts = Vec::with_capacity(self.cols + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_starts.push(0);
        for j in 0..self.cols {
            for (k, ckj) in self.column(j) {
                for &(l, ckl) in &by_row[k] {
                    if !touched[l] {
                        touched[l] = true;
                        pattern.push(l);
                    }
                    acc[l] += ckj * ckl;
                }
            }
            pattern.sort_unstable();
            for &l in &pattern {
                col_indices.push(l);
                values.push(acc[l]);
                acc[l] = 0.0;
                touched[l] = false;
            }
            pattern.clear();
            row_starts.push(col_indices.len());
        }
        SparseSymMatrix::from_csr(self.cols, row_starts, col_indices, values)
    }
}

impl ColumnAction for ColumnOperator {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn col_sq_norm(&self, j: usize) -> f64 {
        self.col_sq_norms[j]
    }

    fn col_dot(&self, j: usize, r: &[f64]) -> f64 {
        self.column(j).map(|(i, v)| v * r[i]).sum()
    }

    fn col_axpy(&self, j: usize, alpha: f64, r: &mut [f64]) {
        for (i, v) in self.column(j) {
            r[i] += alpha * v;
        }
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                self.col_axpy(j, xj, out);
            }
        }
    }

    fn apply_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.col_dot(j, y);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn diff_norm2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle3() -> SparseSymMatrix {
        SparseSymMatrix::from_dense(&[vec![2.0, -1.0, 0.5], vec![-1.0, 2.0, -1.0], vec![0.5, -1.0, 2.0]]).unwrap()
    }

    fn small_c() -> ColumnOperator {
        ColumnOperator::from_dense(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]]).unwrap()
    }

    #[test]
    fn matvec_examples() {
        let a = cycle3();
        let y = a.matvec(&[0.8, 0.0, 0.8]).unwrap();
        for (got, want) in y.iter().zip([2.0, -1.6, 2.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        let eye = SparseSymMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(eye.matvec(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let a2 = SparseSymMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        assert_eq!(a2.matvec(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        assert!(matches!(cycle3().matvec(&[1.0, 2.0]), Err(Error::DimensionMismatch { expected: 3, got: 2 })));
    }

    #[test]
    fn rejects_bad_input() {
        let asym = SparseSymMatrix::from_dense(&[vec![2.0, 1.0], vec![0.5, 2.0]]);
        assert!(matches!(asym, Err(Error::Asymmetric { .. })));
        let zero_diag = SparseSymMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 2.0]]);
        assert!(matches!(zero_diag, Err(Error::NonPositiveDiagonal { index: 0, .. })));
        let missing = SparseSymMatrix::from_lower_triplets(2, &[(0, 0, 1.0), (1, 0, 0.5)]);
        assert!(matches!(missing, Err(Error::NonPositiveDiagonal { index: 1, .. })));
        let unsorted = SparseSymMatrix::from_csr(2, vec![0, 2, 3], vec![1, 0, 1], vec![1.0, 2.0, 2.0]);
        assert!(matches!(unsorted, Err(Error::InvalidStructure(_))));
    }

    #[test]
    fn lower_triplets_roundtrip() {
        let a = cycle3();
        let b = SparseSymMatrix::from_lower_triplets(3, &a.lower_triplets()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.diag(), &[2.0, 2.0, 2.0]);
        assert_eq!(a.nnz(), 9);
    }

    #[test]
    fn shift_changes_only_diagonal() {
        let a = cycle3().shifted(1.0);
        assert_eq!(a.diag(), &[3.0, 3.0, 3.0]);
        assert_eq!(a.get(0, 2), Some(0.5));
        assert_eq!(a.get(1, 0), Some(-1.0));
    }

    #[test]
    fn normal_matvec_examples() {
        let c = small_c();
        assert_eq!(c.apply(&[1.0, 1.0]).unwrap(), vec![1.0, 2.0, 2.0]);
        assert_eq!(c.normal_matvec(&[1.0, 1.0]).unwrap(), vec![3.0, 6.0]);
        assert_eq!(c.normal_matvec(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let eye = ColumnOperator::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(eye.normal_matvec(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        assert!(c.normal_matvec(&[1.0]).is_err());
    }

    #[test]
    fn explicit_normal_examples() {
        let a = small_c().build_explicit_normal().unwrap();
        assert_eq!(a.to_dense(), vec![vec![2.0, 1.0], vec![1.0, 5.0]]);
        assert_eq!(a.diag(), small_c().col_sq_norms());
        let eye = ColumnOperator::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(eye.build_explicit_normal().unwrap().to_dense(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let s = ColumnOperator::from_dense(&[vec![3.0]]).unwrap();
        assert_eq!(s.build_explicit_normal().unwrap().to_dense(), vec![vec![9.0]]);
    }

    #[test]
    fn zero_column_rejected() {
        let c = ColumnOperator::from_dense(&[vec![1.0, 0.0], vec![2.0, 0.0]]);
        assert!(matches!(c, Err(Error::ZeroColumn(1))));
    }
}
