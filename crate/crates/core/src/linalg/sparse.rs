use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};

/// General sparse matrix in compressed-column form with sorted row indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CscMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowval: Vec<usize>,
    pub nzval: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CscMatrix {
            nrows,
            ncols,
            colptr: vec![0; ncols + 1],
            rowval: Vec::new(),
            nzval: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CscMatrix {
            nrows: n,
            ncols: n,
            colptr: (0..=n).collect(),
            rowval: (0..n).collect(),
            nzval: vec![1.0; n],
        }
    }

    /// Builds from raw arrays, checking that they describe a valid matrix.
    pub fn new(
        nrows: usize,
        ncols: usize,
        colptr: Vec<usize>,
        rowval: Vec<usize>,
        nzval: Vec<f64>,
    ) -> Result<Self> {
        if colptr.len() != ncols + 1 {
            return Err(Error::dim("column pointer", ncols + 1, colptr.len()));
        }
        if rowval.len() != nzval.len() || colptr[ncols] != rowval.len() || colptr[0] != 0 {
            return Err(Error::dim("nonzero count", colptr[ncols], rowval.len()));
        }
        for j in 0..ncols {
            if colptr[j] > colptr[j + 1] {
                return Err(Error::Config(format!(
                    "column pointer decreases at column {j}"
                )));
            }
            let rows = &rowval[colptr[j]..colptr[j + 1]];
            if rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!(
                    "unsorted or duplicate rows in column {j}"
                )));
            }
            if let Some(&r) = rows.last() {
                if r >= nrows {
                    return Err(Error::dim("row index bound", nrows, r + 1));
                }
            }
        }
        Ok(CscMatrix {
            nrows,
            ncols,
            colptr,
            rowval,
            nzval,
        })
    }

    /// Builds from coordinate triplets; duplicates are summed and explicit
    /// zeros are kept.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        rows: &[usize],
        cols: &[usize],
        vals: &[f64],
    ) -> Result<Self> {
        if rows.len() != cols.len() || rows.len() != vals.len() {
            return Err(Error::dim(
                "triplet arrays",
                rows.len(),
                cols.len().max(vals.len()),
            ));
        }
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(rows.len());
        for k in 0..rows.len() {
            if rows[k] >= nrows {
                return Err(Error::dim("triplet row", nrows, rows[k] + 1));
            }
            if cols[k] >= ncols {
                return Err(Error::dim("triplet column", ncols, cols[k] + 1));
            }
            entries.push((cols[k], rows[k], vals[k]));
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut colptr = vec![0usize; ncols + 1];
        let mut rowval = Vec::with_capacity(entries.len());
        let mut nzval: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (c, r, v) in entries {
            if last == Some((c, r)) {
                *nzval.last_mut().unwrap() += v;
            } else {
                colptr[c + 1] += 1;
                rowval.push(r);
                nzval.push(v);
                last = Some((c, r));
            }
        }
        for j in 0..ncols {
            colptr[j + 1] += colptr[j];
        }
        Ok(CscMatrix {
            nrows,
            ncols,
            colptr,
            rowval,
            nzval,
        })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut colptr = vec![0];
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        for j in 0..ncols {
            for (i, row) in rows.iter().enumerate() {
                if row[j] != 0.0 {
                    rowval.push(i);
                    nzval.push(row[j]);
                }
            }
            colptr.push(rowval.len());
        }
        CscMatrix {
            nrows,
            ncols,
            colptr,
            rowval,
            nzval,
        }
    }

    pub fn nnz(&self) -> usize {
        self.nzval.len()
    }

    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.colptr[j]..self.colptr[j + 1];
        self.rowval[r.clone()]
            .iter()
            .copied()
            .zip(self.nzval[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.colptr[j]..self.colptr[j + 1];
        match self.rowval[r.clone()].binary_search(&i) {
            Ok(k) => self.nzval[r.start + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for (i, a) in self.col(j) {
                y[i] += a * xj;
            }
        }
    }

    /// `y = Aᵀ x`.
    pub fn tmul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.ncols)
            .map(|j| self.col(j).map(|(i, a)| a * x[i]).sum())
            .collect()
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut rows = Vec::with_capacity(self.nnz());
        let mut cols = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            for (i, _) in self.col(j) {
                rows.push(j);
                cols.push(i);
            }
        }
        CscMatrix::from_triplets(self.ncols, self.nrows, &rows, &cols, &self.nzval)
            .expect("transpose of a valid matrix")
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for j in 0..self.ncols {
            for (i, a) in self.col(j) {
                d[i][j] = a;
            }
        }
        d
    }

    /// Row-wise infinity norms.
    pub fn row_norms(&self) -> Vec<f64> {
        let mut n = vec![0.0f64; self.nrows];
        for (k, &i) in self.rowval.iter().enumerate() {
            n[i] = n[i].max(self.nzval[k].abs());
        }
        n
    }

    /// Column-wise infinity norms.
    pub fn col_norms(&self) -> Vec<f64> {
        (0..self.ncols)
            .map(|j| self.col(j).fold(0.0f64, |m, (_, a)| m.max(a.abs())))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.nzval.iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }

    /// `diag(l) · A · diag(r)` in place.
    pub fn scale(&mut self, l: &[f64], r: &[f64]) {
        for j in 0..self.ncols {
            for k in self.colptr[j]..self.colptr[j + 1] {
                self.nzval[k] *= l[self.rowval[k]] * r[j];
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.nzval.iter().all(|v| v.is_finite())
    }

    /// `AᵀA` including structural zeros from cancellation.
    pub fn gram(&self) -> CscMatrix {
        let at = self.transpose();
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..self.nrows {
            let entries: Vec<(usize, f64)> = at.col(i).collect();
            for &(a, va) in &entries {
                for &(b, vb) in &entries {
                    rows.push(a);
                    cols.push(b);
                    vals.push(va * vb);
                }
            }
        }
        CscMatrix::from_triplets(self.ncols, self.ncols, &rows, &cols, &vals)
            .expect("gram of a valid matrix")
    }
}

/// Symmetric matrix stored as its lower triangle in compressed-column form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric<T> {
    pub dim: usize,
    pub colptr: Vec<usize>,
    pub rowval: Vec<usize>,
    pub nzval: Vec<T>,
}

impl<T: Real> SparseSymmetric<T> {
    /// Builds from triplets referencing either triangle; entries above the
    /// diagonal are mirrored into the lower triangle and duplicates summed.
    pub fn from_triplets(dim: usize, rows: &[usize], cols: &[usize], vals: &[f64]) -> Result<Self> {
        let (r, c): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .zip(cols)
            .map(|(&i, &j)| if i >= j { (i, j) } else { (j, i) })
            .unzip();
        let csc = CscMatrix::from_triplets(dim, dim, &r, &c, vals)?;
        Ok(Self::from_lower_csc(&csc))
    }

    /// Takes the lower triangle of a square matrix.
    pub fn from_lower_csc(a: &CscMatrix) -> Self {
        let mut colptr = vec![0];
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        for j in 0..a.ncols {
            for (i, v) in a.col(j) {
                if i >= j {
                    rowval.push(i);
                    nzval.push(T::of(v));
                }
            }
            colptr.push(rowval.len());
        }
        SparseSymmetric {
            dim: a.ncols,
            colptr,
            rowval,
            nzval,
        }
    }

    pub fn from_dense(m: &[Vec<f64>]) -> Self {
        Self::from_lower_csc(&CscMatrix::from_dense(m))
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    pub fn nnz_lower(&self) -> usize {
        self.nzval.len()
    }

    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.colptr[j]..self.colptr[j + 1];
        self.rowval[r.clone()]
            .iter()
            .copied()
            .zip(self.nzval[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let r = self.colptr[j]..self.colptr[j + 1];
        match self.rowval[r.clone()].binary_search(&i) {
            Ok(k) => self.nzval[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.dim).map(|j| self.get(j, j)).collect()
    }

    /// Position of entry `(i, j)`, `i ≥ j`, in `nzval`.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.colptr[j]..self.colptr[j + 1];
        self.rowval[r.clone()]
            .binary_search(&i)
            .ok()
            .map(|k| r.start + k)
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.dim];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        y.iter_mut().for_each(|v| *v = T::zero());
        for j in 0..self.dim {
            let xj = x[j];
            let mut acc = T::zero();
            for (i, a) in self.col(j) {
                y[i] = y[i] + a * xj;
                if i != j {
                    acc = acc + a * x[i];
                }
            }
            y[j] = y[j] + acc;
        }
    }

    /// Matrix-vector product accumulated in `f64`.
    pub fn mul_vec_f64(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for j in 0..self.dim {
            for (i, a) in self.col(j) {
                let a = a.f64();
                y[i] += a * x[j];
                if i != j {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// Infinity norm of the full symmetric matrix.
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0f64; self.dim];
        for j in 0..self.dim {
            for (i, a) in self.col(j) {
                let a = a.f64().abs();
                rows[i] += a;
                if i != j {
                    rows[j] += a;
                }
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for j in 0..self.dim {
            for (i, a) in self.col(j) {
                d[i][j] = a.f64();
                d[j][i] = a.f64();
            }
        }
        d
    }

    pub fn cast<U: Real>(&self) -> SparseSymmetric<U> {
        SparseSymmetric {
            dim: self.dim,
            colptr: self.colptr.clone(),
            rowval: self.rowval.clone(),
            nzval: self.nzval.iter().map(|v| U::of(v.f64())).collect(),
        }
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.dim == other.dim && self.colptr == other.colptr && self.rowval == other.rowval
    }

    pub fn is_finite(&self) -> bool {
        self.nzval.iter().all(|v| v.is_finite())
    }
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn norm2(x: &[f64]) -> f64 {
    let scale = norm_inf(x);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale
        * x.iter()
            .map(|v| (v / scale) * (v / scale))
            .sum::<f64>()
            .sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
