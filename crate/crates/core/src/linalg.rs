//! Small dense linear algebra: a row-major matrix, a one-sided Jacobi SVD and
//! an SVD-backed least-squares solver.
//!
//! Problem sizes in this crate are tall and narrow (hundreds to tens of
//! thousands of rows, at most a few dozen columns), which is the regime where
//! one-sided Jacobi is both accurate and fast enough.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::argument(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from row slices; all rows must share the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::argument(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Build from columns of equal length.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::argument(format!(
                    "column {j} has {} entries, expected {rows}",
                    c.len()
                )));
            }
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::argument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let o = out.row_mut(i);
            for (k, &aik) in a.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                for (oj, &bkj) in o.iter_mut().zip(other.row(k)) {
                    *oj += aik * bkj;
                }
            }
        }
        Ok(out)
    }

    /// Select a subset of rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Select a subset of columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jn, &j) in idx.iter().enumerate() {
                out[(i, jn)] = self[(i, j)];
            }
        }
        out
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for r in self.iter_rows() {
            for (m, v) in means.iter_mut().zip(r) {
                *m += v;
            }
        }
        let n = self.rows as f64;
        means.iter_mut().for_each(|m| *m /= n);
        means
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ` with singular values
/// in descending order. `U` is `rows × cols`, `V` is `cols × cols`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns of `A` are orthogonalised by plane rotations applied from the
/// right; on convergence the column norms are the singular values.
/// Columns that are exactly zero yield zero singular values and zero `U`
/// columns.
pub fn svd(a: &Matrix) -> Svd {
    let n = a.rows();
    let p = a.cols();
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            e
        })
        .collect();

    let eps = f64::EPSILON;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in (i + 1)..p {
                let (alpha, beta, gamma) = {
                    let (ci, cj) = (&cols[i], &cols[j]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for k in 0..n {
                        alpha += ci[k] * ci[k];
                        beta += cj[k] * cj[k];
                        gamma += ci[k] * cj[k];
                    }
                    (alpha, beta, gamma)
                };
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, i, j, c, s);
                rotate_pair(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..p).collect();
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let mut u = Matrix::zeros(n, p);
    let mut vm = Matrix::zeros(p, p);
    let mut singular_values = Vec::with_capacity(p);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        singular_values.push(s);
        if s > 0.0 {
            for k in 0..n {
                u[(k, dst)] = cols[src][k] / s;
            }
        }
        for k in 0..p {
            vm[(k, dst)] = v[src][k];
        }
    }
    Svd {
        u,
        singular_values,
        v: vm,
    }
}

fn rotate_pair(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    let ci = &mut left[i];
    let cj = &mut right[0];
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let xi = *x;
        let yj = *y;
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

/// Least-squares solution of `min ‖A x − b‖² + ridge · Σ_{j ∈ penalized} x_j²`.
///
/// Columns are equilibrated to unit norm before the SVD and the minimum-norm
/// solution is taken over singular values above `max(rows, cols) · ε · s_max`.
/// All-zero columns receive a zero coefficient.
pub fn lstsq(a: &Matrix, b: &[f64], ridge: f64, penalized: &[bool]) -> Result<Vec<f64>> {
    let n = a.rows();
    let p = a.cols();
    if b.len() != n {
        return Err(Error::argument(format!(
            "target has {} entries, design has {n} rows",
            b.len()
        )));
    }
    if ridge < 0.0 || !ridge.is_finite() {
        return Err(Error::argument("ridge penalty must be finite and >= 0"));
    }
    if !penalized.is_empty() && penalized.len() != p {
        return Err(Error::argument("penalty mask length must match columns"));
    }

    let penalty_rows: Vec<usize> = if ridge > 0.0 {
        (0..p)
            .filter(|&j| penalized.is_empty() || penalized[j])
            .collect()
    } else {
        Vec::new()
    };
    let total_rows = n + penalty_rows.len();
    let mut aug = Matrix::zeros(total_rows, p);
    for i in 0..n {
        aug.row_mut(i).copy_from_slice(a.row(i));
    }
    let root = ridge.sqrt();
    for (r, &j) in penalty_rows.iter().enumerate() {
        aug[(n + r, j)] = root;
    }
    let mut rhs = b.to_vec();
    rhs.resize(total_rows, 0.0);

    let scale: Vec<f64> = (0..p)
        .map(|j| {
            (0..total_rows)
                .map(|i| aug[(i, j)] * aug[(i, j)])
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    for i in 0..total_rows {
        for j in 0..p {
            if scale[j] > 0.0 {
                aug[(i, j)] /= scale[j];
            }
        }
    }

    let dec = svd(&aug);
    let s_max = dec.singular_values.first().copied().unwrap_or(0.0);
    let tol = total_rows.max(p) as f64 * f64::EPSILON * s_max;
    let mut x = vec![0.0; p];
    for (k, &s) in dec.singular_values.iter().enumerate() {
        if s <= tol || s == 0.0 {
            continue;
        }
        let mut proj = 0.0;
        for i in 0..total_rows {
            proj += dec.u[(i, k)] * rhs[i];
        }
        let coef = proj / s;
        for j in 0..p {
            x[j] += coef * dec.v[(j, k)];
        }
    }
    for j in 0..p {
        if scale[j] > 0.0 {
            x[j] /= scale[j];
        } else {
            x[j] = 0.0;
        }
    }
    Ok(x)
}

/// `A x` for a row-major matrix.
pub fn mat_vec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    a.iter_rows()
        .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}
