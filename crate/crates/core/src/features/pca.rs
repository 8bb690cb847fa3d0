use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{svd, Matrix};

/// How many principal components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Components {
    Count(usize),
    /// Smallest k whose cumulative explained-variance ratio reaches the threshold.
    VarianceThreshold(f64),
}

impl Default for Components {
    fn default() -> Self {
        Components::Count(1)
    }
}

/// Hour range of the data a model was fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitScope {
    pub start: NaiveDateTime,
    pub hours: usize,
}

impl FitScope {
    pub fn end(&self) -> NaiveDateTime {
        self.start + Duration::hours(self.hours as i64)
    }

    /// True when `[start, start + hours)` intersects this scope.
    pub fn overlaps(&self, start: NaiveDateTime, hours: usize) -> bool {
        let end = start + Duration::hours(hours as i64);
        start < self.end() && self.start < end
    }
}

/// Fitted centering + projection.
///
/// Loadings are `features × components` with orthonormal columns; each
/// column is oriented so its entries sum to a non-negative value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub center: Vec<f64>,
    pub loadings: Matrix,
    /// Sample variance of each retained component (n − 1 denominator).
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Ratios of every component, retained or not.
    pub full_variance_ratio: Vec<f64>,
    pub scope: Option<FitScope>,
}

impl PcaModel {
    pub fn n_features(&self) -> usize {
        self.center.len()
    }

    pub fn n_components(&self) -> usize {
        self.loadings.cols()
    }

    pub fn with_scope(mut self, scope: FitScope) -> Self {
        self.scope = Some(scope);
        self
    }

    /// Project rows of `matrix` onto the components.
    pub fn transform(&self, matrix: &Matrix) -> Result<Matrix> {
        if matrix.cols() != self.n_features() {
            return Err(Error::argument(format!(
                "matrix has {} features, model expects {}",
                matrix.cols(),
                self.n_features()
            )));
        }
        let mut centered = matrix.clone();
        for i in 0..centered.rows() {
            for (v, c) in centered.row_mut(i).iter_mut().zip(&self.center) {
                *v -= c;
            }
        }
        centered.matmul(&self.loadings)
    }

    /// Map component scores back to feature space.
    pub fn reconstruct(&self, scores: &Matrix) -> Result<Matrix> {
        if scores.cols() != self.n_components() {
            return Err(Error::argument(format!(
                "scores have {} columns, model has {} components",
                scores.cols(),
                self.n_components()
            )));
        }
        let mut out = scores.matmul(&self.loadings.transpose())?;
        for i in 0..out.rows() {
            for (v, c) in out.row_mut(i).iter_mut().zip(&self.center) {
                *v += c;
            }
        }
        Ok(out)
    }
}

/// Fit PCA by SVD of the column-centred matrix. Columns are not scaled.
pub fn pca_fit(matrix: &Matrix, components: Components) -> Result<PcaModel> {
    let n = matrix.rows();
    let p = matrix.cols();
    if n < 2 {
        return Err(Error::argument("PCA needs at least 2 observations"));
    }
    if p == 0 {
        return Err(Error::argument("PCA needs at least 1 feature"));
    }
    if !matrix.is_finite() {
        return Err(Error::argument("PCA input contains non-finite values"));
    }
    match components {
        Components::Count(k) if k == 0 || k > p => {
            return Err(Error::argument(format!(
                "component count {k} outside 1..={p}"
            )))
        }
        Components::VarianceThreshold(t) if !(t > 0.0 && t <= 1.0) => {
            return Err(Error::argument(format!(
                "variance threshold {t} outside (0, 1]"
            )))
        }
        _ => {}
    }

    let center = matrix.column_means();
    let mut centered = matrix.clone();
    for i in 0..n {
        for (v, c) in centered.row_mut(i).iter_mut().zip(&center) {
            *v -= c;
        }
    }
    let dec = svd(&centered);
    let squares: Vec<f64> = dec.singular_values.iter().map(|s| s * s).collect();
    let total: f64 = squares.iter().sum();
    let ratios: Vec<f64> = squares
        .iter()
        .map(|s| if total > 0.0 { s / total } else { 0.0 })
        .collect();

    let k = match components {
        Components::Count(k) => k,
        Components::VarianceThreshold(t) => {
            let mut cum = 0.0;
            let mut k = p;
            for (i, r) in ratios.iter().enumerate() {
                cum += r;
                // Tolerate rounding just below the threshold.
                if cum >= t - 1e-12 {
                    k = i + 1;
                    break;
                }
            }
            k
        }
    };

    let mut loadings = Matrix::zeros(p, k);
    for c in 0..k {
        let sum: f64 = (0..p).map(|f| dec.v[(f, c)]).sum();
        let sign = if sum < 0.0 { -1.0 } else { 1.0 };
        for f in 0..p {
            loadings[(f, c)] = sign * dec.v[(f, c)];
        }
    }
    Ok(PcaModel {
        center,
        loadings,
        explained_variance: squares[..k].iter().map(|s| s / (n as f64 - 1.0)).collect(),
        explained_variance_ratio: ratios[..k].to_vec(),
        full_variance_ratio: ratios,
        scope: None,
    })
}
