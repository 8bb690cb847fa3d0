use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lstsq, mat_vec, Matrix};

/// R² at or above this is treated as exact collinearity.
pub const COLLINEAR_R2: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifEntry {
    pub feature: String,
    /// `+∞` (serialized as `null`) for exact collinearity.
    #[serde(with = "infinite_as_null")]
    pub vif: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifReport {
    pub entries: Vec<VifEntry>,
}

impl VifReport {
    pub fn get(&self, feature: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.feature == feature).map(|e| e.vif)
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.vif).collect()
    }

    pub fn render(&self) -> String {
        let width = self
            .entries
            .iter()
            .map(|e| e.feature.len())
            .max()
            .unwrap_or(7)
            .max(7);
        let mut out = format!("{:<width$}  {:>14}\n", "feature", "vif");
        for e in &self.entries {
            if e.vif.is_finite() {
                writeln!(out, "{:<width$}  {:>14.6}", e.feature, e.vif).unwrap();
            } else {
                writeln!(out, "{:<width$}  {:>14}", e.feature, "inf").unwrap();
            }
        }
        out
    }
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Variance inflation factor of every column against all the others.
///
/// Each column is regressed on the remaining columns plus an intercept by
/// least squares; `VIF = 1 / (1 − R²)`. Constant columns and R² ≥ 1 − 1e-12
/// map to `+∞`.
pub fn vif(matrix: &Matrix, names: &[String]) -> Result<VifReport> {
    let n = matrix.rows();
    let p = matrix.cols();
    if names.len() != p {
        return Err(Error::argument(format!(
            "{} names for {p} columns",
            names.len()
        )));
    }
    if p == 0 {
        return Err(Error::argument("VIF needs at least one column"));
    }
    if n < p + 2 {
        return Err(Error::argument(format!(
            "VIF needs at least {} observations for {p} features, got {n}",
            p + 2
        )));
    }
    if !matrix.is_finite() {
        return Err(Error::argument("VIF input contains non-finite values"));
    }

    let mut entries = Vec::with_capacity(p);
    for i in 0..p {
        let target = matrix.column(i);
        let mut design = Matrix::zeros(n, p);
        for r in 0..n {
            design[(r, 0)] = 1.0;
            let mut c = 1;
            for j in (0..p).filter(|&j| j != i) {
                design[(r, c)] = matrix[(r, j)];
                c += 1;
            }
        }
        let beta = lstsq(&design, &target, 0.0, &[])?;
        let fitted = mat_vec(&design, &beta);
        let mean = target.iter().sum::<f64>() / n as f64;
        let sst: f64 = target.iter().map(|y| (y - mean).powi(2)).sum();
        let sse: f64 = target
            .iter()
            .zip(&fitted)
            .map(|(y, f)| (y - f).powi(2))
            .sum();
        let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
        let value = if r_squared >= COLLINEAR_R2 {
            f64::INFINITY
        } else {
            1.0 / (1.0 - r_squared)
        };
        entries.push(VifEntry {
            feature: names[i].clone(),
            vif: value,
            r_squared,
        });
    }
    Ok(VifReport { entries })
}
