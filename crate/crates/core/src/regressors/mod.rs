//! Regression families fitted on one design matrix.

mod config;
mod forest;
mod gbtree;
mod linear;
mod tree;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use config::{
    Family, ForestConfig, GbTreeConfig, PiecewiseConfig, PolynomialConfig, RegressorConfig,
};
pub use linear::{breakpoint_grid, LinearModel, Term};
pub use tree::Tree;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "hourcast-regressor";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Linear(LinearModel),
    Boosted {
        base_score: f64,
        learning_rate: f64,
        trees: Vec<Tree>,
    },
    Forest {
        trees: Vec<Tree>,
    },
}

/// A trained regressor together with the columns it expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedRegressor {
    pub config: RegressorConfig,
    pub columns: Vec<String>,
    pub model: FittedModel,
    /// Non-fatal fitting notes, e.g. a degraded piecewise fit.
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    regressor: FittedRegressor,
}

fn check_training(design: &DesignMatrix, y: &[f64]) -> Result<()> {
    if design.rows() != y.len() {
        return Err(Error::argument(format!(
            "design has {} rows, target has {}",
            design.rows(),
            y.len()
        )));
    }
    if design.rows() < 2 {
        return Err(Error::fit(format!(
            "need at least 2 training rows, got {}",
            design.rows()
        )));
    }
    if design.columns.is_empty() {
        return Err(Error::fit("design has no feature columns"));
    }
    if !design.x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::fit("training data contains non-finite values"));
    }
    Ok(())
}

/// Fit `config` on `design`/`y`. Stochastic families draw from `seed`.
pub fn fit(
    config: &RegressorConfig,
    design: &DesignMatrix,
    y: &[f64],
    seed: u64,
) -> Result<FittedRegressor> {
    config.validate()?;
    check_training(design, y)?;
    let mut warnings = Vec::new();
    let model = match config {
        RegressorConfig::Piecewise(c) => {
            let (m, w) = linear::fit_piecewise(c, design, y)?;
            warnings = w;
            FittedModel::Linear(m)
        }
        RegressorConfig::Polynomial(c) => FittedModel::Linear(linear::fit_polynomial(c, design, y)?),
        RegressorConfig::Gbtree(c) => {
            let (base_score, trees) = gbtree::fit(c, &design.x, y, seed);
            FittedModel::Boosted {
                base_score,
                learning_rate: c.learning_rate,
                trees,
            }
        }
        RegressorConfig::Rforest(c) => FittedModel::Forest {
            trees: forest::fit(c, &design.x, y, seed),
        },
    };
    Ok(FittedRegressor {
        config: config.clone(),
        columns: design.columns.clone(),
        model,
        warnings,
    })
}

impl FittedRegressor {
    pub fn family(&self) -> Family {
        self.config.family()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.model {
            FittedModel::Linear(m) => m.predict_row(row),
            FittedModel::Boosted {
                base_score,
                learning_rate,
                trees,
            } => gbtree::predict_row(*base_score, *learning_rate, trees, row),
            FittedModel::Forest { trees } => forest::predict_row(trees, row),
        }
    }

    /// Predictions for every row; the design columns must match training.
    pub fn predict(&self, design: &DesignMatrix) -> Result<Vec<f64>> {
        design.check_columns(&self.columns)?;
        Ok(design.x.iter_rows().map(|r| self.predict_row(r)).collect())
    }

    /// Total split gain per feature, sorted descending (ties keep column order).
    pub fn feature_importance(&self) -> Result<Vec<(String, f64)>> {
        let trees = match &self.model {
            FittedModel::Boosted { trees, .. } | FittedModel::Forest { trees } => trees,
            FittedModel::Linear(_) => {
                return Err(Error::Unsupported(format!(
                    "feature importance is not defined for {}",
                    self.family()
                )))
            }
        };
        let mut totals = vec![0.0; self.columns.len()];
        for t in trees {
            t.add_importance(&mut totals);
        }
        let mut out: Vec<(String, f64)> = self.columns.iter().cloned().zip(totals).collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        Ok(out)
    }

    pub fn trees(&self) -> &[Tree] {
        match &self.model {
            FittedModel::Boosted { trees, .. } | FittedModel::Forest { trees } => trees,
            FittedModel::Linear(_) => &[],
        }
    }

    pub fn linear(&self) -> Option<&LinearModel> {
        match &self.model {
            FittedModel::Linear(m) => Some(m),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            regressor: self.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::argument(format!("not a model file: format `{}`", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Unsupported(format!(
                "model file version {} (expected {MODEL_VERSION})",
                file.version
            )));
        }
        file.regressor.config.validate()?;
        Ok(file.regressor)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
