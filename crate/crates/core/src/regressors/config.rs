use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Piecewise,
    Polynomial,
    Gbtree,
    Rforest,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Piecewise,
        Family::Polynomial,
        Family::Gbtree,
        Family::Rforest,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Piecewise => "piecewise",
            Family::Polynomial => "polynomial",
            Family::Gbtree => "gbtree",
            Family::Rforest => "rforest",
        }
    }

    pub fn default_config(&self) -> RegressorConfig {
        match self {
            Family::Piecewise => RegressorConfig::Piecewise(PiecewiseConfig::default()),
            Family::Polynomial => RegressorConfig::Polynomial(PolynomialConfig::default()),
            Family::Gbtree => RegressorConfig::Gbtree(GbTreeConfig::default()),
            Family::Rforest => RegressorConfig::Rforest(ForestConfig::default()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::argument(format!("unknown model family `{s}`")))
    }
}

/// Continuous two-segment (single hinge) linear regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PiecewiseConfig {
    /// Number of interior quantiles tried as the breakpoint.
    pub grid_size: usize,
    pub breakpoint_column: String,
}

impl Default for PiecewiseConfig {
    fn default() -> Self {
        Self {
            grid_size: 19,
            breakpoint_column: "pca_temp".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolynomialConfig {
    pub degree: u32,
    /// L2 penalty on every coefficient except the intercept.
    pub ridge: f64,
    /// Columns expanded into monomials up to `degree`; others enter linearly.
    pub expand: Vec<String>,
}

impl Default for PolynomialConfig {
    fn default() -> Self {
        Self {
            degree: 3,
            ridge: 0.0,
            expand: vec!["pca_temp".into(), "pca_ghi".into()],
        }
    }
}

/// Second-order gradient boosting of regression trees on squared error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbTreeConfig {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_child_weight: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Minimum gain required to split.
    pub gamma: f64,
    /// Row fraction sampled without replacement per round.
    pub subsample: f64,
    /// Starting prediction; the training-target mean when absent.
    pub base_score: Option<f64>,
}

impl Default for GbTreeConfig {
    fn default() -> Self {
        Self {
            rounds: 300,
            learning_rate: 0.05,
            max_depth: 5,
            min_child_weight: 1.0,
            lambda: 1.0,
            gamma: 0.0,
            subsample: 1.0,
            base_score: None,
        }
    }
}

/// Bagged CART regression trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub trees: usize,
    /// Unlimited when absent.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Fraction of features considered at each node.
    pub feature_fraction: f64,
    /// Draw a bootstrap sample per tree; otherwise every tree sees all rows.
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: None,
            min_samples_leaf: 2,
            feature_fraction: 0.5,
            bootstrap: true,
        }
    }
}

/// Model family plus its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RegressorConfig {
    Piecewise(PiecewiseConfig),
    Polynomial(PolynomialConfig),
    Gbtree(GbTreeConfig),
    Rforest(ForestConfig),
}

impl Default for RegressorConfig {
    fn default() -> Self {
        RegressorConfig::Gbtree(GbTreeConfig::default())
    }
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::argument(format!("{name} = {v} outside (0, 1]")))
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::argument(format!("{name} = {v} must be >= 0")))
    }
}

fn check_count(name: &str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Error::argument(format!("{name} must be >= 1")))
    }
}

impl RegressorConfig {
    pub fn family(&self) -> Family {
        match self {
            RegressorConfig::Piecewise(_) => Family::Piecewise,
            RegressorConfig::Polynomial(_) => Family::Polynomial,
            RegressorConfig::Gbtree(_) => Family::Gbtree,
            RegressorConfig::Rforest(_) => Family::Rforest,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RegressorConfig::Piecewise(c) => check_count("grid_size", c.grid_size),
            RegressorConfig::Polynomial(c) => {
                check_count("degree", c.degree as usize)?;
                check_nonneg("ridge", c.ridge)
            }
            RegressorConfig::Gbtree(c) => {
                // Zero rounds is allowed and yields the base score alone.
                check_fraction("learning_rate", c.learning_rate)?;
                check_count("max_depth", c.max_depth)?;
                check_nonneg("min_child_weight", c.min_child_weight)?;
                check_nonneg("lambda", c.lambda)?;
                check_nonneg("gamma", c.gamma)?;
                check_fraction("subsample", c.subsample)?;
                if let Some(b) = c.base_score {
                    if !b.is_finite() {
                        return Err(Error::argument("base_score must be finite"));
                    }
                }
                Ok(())
            }
            RegressorConfig::Rforest(c) => {
                check_count("trees", c.trees)?;
                if let Some(d) = c.max_depth {
                    check_count("max_depth", d)?;
                }
                check_count("min_samples_leaf", c.min_samples_leaf)?;
                check_fraction("feature_fraction", c.feature_fraction)
            }
        }
    }

    /// Set a numeric hyperparameter by name. Integer parameters must be given
    /// integral values.
    pub fn with_param(&self, name: &str, value: f64) -> Result<RegressorConfig> {
        let int = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::argument(format!("{name} needs a non-negative integer, got {v}")))
            }
        };
        let unknown = || Error::argument(format!("{} has no parameter `{name}`", self.family()));
        let mut out = self.clone();
        match &mut out {
            RegressorConfig::Piecewise(c) => match name {
                "grid_size" => c.grid_size = int(value)?,
                _ => return Err(unknown()),
            },
            RegressorConfig::Polynomial(c) => match name {
                "degree" => c.degree = int(value)? as u32,
                "ridge" => c.ridge = value,
                _ => return Err(unknown()),
            },
            RegressorConfig::Gbtree(c) => match name {
                "rounds" => c.rounds = int(value)?,
                "learning_rate" | "eta" => c.learning_rate = value,
                "max_depth" | "depth" => c.max_depth = int(value)?,
                "min_child_weight" => c.min_child_weight = value,
                "lambda" => c.lambda = value,
                "gamma" => c.gamma = value,
                "subsample" => c.subsample = value,
                "base_score" => c.base_score = Some(value),
                _ => return Err(unknown()),
            },
            RegressorConfig::Rforest(c) => match name {
                "trees" => c.trees = int(value)?,
                "max_depth" | "depth" => c.max_depth = Some(int(value)?),
                "min_samples_leaf" => c.min_samples_leaf = int(value)?,
                "feature_fraction" => c.feature_fraction = value,
                _ => return Err(unknown()),
            },
        }
        out.validate()?;
        Ok(out)
    }

    /// Compact one-line description of the hyperparameters.
    pub fn describe(&self) -> String {
        match self {
            RegressorConfig::Piecewise(c) => {
                format!("piecewise(grid={}, column={})", c.grid_size, c.breakpoint_column)
            }
            RegressorConfig::Polynomial(c) => {
                format!("polynomial(degree={}, ridge={})", c.degree, c.ridge)
            }
            RegressorConfig::Gbtree(c) => format!(
                "gbtree(rounds={}, eta={}, depth={}, mcw={}, lambda={}, gamma={}, subsample={})",
                c.rounds, c.learning_rate, c.max_depth, c.min_child_weight, c.lambda, c.gamma, c.subsample
            ),
            RegressorConfig::Rforest(c) => format!(
                "rforest(trees={}, depth={}, min_leaf={}, features={}, bootstrap={})",
                c.trees,
                c.max_depth.map_or("none".to_string(), |d| d.to_string()),
                c.min_samples_leaf,
                c.feature_fraction,
                c.bootstrap
            ),
        }
    }
}
