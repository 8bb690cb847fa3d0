use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hour_seed;
use crate::dataset::HOURS_PER_DAY;
use crate::error::{Error, Result};
use crate::eval::SelectionMetric;
use crate::features::FeatureTable;
use crate::regressors::{self, GbTreeConfig, RegressorConfig};

pub const MIN_VALIDATION_ROWS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

/// Cartesian product of hyperparameter values over a base config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub base: RegressorConfig,
    #[serde(default)]
    pub axes: Vec<GridAxis>,
    /// Final fraction of each hour's rows held out for scoring.
    #[serde(default = "default_holdout")]
    pub holdout_fraction: f64,
    #[serde(default)]
    pub metric: SelectionMetric,
}

fn default_holdout() -> f64 {
    0.2
}

impl SearchGrid {
    pub fn single(config: RegressorConfig) -> Self {
        Self {
            base: config,
            axes: Vec::new(),
            holdout_fraction: default_holdout(),
            metric: SelectionMetric::Rmse,
        }
    }

    /// 36 boosting configs, smallest capacity first.
    pub fn default_gbtree() -> Self {
        let axis = |name: &str, values: &[f64]| GridAxis {
            name: name.into(),
            values: values.to_vec(),
        };
        Self {
            base: RegressorConfig::Gbtree(GbTreeConfig::default()),
            axes: vec![
                axis("rounds", &[100.0, 300.0, 600.0]),
                axis("learning_rate", &[0.05, 0.1]),
                axis("max_depth", &[3.0, 5.0, 7.0]),
                axis("lambda", &[1.0, 10.0]),
            ],
            holdout_fraction: default_holdout(),
            metric: SelectionMetric::Rmse,
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every grid point, last axis varying fastest.
    pub fn configs(&self) -> Result<Vec<RegressorConfig>> {
        if self.is_empty() {
            return Err(Error::argument("search grid has an axis with no values"));
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return Err(Error::argument(format!(
                "holdout fraction {} outside (0, 1)",
                self.holdout_fraction
            )));
        }
        self.base.validate()?;
        let mut out = Vec::with_capacity(self.len());
        let mut digits = vec![0usize; self.axes.len()];
        loop {
            let mut cfg = self.base.clone();
            for (axis, &d) in self.axes.iter().zip(&digits) {
                cfg = cfg.with_param(&axis.name, axis.values[d])?;
            }
            out.push(cfg);
            let mut k = self.axes.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                digits[k] += 1;
                if digits[k] < self.axes[k].values.len() {
                    break;
                }
                digits[k] = 0;
            }
        }
    }

    /// `name=value` pairs of grid point `index`.
    pub fn params(&self, index: usize) -> String {
        let mut rem = index;
        let mut parts = vec![String::new(); self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.values.len();
            parts[k] = format!("{}={}", axis.name, axis.values[rem % n]);
            rem /= n;
        }
        if parts.is_empty() {
            self.base.describe()
        } else {
            parts.join(";")
        }
    }

    /// Validation rows held out from an hour with `rows` rows.
    pub fn validation_rows(&self, rows: usize) -> usize {
        (rows as f64 * self.holdout_fraction).ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridLogEntry {
    pub hour: usize,
    pub config_id: usize,
    pub params: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub configs: Vec<RegressorConfig>,
    pub best_index: Vec<usize>,
    pub best_score: Vec<f64>,
    /// Hour-major, then grid order.
    pub log: Vec<GridLogEntry>,
}

impl GridSearchResult {
    pub fn winners(&self) -> Vec<RegressorConfig> {
        self.best_index.iter().map(|&i| self.configs[i].clone()).collect()
    }

    pub fn write_log_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["hour", "config_id", "params", "score"])?;
        for e in &self.log {
            w.write_record([
                e.hour.to_string(),
                e.config_id.to_string(),
                e.params.clone(),
                e.score.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn search_hour(
    table: &FeatureTable,
    grid: &SearchGrid,
    configs: &[RegressorConfig],
    h: usize,
    seed: u64,
) -> Result<(usize, f64, Vec<GridLogEntry>)> {
    let m = table.hour(h);
    let y = m
        .target
        .as_ref()
        .ok_or_else(|| Error::argument("feature table has no load targets"))?;
    let n = m.rows();
    let n_val = grid.validation_rows(n);
    if n_val < MIN_VALIDATION_ROWS {
        return Err(Error::argument(format!(
            "holdout leaves {n_val} validation rows, need at least {MIN_VALIDATION_ROWS}"
        )));
    }
    if n - n_val < 2 {
        return Err(Error::argument(format!(
            "holdout leaves {} training rows",
            n - n_val
        )));
    }
    let split = n - n_val;
    let train_idx: Vec<usize> = (0..split).collect();
    let val_idx: Vec<usize> = (split..n).collect();
    let train = m.design.select_rows(&train_idx);
    let val = m.design.select_rows(&val_idx);
    let (y_train, y_val) = y.split_at(split);
    let mut best = (0, f64::INFINITY);
    let mut log = Vec::with_capacity(configs.len());
    for (i, cfg) in configs.iter().enumerate() {
        let fitted = regressors::fit(cfg, &train, y_train, hour_seed(seed, h))?;
        let score = grid.metric.loss(y_val, &fitted.predict(&val)?)?;
        if i == 0 || score < best.1 {
            best = (i, score);
        }
        log.push(GridLogEntry {
            hour: h,
            config_id: i,
            params: grid.params(i),
            score,
        });
    }
    Ok((best.0, best.1, log))
}

/// Per hour, fit every grid point on the leading rows and score it on the
/// trailing holdout. The first config in grid order wins ties.
pub fn grid_search(table: &FeatureTable, grid: &SearchGrid, seed: u64) -> Result<GridSearchResult> {
    let configs = grid.configs()?;
    let per_hour: Vec<Result<(usize, f64, Vec<GridLogEntry>)>> = (0..HOURS_PER_DAY)
        .into_par_iter()
        .map(|h| search_hour(table, grid, &configs, h, seed).map_err(|e| e.in_hour(h)))
        .collect();
    let mut best_index = Vec::with_capacity(HOURS_PER_DAY);
    let mut best_score = Vec::with_capacity(HOURS_PER_DAY);
    let mut log = Vec::with_capacity(HOURS_PER_DAY * configs.len());
    for r in per_hour {
        let (i, s, l) = r?;
        best_index.push(i);
        best_score.push(s);
        log.extend(l);
    }
    Ok(GridSearchResult {
        configs,
        best_index,
        best_score,
        log,
    })
}
