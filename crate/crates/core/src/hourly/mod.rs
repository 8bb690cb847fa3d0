//! One independent regressor per hour of the day, stacked back into an
//! hourly series.

mod grid;

use std::fs;
use std::path::Path;

use chrono::NaiveDateTime;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use grid::{grid_search, GridAxis, GridLogEntry, GridSearchResult, SearchGrid, MIN_VALIDATION_ROWS};

use crate::dataset::HOURS_PER_DAY;
use crate::error::{Error, Result};
use crate::features::{FeatureSpec, FeatureTable, LagLeadSpec, PcaModel};
use crate::regressors::{self, FittedRegressor, RegressorConfig};
use crate::rng::derive_seed;

pub const ENSEMBLE_FORMAT: &str = "hourcast-ensemble";
pub const ENSEMBLE_VERSION: u32 = 1;

/// Seed handed to the model of hour `h`.
pub fn hour_seed(root: u64, hour: usize) -> u64 {
    derive_seed(root, "hour", hour as u64)
}

/// One config for all hours, or one per hour.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelChoice {
    Single(RegressorConfig),
    PerHour(Vec<RegressorConfig>),
}

impl ModelChoice {
    fn for_hour(&self, h: usize) -> &RegressorConfig {
        match self {
            ModelChoice::Single(c) => c,
            ModelChoice::PerHour(v) => &v[h],
        }
    }
}

/// Predictions in chronological order.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub timestamps: Vec<NaiveDateTime>,
    pub values: Vec<f64>,
}

impl Forecast {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HourlyEnsemble {
    feature_spec: FeatureSpec,
    models: Vec<FittedRegressor>,
    seed: u64,
}

/// Fit the model of hour `h` on its rows of `table`.
pub fn train_hour(
    table: &FeatureTable,
    h: usize,
    config: &RegressorConfig,
    seed: u64,
) -> Result<FittedRegressor> {
    let m = table.hour(h);
    let y = m
        .target
        .as_ref()
        .ok_or_else(|| Error::argument("feature table has no load targets").in_hour(h))?;
    regressors::fit(config, &m.design, y, hour_seed(seed, h)).map_err(|e| e.in_hour(h))
}

/// Train the 24 hourly models. Hours run in parallel; results do not depend
/// on the thread count.
pub fn train_ensemble(table: &FeatureTable, choice: &ModelChoice, seed: u64) -> Result<HourlyEnsemble> {
    if let ModelChoice::PerHour(v) = choice {
        if v.len() != HOURS_PER_DAY {
            return Err(Error::argument(format!(
                "{} per-hour configs, need {HOURS_PER_DAY}",
                v.len()
            )));
        }
    }
    let fitted: Vec<Result<FittedRegressor>> = (0..HOURS_PER_DAY)
        .into_par_iter()
        .map(|h| train_hour(table, h, choice.for_hour(h), seed))
        .collect();
    let models = fitted.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(HourlyEnsemble {
        feature_spec: table.spec().clone(),
        models,
        seed,
    })
}

impl HourlyEnsemble {
    pub fn from_parts(feature_spec: FeatureSpec, models: Vec<FittedRegressor>, seed: u64) -> Result<Self> {
        if models.len() != HOURS_PER_DAY {
            return Err(Error::argument(format!(
                "{} hourly models, need {HOURS_PER_DAY}",
                models.len()
            )));
        }
        Ok(Self {
            feature_spec,
            models,
            seed,
        })
    }

    pub fn feature_spec(&self) -> &FeatureSpec {
        &self.feature_spec
    }

    pub fn models(&self) -> &[FittedRegressor] {
        &self.models
    }

    pub fn model(&self, h: usize) -> &FittedRegressor {
        &self.models[h]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn configs(&self) -> Vec<&RegressorConfig> {
        self.models.iter().map(|m| &m.config).collect()
    }

    pub fn columns(&self) -> &[String] {
        &self.models[0].columns
    }

    /// Refit hour `h` only, leaving the other 23 models untouched.
    pub fn retrain_hour(
        &mut self,
        table: &FeatureTable,
        h: usize,
        config: &RegressorConfig,
        seed: u64,
    ) -> Result<()> {
        self.models[h] = train_hour(table, h, config, seed)?;
        Ok(())
    }

    fn check_table(&self, table: &FeatureTable) -> Result<()> {
        if table.spec() != &self.feature_spec {
            return Err(Error::argument(
                "feature table was built with a different lag/lead spec or PCA models",
            ));
        }
        Ok(())
    }

    /// Predictions for each hour's rows of `table`.
    pub fn predict_hours(&self, table: &FeatureTable) -> Result<Vec<Vec<f64>>> {
        self.check_table(table)?;
        (0..HOURS_PER_DAY)
            .map(|h| {
                self.models[h]
                    .predict(&table.hour(h).design)
                    .map_err(|e| e.in_hour(h))
            })
            .collect()
    }

    /// All predictions of `table` in day-major, hour-minor order.
    pub fn stack_predict(&self, table: &FeatureTable) -> Result<Forecast> {
        let per_hour = self.predict_hours(table)?;
        let mut timestamps = Vec::with_capacity(table.total_rows());
        let mut values = Vec::with_capacity(table.total_rows());
        for (h, r, idx) in table.chronological() {
            timestamps.push(table.timestamp_of(idx));
            values.push(per_hour[h][r]);
        }
        Ok(Forecast { timestamps, values })
    }

    /// Write `manifest.json`, the two PCA models and `hour_00.json` … `hour_23.json`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, text: String| {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))
        };
        write("pca_temp.json", serde_json::to_string_pretty(&self.feature_spec.pca_temp)?)?;
        write("pca_ghi.json", serde_json::to_string_pretty(&self.feature_spec.pca_ghi)?)?;
        let mut hours = Vec::with_capacity(HOURS_PER_DAY);
        for (h, m) in self.models.iter().enumerate() {
            let file = format!("hour_{h:02}.json");
            m.save(&dir.join(&file))?;
            hours.push(ManifestHour {
                hour: h,
                file,
                config: m.config.clone(),
            });
        }
        let manifest = Manifest {
            format: ENSEMBLE_FORMAT.into(),
            version: ENSEMBLE_VERSION,
            seed: self.seed,
            lag_lead: self.feature_spec.lag_lead.clone(),
            columns: self.columns().to_vec(),
            pca_temp: "pca_temp.json".into(),
            pca_ghi: "pca_ghi.json".into(),
            hours,
        };
        write("manifest.json", serde_json::to_string_pretty(&manifest)? + "\n")
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|e| Error::io(&path, e))
        };
        let manifest: Manifest = serde_json::from_str(&read("manifest.json")?)?;
        if manifest.format != ENSEMBLE_FORMAT || manifest.version != ENSEMBLE_VERSION {
            return Err(Error::Unsupported(format!(
                "ensemble format {} v{}",
                manifest.format, manifest.version
            )));
        }
        manifest.lag_lead.validate()?;
        let pca_temp: PcaModel = serde_json::from_str(&read(&manifest.pca_temp)?)?;
        let pca_ghi: PcaModel = serde_json::from_str(&read(&manifest.pca_ghi)?)?;
        if manifest.hours.len() != HOURS_PER_DAY {
            return Err(Error::argument("manifest must list 24 hourly models"));
        }
        let mut models = Vec::with_capacity(HOURS_PER_DAY);
        for (h, entry) in manifest.hours.iter().enumerate() {
            if entry.hour != h {
                return Err(Error::argument(format!("manifest entry {h} is for hour {}", entry.hour)));
            }
            let m = FittedRegressor::load(&dir.join(&entry.file))?;
            if m.columns != manifest.columns {
                return Err(Error::argument("model columns differ from manifest").in_hour(h));
            }
            models.push(m);
        }
        Self::from_parts(
            FeatureSpec {
                lag_lead: manifest.lag_lead,
                pca_temp,
                pca_ghi,
            },
            models,
            manifest.seed,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct ManifestHour {
    hour: usize,
    file: String,
    config: RegressorConfig,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    seed: u64,
    lag_lead: LagLeadSpec,
    columns: Vec<String>,
    pca_temp: String,
    pca_ghi: String,
    hours: Vec<ManifestHour>,
}
