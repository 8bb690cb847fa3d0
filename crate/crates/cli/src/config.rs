use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{NaiveDate, Weekday};
use hourcast::dataset::{Anchor, ColumnMapping, HolidayCalendar};
use hourcast::features::{preset, Components, LagLeadSpec, LeadPolicy};
use hourcast::hourly::SearchGrid;
use hourcast::regressors::{Family, RegressorConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 20_240_101;

/// Everything a command needs, after merging defaults, the config file and flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train_csv: Option<PathBuf>,
    pub test_csv: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub jobs: Option<usize>,
    /// `leap-year:<weekday>`, `frame`, or a `YYYY-MM-DD` date.
    pub anchor: String,
    /// One date per line; US federal holidays when unset.
    pub holidays: Option<PathBuf>,
    pub pca_components: usize,
    /// Keep the fewest components reaching this explained-variance ratio instead.
    pub pca_variance: Option<f64>,
    pub preset: String,
    /// Custom lag offsets; together with `leads` they replace the preset.
    pub lags: Option<Vec<u32>>,
    pub leads: Option<Vec<u32>>,
    pub lead_policy: LeadPolicy,
    /// Model family, or a comma-separated list for `evaluate`.
    pub family: String,
    /// Fixed regressor config; disables grid search.
    pub model: Option<RegressorConfig>,
    /// Grid file (TOML or JSON); defaults to the built-in grid of the family.
    pub grid: Option<PathBuf>,
    pub cases: Vec<String>,
    pub folds: usize,
    pub columns: ColumnMapping,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            train_csv: None,
            test_csv: None,
            out_dir: PathBuf::from("hourcast-out"),
            seed: DEFAULT_SEED,
            jobs: None,
            anchor: "leap-year:wed".into(),
            holidays: None,
            pca_components: 1,
            pca_variance: None,
            preset: "Lag1".into(),
            lags: None,
            leads: None,
            lead_policy: LeadPolicy::ClampAtDayEnd,
            family: Family::Gbtree.to_string(),
            model: None,
            grid: None,
            cases: ["y1y2", "y2y1", "cv"].map(String::from).to_vec(),
            folds: hourcast::eval::DEFAULT_FOLDS,
            columns: ColumnMapping::default(),
        }
    }
}

/// Parse TOML, or JSON when the extension says so.
pub fn read_structured<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

fn check_exists(what: &str, path: &Option<PathBuf>) -> Result<()> {
    if let Some(p) = path {
        if !p.is_file() {
            bail!("{what} {} does not exist", p.display());
        }
    }
    Ok(())
}

fn parse_anchor(s: &str) -> Result<Anchor> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("frame") {
        return Ok(Anchor::Frame);
    }
    if let Some(day) = s.strip_prefix("leap-year:") {
        let w: Weekday = day
            .parse()
            .map_err(|_| anyhow::anyhow!("unknown weekday `{day}` in anchor"))?;
        return Ok(Anchor::LeapYearStartingOn(w));
    }
    match NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        Ok(d) => Ok(Anchor::Date(d)),
        Err(_) => bail!("anchor `{s}` is not `frame`, `leap-year:<weekday>` or a YYYY-MM-DD date"),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        check_exists("train CSV", &self.train_csv)?;
        check_exists("test CSV", &self.test_csv)?;
        check_exists("holiday file", &self.holidays)?;
        check_exists("grid file", &self.grid)?;
        if self.jobs == Some(0) {
            bail!("--jobs must be at least 1");
        }
        if self.pca_components == 0 {
            bail!("pca_components must be at least 1");
        }
        if let Some(v) = self.pca_variance {
            if !(v > 0.0 && v <= 1.0) {
                bail!("pca_variance {v} outside (0, 1]");
            }
        }
        parse_anchor(&self.anchor)?;
        if let Some(m) = &self.model {
            m.validate()?;
        }
        self.case_tags()?;
        Ok(())
    }

    pub fn train_csv(&self) -> Result<&Path> {
        self.train_csv
            .as_deref()
            .context("no training data: pass --train-csv or set train_csv")
    }

    pub fn test_csv(&self) -> Result<&Path> {
        self.test_csv
            .as_deref()
            .context("no test data: pass --test-csv or set test_csv")
    }

    pub fn anchor(&self) -> Result<Anchor> {
        parse_anchor(&self.anchor)
    }

    pub fn holiday_calendar(&self) -> Result<HolidayCalendar> {
        match &self.holidays {
            Some(p) => Ok(HolidayCalendar::from_file(p)?),
            None => Ok(HolidayCalendar::us_federal()),
        }
    }

    pub fn components(&self) -> Components {
        match self.pca_variance {
            Some(v) => Components::VarianceThreshold(v),
            None => Components::Count(self.pca_components),
        }
    }

    pub fn lag_lead(&self) -> Result<LagLeadSpec> {
        if self.lags.is_some() || self.leads.is_some() {
            let lags = self.lags.clone().unwrap_or_default();
            let leads = self.leads.clone().unwrap_or_default();
            return Ok(LagLeadSpec::new(lags, leads, self.lead_policy)?);
        }
        let spec = preset(&self.preset)?;
        if self.lead_policy != LeadPolicy::ClampAtDayEnd {
            return Ok(LagLeadSpec::new(spec.lags(), spec.leads(), self.lead_policy)?);
        }
        Ok(spec)
    }

    pub fn case_tags(&self) -> Result<Vec<hourcast::eval::CaseTag>> {
        if self.cases.is_empty() {
            bail!("no test cases selected");
        }
        let mut out = Vec::new();
        for c in &self.cases {
            let tag = c.parse()?;
            if !out.contains(&tag) {
                out.push(tag);
            }
        }
        Ok(out)
    }

    /// Families named in `family`, in order.
    pub fn family_names(&self) -> Vec<String> {
        self.family
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }

    /// The fixed config if one is set for `family`, else `None`.
    pub fn fixed_model(&self, family: Family) -> Option<RegressorConfig> {
        self.model.clone().filter(|m| m.family() == family)
    }

    pub fn search_grid(&self) -> Result<Option<SearchGrid>> {
        self.grid.as_deref().map(read_structured).transpose()
    }
}
