use std::fmt;
use std::ops::Range;

use chrono::NaiveDateTime;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics, MetricSet};
use crate::dataset::{CalendarInfo, LoadFrame, HOURS_PER_DAY};
use crate::error::{Error, Result};
use crate::features::{audit_day_ahead, build_features, fit_pca_pair, Components, FeatureTable, LagLeadSpec};
use crate::hourly::{grid_search, train_ensemble, Forecast, ModelChoice, SearchGrid, MIN_VALIDATION_ROWS};
use crate::regressors::RegressorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "Y1->Y2")]
    Y1Y2,
    #[serde(rename = "Y2->Y1")]
    Y2Y1,
    #[serde(rename = "CV")]
    Cv,
}

impl CaseTag {
    pub const ALL: [CaseTag; 3] = [CaseTag::Y1Y2, CaseTag::Y2Y1, CaseTag::Cv];

    pub fn label(&self) -> &'static str {
        match self {
            CaseTag::Y1Y2 => "Y1->Y2",
            CaseTag::Y2Y1 => "Y2->Y1",
            CaseTag::Cv => "CV",
        }
    }

    /// Short name used on the command line and in file names.
    pub fn slug(&self) -> &'static str {
        match self {
            CaseTag::Y1Y2 => "y1y2",
            CaseTag::Y2Y1 => "y2y1",
            CaseTag::Cv => "cv",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for CaseTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        CaseTag::ALL
            .into_iter()
            .find(|c| c.slug() == s || c.label().to_ascii_lowercase() == s)
            .ok_or_else(|| Error::argument(format!("unknown test case `{s}` (use y1y2, y2y1, cv)")))
    }
}

/// Fits on a training table and predicts every row of a test table.
pub trait Forecaster: Sync {
    fn label(&self) -> String;

    fn forecast(&self, train: &FeatureTable, test: &FeatureTable, seed: u64) -> Result<Forecast>;
}

/// Regressor family trained per hour, either fixed or tuned by grid search.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelPlan {
    Fixed(RegressorConfig),
    Grid(SearchGrid),
}

impl Forecaster for ModelPlan {
    fn label(&self) -> String {
        match self {
            ModelPlan::Fixed(c) => c.family().to_string(),
            ModelPlan::Grid(g) => g.base.family().to_string(),
        }
    }

    fn forecast(&self, train: &FeatureTable, test: &FeatureTable, seed: u64) -> Result<Forecast> {
        let choice = match self {
            ModelPlan::Fixed(c) => ModelChoice::Single(c.clone()),
            ModelPlan::Grid(g) => {
                let grid = nested_grid(g, train);
                ModelChoice::PerHour(grid_search(train, &grid, seed)?.winners())
            }
        };
        train_ensemble(train, &choice, seed)?.stack_predict(test)
    }
}

/// Raise the holdout fraction when a short training window would leave fewer
/// than the minimum number of validation rows.
fn nested_grid(grid: &SearchGrid, train: &FeatureTable) -> SearchGrid {
    let rows = train.hours().iter().map(|m| m.rows()).min().unwrap_or(0);
    let mut out = grid.clone();
    if rows > 0 && grid.validation_rows(rows) < MIN_VALIDATION_ROWS {
        out.holdout_fraction = MIN_VALIDATION_ROWS as f64 / rows as f64;
    }
    out
}

/// Predicts the training mean of each hour of the day.
#[derive(Debug, Clone, Copy, Default)]
pub struct HourlyMean;

impl Forecaster for HourlyMean {
    fn label(&self) -> String {
        "hourly-mean".into()
    }

    fn forecast(&self, train: &FeatureTable, test: &FeatureTable, _seed: u64) -> Result<Forecast> {
        let mut means = [0.0; HOURS_PER_DAY];
        for (h, m) in means.iter_mut().enumerate() {
            let y = train
                .hour(h)
                .target
                .as_ref()
                .ok_or_else(|| Error::argument("training table has no load targets"))?;
            if y.is_empty() {
                return Err(Error::fit("no training rows").in_hour(h));
            }
            *m = y.iter().sum::<f64>() / y.len() as f64;
        }
        let mut timestamps = Vec::new();
        let mut values = Vec::new();
        for (h, _, idx) in test.chronological() {
            timestamps.push(test.timestamp_of(idx));
            values.push(means[h]);
        }
        Ok(Forecast { timestamps, values })
    }
}

/// Returns the true test load. Only useful to check the evaluation plumbing.
#[derive(Debug, Clone, Copy, Default)]
pub struct Oracle;

impl Forecaster for Oracle {
    fn label(&self) -> String {
        "oracle".into()
    }

    fn forecast(&self, _train: &FeatureTable, test: &FeatureTable, _seed: u64) -> Result<Forecast> {
        let values = test
            .targets_chronological()
            .ok_or_else(|| Error::argument("test table has no load targets"))?;
        let timestamps = test
            .chronological()
            .into_iter()
            .map(|(_, _, i)| test.timestamp_of(i))
            .collect();
        Ok(Forecast { timestamps, values })
    }
}

/// Data shared by every test case of one experiment.
#[derive(Debug, Clone, Copy)]
pub struct Experiment<'a> {
    pub frame: &'a LoadFrame,
    pub calendar: &'a CalendarInfo,
    pub components: Components,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train: Range<usize>,
    pub test: Range<usize>,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCaseResult {
    pub case: CaseTag,
    pub model: String,
    pub spec: String,
    /// Pooled over all folds for cross-validation.
    pub metrics: MetricSet,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub folds: Vec<FoldResult>,
    #[serde(skip)]
    pub timestamps: Vec<NaiveDateTime>,
    #[serde(skip)]
    pub actual: Vec<f64>,
    #[serde(skip)]
    pub predicted: Vec<f64>,
}

/// Hour range of calendar year `index` (1-based).
fn year(frame: &LoadFrame, index: usize) -> Result<Range<usize>> {
    frame.year_range(index).ok_or_else(|| {
        Error::argument(format!("frame does not cover year {index}; two full years are required"))
    })
}

fn check_frame<'a>(exp: &Experiment<'a>) -> Result<&'a [f64]> {
    if exp.calendar.len() != exp.frame.days() {
        return Err(Error::argument("calendar length differs from frame"));
    }
    exp.frame
        .load()
        .ok_or_else(|| Error::argument("evaluation requires a frame with load"))
}

/// Fit PCA on `train`, build features over the whole frame, and split into
/// train and test tables. Verifies the day-ahead rule on the test table and
/// that PCA saw none of the test hours.
fn split_tables(
    exp: &Experiment,
    spec: &LagLeadSpec,
    train: Range<usize>,
    test: Range<usize>,
) -> Result<(FeatureTable, FeatureTable)> {
    let (pt, pg) = fit_pca_pair(exp.frame, train.clone(), exp.components)?;
    let full = build_features(exp.frame, exp.calendar, &pt, &pg, spec)?;
    let test_table = full.select_hours(test.clone());
    let audit = audit_day_ahead(&test_table);
    if !audit.passed() {
        let v = &audit.violations[0];
        return Err(Error::Constraint(format!(
            "{} day-ahead violations in test window, first at {} hour {} column {}",
            audit.violations.len(),
            v.date,
            v.hour,
            v.column
        )));
    }
    let test_start = exp.frame.timestamp(test.start);
    for model in [&pt, &pg] {
        let scope = model.scope.expect("fitted with scope");
        if scope.overlaps(test_start, test.len()) {
            return Err(Error::Constraint("PCA fit window overlaps the test window".into()));
        }
    }
    Ok((full.select_hours(train), test_table))
}

fn score(
    forecaster: &dyn Forecaster,
    train: &FeatureTable,
    test: &FeatureTable,
    seed: u64,
) -> Result<(Forecast, Vec<f64>)> {
    let fc = forecaster.forecast(train, test, seed)?;
    let actual = test
        .targets_chronological()
        .ok_or_else(|| Error::argument("test table has no load targets"))?;
    if actual.len() != fc.len() {
        return Err(Error::Constraint(format!(
            "forecast has {} values for {} test hours",
            fc.len(),
            actual.len()
        )));
    }
    Ok((fc, actual))
}

/// Train on calendar year `train_year` (1 or 2) and score the other year.
pub fn run_case_year_swap(
    exp: &Experiment,
    train_year: usize,
    forecaster: &dyn Forecaster,
    spec: &LagLeadSpec,
    seed: u64,
) -> Result<TestCaseResult> {
    check_frame(exp)?;
    let (train, test, case) = match train_year {
        1 => (year(exp.frame, 1)?, year(exp.frame, 2)?, CaseTag::Y1Y2),
        2 => (year(exp.frame, 2)?, year(exp.frame, 1)?, CaseTag::Y2Y1),
        other => return Err(Error::argument(format!("training year must be 1 or 2, got {other}"))),
    };
    let (train_t, test_t) = split_tables(exp, spec, train, test)?;
    let (fc, actual) = score(forecaster, &train_t, &test_t, seed)?;
    Ok(TestCaseResult {
        case,
        model: forecaster.label(),
        spec: spec.label(),
        metrics: metrics(&actual, &fc.values)?,
        folds: Vec::new(),
        timestamps: fc.timestamps,
        actual,
        predicted: fc.values,
    })
}

/// `folds + 1` contiguous blocks covering `0..len`; the first block takes
/// the remainder.
pub fn cv_blocks(len: usize, folds: usize) -> Result<Vec<Range<usize>>> {
    if folds == 0 {
        return Err(Error::argument("at least one fold is required"));
    }
    let k = folds + 1;
    if len < k * HOURS_PER_DAY {
        return Err(Error::argument(format!(
            "{len} hours is too short for {folds} folds (need {})",
            k * HOURS_PER_DAY
        )));
    }
    let size = len / k;
    let first = size + len % k;
    let mut out = vec![0..first];
    for b in 1..k {
        let start = first + (b - 1) * size;
        out.push(start..start + size);
    }
    Ok(out)
}

/// Expanding-window cross-validation over the whole frame. Fold `i` trains on
/// blocks `1..=i` and tests on block `i + 1`; PCA and any grid search are refit
/// per fold.
pub fn run_case_expanding_cv(
    exp: &Experiment,
    folds: usize,
    forecaster: &dyn Forecaster,
    spec: &LagLeadSpec,
    seed: u64,
) -> Result<TestCaseResult> {
    check_frame(exp)?;
    let blocks = cv_blocks(exp.frame.len(), folds)?;
    let runs: Vec<Result<(Forecast, Vec<f64>, FoldResult)>> = (1..=folds)
        .into_par_iter()
        .map(|i| {
            let train = 0..blocks[i - 1].end;
            let test = blocks[i].clone();
            let (train_t, test_t) = split_tables(exp, spec, train.clone(), test.clone())?;
            let (fc, actual) = score(forecaster, &train_t, &test_t, seed)?;
            let m = metrics(&actual, &fc.values)?;
            Ok((
                fc,
                actual,
                FoldResult {
                    fold: i,
                    train,
                    test,
                    metrics: m,
                },
            ))
        })
        .collect();
    let mut timestamps = Vec::new();
    let mut actual = Vec::new();
    let mut predicted = Vec::new();
    let mut fold_results = Vec::with_capacity(folds);
    for r in runs {
        let (fc, a, f) = r?;
        timestamps.extend(fc.timestamps);
        predicted.extend(fc.values);
        actual.extend(a);
        fold_results.push(f);
    }
    Ok(TestCaseResult {
        case: CaseTag::Cv,
        model: forecaster.label(),
        spec: spec.label(),
        metrics: metrics(&actual, &predicted)?,
        folds: fold_results,
        timestamps,
        actual,
        predicted,
    })
}

pub const DEFAULT_FOLDS: usize = 5;

pub fn run_case(
    exp: &Experiment,
    case: CaseTag,
    forecaster: &dyn Forecaster,
    spec: &LagLeadSpec,
    seed: u64,
) -> Result<TestCaseResult> {
    match case {
        CaseTag::Y1Y2 => run_case_year_swap(exp, 1, forecaster, spec, seed),
        CaseTag::Y2Y1 => run_case_year_swap(exp, 2, forecaster, spec, seed),
        CaseTag::Cv => run_case_expanding_cv(exp, DEFAULT_FOLDS, forecaster, spec, seed),
    }
}

/// Run `cases` in parallel; results keep the order of `cases`.
pub fn run_cases(
    exp: &Experiment,
    cases: &[CaseTag],
    forecaster: &dyn Forecaster,
    spec: &LagLeadSpec,
    seed: u64,
) -> Result<Vec<TestCaseResult>> {
    cases
        .par_iter()
        .map(|&c| run_case(exp, c, forecaster, spec, seed))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Every spec under all three test cases, spec-major.
pub fn ablate_lags(
    exp: &Experiment,
    specs: &[LagLeadSpec],
    forecaster: &dyn Forecaster,
    seed: u64,
) -> Result<Vec<TestCaseResult>> {
    if specs.is_empty() {
        return Err(Error::argument("ablation needs at least one lag/lead spec"));
    }
    let cells: Vec<(&LagLeadSpec, CaseTag)> = specs
        .iter()
        .flat_map(|s| CaseTag::ALL.into_iter().map(move |c| (s, c)))
        .collect();
    cells
        .par_iter()
        .map(|&(s, c)| run_case(exp, c, forecaster, s, seed))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_arithmetic() {
        let b = cv_blocks(600, 5).unwrap();
        assert_eq!(b, vec![0..100, 100..200, 200..300, 300..400, 400..500, 500..600]);
        let b = cv_blocks(605, 5).unwrap();
        assert_eq!(b[0], 0..105);
        assert_eq!(b[5], 505..605);
        assert!(cv_blocks(100, 5).is_err());
        assert!(cv_blocks(1000, 0).is_err());
    }

    #[test]
    fn case_names() {
        for c in CaseTag::ALL {
            assert_eq!(c.slug().parse::<CaseTag>().unwrap(), c);
        }
        assert!("y3y1".parse::<CaseTag>().is_err());
    }
}
