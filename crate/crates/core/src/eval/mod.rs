//! Error metrics, the three test protocols and report rendering.

mod cases;
mod metrics;
mod report;

pub use cases::{
    ablate_lags, cv_blocks, run_case, run_case_expanding_cv, run_case_year_swap, run_cases,
    CaseTag, Experiment, FoldResult, Forecaster, HourlyMean, ModelPlan, Oracle, TestCaseResult,
    DEFAULT_FOLDS,
};
pub use metrics::{metrics, MetricSet, Score, SelectionMetric, Undefined};
pub use report::{predictions_file_name, render_report, write_predictions, Report};
