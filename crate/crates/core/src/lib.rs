//! Hourly-binned electricity load forecasting.
//!
//! The pipeline reduces five-site temperature and GHI series with PCA,
//! builds one design matrix per hour of the day, fits an independent
//! regressor per hour and stacks the 24 predictions back into an hourly
//! series. Inputs for day `D` never use information from day `D + 1` on.

pub mod dataset;
pub mod design;
pub mod error;
pub mod eval;
pub mod features;
pub mod hourly;
pub mod linalg;
pub mod regressors;
pub mod rng;

pub use error::{Error, Result};
