use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Why a metric could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Undefined {
    /// All actuals are equal, so the total sum of squares is zero.
    ConstantActuals,
    /// An actual is zero.
    ZeroActual,
    /// An actual and its prediction are both zero.
    ZeroPair,
}

impl fmt::Display for Undefined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Undefined::ConstantActuals => "constant actuals",
            Undefined::ZeroActual => "zero actual",
            Undefined::ZeroPair => "zero actual and prediction",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Score {
    Value(f64),
    Undefined(Undefined),
}

impl Score {
    pub fn value(&self) -> Option<f64> {
        match self {
            Score::Value(v) => Some(*v),
            Score::Undefined(_) => None,
        }
    }

    /// The value, or NaN when undefined.
    pub fn or_nan(&self) -> f64 {
        self.value().unwrap_or(f64::NAN)
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Score::Value(_))
    }

    pub fn format(&self, decimals: usize) -> String {
        match self {
            Score::Value(v) => format!("{v:.decimals$}"),
            Score::Undefined(_) => "undef".into(),
        }
    }
}

/// R², RMSE (load units), MAPE and sMAPE (percent).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub n: usize,
    pub r2: Score,
    pub rmse: f64,
    pub mape: Score,
    pub smape: Score,
}

pub fn metrics(y: &[f64], yhat: &[f64]) -> Result<MetricSet> {
    if y.len() != yhat.len() {
        return Err(Error::argument(format!(
            "{} actuals but {} predictions",
            y.len(),
            yhat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::argument("metrics need at least one observation"));
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let mut sse = 0.0;
    let mut sst = 0.0;
    let mut ape = 0.0;
    let mut sape = 0.0;
    let mut zero_actual = false;
    let mut zero_pair = false;
    for (&a, &p) in y.iter().zip(yhat) {
        let e = a - p;
        sse += e * e;
        sst += (a - mean) * (a - mean);
        if a == 0.0 {
            zero_actual = true;
        } else {
            ape += e.abs() / a.abs();
        }
        let denom = a.abs() + p.abs();
        if denom == 0.0 {
            zero_pair = true;
        } else {
            sape += 2.0 * e.abs() / denom;
        }
    }
    let constant = y.iter().all(|&a| a == y[0]);
    Ok(MetricSet {
        n: y.len(),
        r2: if constant {
            Score::Undefined(Undefined::ConstantActuals)
        } else {
            Score::Value(1.0 - sse / sst)
        },
        rmse: (sse / n).sqrt(),
        mape: if zero_actual {
            Score::Undefined(Undefined::ZeroActual)
        } else {
            Score::Value(100.0 * ape / n)
        },
        smape: if zero_pair {
            Score::Undefined(Undefined::ZeroPair)
        } else {
            Score::Value(100.0 * sape / n)
        },
    })
}

/// Loss used to rank configurations; lower is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    #[default]
    Rmse,
    Mape,
    Smape,
}

impl SelectionMetric {
    /// Undefined or NaN scores rank last (`+inf`).
    pub fn loss(&self, y: &[f64], yhat: &[f64]) -> Result<f64> {
        let m = metrics(y, yhat)?;
        let v = match self {
            SelectionMetric::Rmse => m.rmse,
            SelectionMetric::Mape => m.mape.or_nan(),
            SelectionMetric::Smape => m.smape.or_nan(),
        };
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    }
}

impl std::str::FromStr for SelectionMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rmse" => Ok(SelectionMetric::Rmse),
            "mape" => Ok(SelectionMetric::Mape),
            "smape" => Ok(SelectionMetric::Smape),
            _ => Err(Error::argument(format!("unknown selection metric `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        let m = metrics(&[100.0, 200.0], &[110.0, 180.0]).unwrap();
        assert!((m.mape.value().unwrap() - 10.0).abs() < 1e-12);
        let m = metrics(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert!((m.rmse - 12.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(m.mape, Score::Undefined(Undefined::ZeroActual));
        assert_eq!(m.r2, Score::Undefined(Undefined::ConstantActuals));
        let m = metrics(&[100.0], &[300.0]).unwrap();
        assert!((m.smape.value().unwrap() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_mean_predictions() {
        let y = [3.0, 1.0, 4.0, 1.0, 5.0];
        let m = metrics(&y, &y).unwrap();
        assert_eq!(m.r2, Score::Value(1.0));
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.mape, Score::Value(0.0));
        assert_eq!(m.smape, Score::Value(0.0));
        let m = metrics(&y, &[2.8; 5]).unwrap();
        assert!(m.r2.value().unwrap().abs() < 1e-12);
    }

    #[test]
    fn zero_pair_is_flagged() {
        let m = metrics(&[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(m.smape, Score::Undefined(Undefined::ZeroPair));
        assert!(metrics(&[], &[]).is_err());
        assert!(metrics(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn selection_ranks_undefined_last() {
        let l = SelectionMetric::Mape.loss(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(l, f64::INFINITY);
    }
}
