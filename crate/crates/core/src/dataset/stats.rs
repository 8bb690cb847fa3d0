use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::frame::{series_names, LoadFrame};
use crate::error::{Error, Result};

/// Which part of the frame to summarise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Period {
    All,
    /// 1-based calendar-year index within the frame.
    Year(usize),
}

impl Period {
    pub fn label(&self) -> String {
        match self {
            Period::All => "All".into(),
            Period::Year(y) => format!("Year {y}"),
        }
    }
}

/// Summary statistics for one series over one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub series: String,
    pub period: String,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// m₃ / m₂^1.5 with central moments on the n denominator.
    pub skewness: f64,
    /// m₄ / m₂² − 3.
    pub excess_kurtosis: f64,
}

/// Statistics of a single slice. Zero-variance input reports σ = γ₁ = γ₂ = 0.
pub fn summarize(values: &[f64]) -> Result<DescriptiveStats> {
    if values.is_empty() {
        return Err(Error::argument("cannot describe an empty selection"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sum_sq = m2;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (std, skewness, excess_kurtosis) = if m2 > 0.0 {
        let std = if values.len() > 1 {
            (sum_sq / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        (std, m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0, 0.0)
    };

    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    };
    Ok(DescriptiveStats {
        series: String::new(),
        period: String::new(),
        count: values.len(),
        mean,
        std,
        median,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        skewness,
        excess_kurtosis,
    })
}

/// Describe every series present in the frame over `period`.
pub fn describe(frame: &LoadFrame, period: Period) -> Result<Vec<DescriptiveStats>> {
    let rows = match period {
        Period::All => 0..frame.len(),
        Period::Year(y) => frame
            .year_range(y)
            .ok_or_else(|| Error::argument(format!("frame has no year {y}")))?,
    };
    if rows.is_empty() {
        return Err(Error::argument("selected period is empty"));
    }
    let mut out = Vec::new();
    for name in series_names() {
        let Some(series) = frame.series(&name) else {
            continue;
        };
        let mut s = summarize(&series[rows.clone()])?;
        s.series = name;
        s.period = period.label();
        out.push(s);
    }
    Ok(out)
}

/// Describe each calendar year in turn.
pub fn describe_years(frame: &LoadFrame) -> Result<Vec<DescriptiveStats>> {
    let mut out = Vec::new();
    for y in 1..=frame.year_ranges().len() {
        out.extend(describe(frame, Period::Year(y))?);
    }
    Ok(out)
}

const STAT_ROWS: [&str; 7] = ["mean", "std", "median", "min", "max", "skewness", "kurtosis"];

fn stat_value(s: &DescriptiveStats, stat: &str) -> f64 {
    match stat {
        "mean" => s.mean,
        "std" => s.std,
        "median" => s.median,
        "min" => s.min,
        "max" => s.max,
        "skewness" => s.skewness,
        _ => s.excess_kurtosis,
    }
}

/// Aligned text table: one block per statistic, one line per period,
/// one column per series.
pub fn render_stats_table(stats: &[DescriptiveStats]) -> String {
    let mut series: Vec<&str> = Vec::new();
    let mut periods: Vec<&str> = Vec::new();
    for s in stats {
        if !series.contains(&s.series.as_str()) {
            series.push(&s.series);
        }
        if !periods.contains(&s.period.as_str()) {
            periods.push(&s.period);
        }
    }
    let width = 10;
    let mut out = String::new();
    write!(out, "{:<9}{:<8}", "stat", "period").unwrap();
    for name in &series {
        write!(out, "{name:>width$}").unwrap();
    }
    out.push('\n');
    for stat in STAT_ROWS {
        for period in &periods {
            write!(out, "{stat:<9}{period:<8}").unwrap();
            for name in &series {
                match stats.iter().find(|s| s.series == *name && s.period == *period) {
                    Some(s) => write!(out, "{:>width$.2}", stat_value(s, stat)).unwrap(),
                    None => write!(out, "{:>width$}", "-").unwrap(),
                }
            }
            out.push('\n');
        }
    }
    out
}

/// One CSV record per (series, period).
pub fn write_stats_csv<W: std::io::Write>(stats: &[DescriptiveStats], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for s in stats {
        wtr.serialize(s)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
