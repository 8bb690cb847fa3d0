use std::ops::Range;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};

use crate::error::{Error, Result};

/// Number of measurement sites for each exogenous variable.
pub const SITES: usize = 5;

pub const HOURS_PER_DAY: usize = 24;

/// Hourly dataset: load plus five temperature and five GHI series.
///
/// Timestamps are implicit: row `i` is `start + i hours`. Construction
/// validates every invariant, so a `LoadFrame` in hand is always contiguous,
/// day-aligned and non-negative in GHI.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadFrame {
    start: NaiveDateTime,
    load: Option<Vec<f64>>,
    temp: [Vec<f64>; SITES],
    ghi: [Vec<f64>; SITES],
}

/// Names of the eleven series, in reporting order.
pub fn series_names() -> Vec<String> {
    let mut names = vec!["load".to_string()];
    names.extend((1..=SITES).map(|s| format!("temp_{s}")));
    names.extend((1..=SITES).map(|s| format!("ghi_{s}")));
    names
}

impl LoadFrame {
    pub fn new(
        start: NaiveDateTime,
        load: Option<Vec<f64>>,
        temp: [Vec<f64>; SITES],
        ghi: [Vec<f64>; SITES],
    ) -> Result<Self> {
        let len = temp[0].len();
        if len == 0 {
            return Err(Error::Integrity {
                row: 0,
                message: "frame is empty".into(),
            });
        }
        if start.hour() != 0 || start.minute() != 0 || start.second() != 0 {
            return Err(Error::Integrity {
                row: 0,
                message: format!("first timestamp {start} is not hour 0 of a day"),
            });
        }
        if !len.is_multiple_of(HOURS_PER_DAY) {
            return Err(Error::Integrity {
                row: len - len % HOURS_PER_DAY,
                message: format!("length {len} is not a multiple of 24"),
            });
        }
        let check = |name: String, series: &[f64], nonneg: bool| -> Result<()> {
            if series.len() != len {
                return Err(Error::Integrity {
                    row: series.len().min(len),
                    message: format!("series {name} has {} rows, expected {len}", series.len()),
                });
            }
            for (row, &v) in series.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Integrity {
                        row,
                        message: format!("non-finite value in {name}"),
                    });
                }
                if nonneg && v < 0.0 {
                    return Err(Error::Integrity {
                        row,
                        message: format!("negative value {v} in {name}"),
                    });
                }
            }
            Ok(())
        };
        if let Some(l) = &load {
            check("load".into(), l, false)?;
        }
        for s in 0..SITES {
            check(format!("temp_{}", s + 1), &temp[s], false)?;
            check(format!("ghi_{}", s + 1), &ghi[s], true)?;
        }
        Ok(Self {
            start,
            load,
            temp,
            ghi,
        })
    }

    pub fn len(&self) -> usize {
        self.temp[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn days(&self) -> usize {
        self.len() / HOURS_PER_DAY
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start.date()
    }

    pub fn timestamp(&self, hour_index: usize) -> NaiveDateTime {
        self.start + Duration::hours(hour_index as i64)
    }

    /// One past the last hour covered by the frame.
    pub fn end(&self) -> NaiveDateTime {
        self.timestamp(self.len())
    }

    pub fn load(&self) -> Option<&[f64]> {
        self.load.as_deref()
    }

    pub fn temp(&self, site: usize) -> &[f64] {
        &self.temp[site]
    }

    pub fn ghi(&self, site: usize) -> &[f64] {
        &self.ghi[site]
    }

    pub fn temps(&self) -> &[Vec<f64>; SITES] {
        &self.temp
    }

    pub fn ghis(&self) -> &[Vec<f64>; SITES] {
        &self.ghi
    }

    /// Series by reporting name (`load`, `temp_1`..`temp_5`, `ghi_1`..`ghi_5`).
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        if name == "load" {
            return self.load();
        }
        let (kind, idx) = name.split_once('_')?;
        let idx: usize = idx.parse().ok()?;
        if !(1..=SITES).contains(&idx) {
            return None;
        }
        match kind {
            "temp" => Some(&self.temp[idx - 1]),
            "ghi" => Some(&self.ghi[idx - 1]),
            _ => None,
        }
    }

    /// Copy without the load column, as used for forecast-horizon inputs.
    pub fn without_load(&self) -> LoadFrame {
        LoadFrame {
            load: None,
            ..self.clone()
        }
    }

    /// Sub-frame over whole days `[first_day, first_day + n_days)`.
    pub fn slice_days(&self, days: Range<usize>) -> Result<LoadFrame> {
        if days.end > self.days() || days.is_empty() {
            return Err(Error::argument(format!(
                "day range {days:?} outside frame of {} days",
                self.days()
            )));
        }
        let rows = days.start * HOURS_PER_DAY..days.end * HOURS_PER_DAY;
        let cut = |v: &Vec<f64>| v[rows.clone()].to_vec();
        Ok(LoadFrame {
            start: self.timestamp(rows.start),
            load: self.load.as_ref().map(cut),
            temp: std::array::from_fn(|s| cut(&self.temp[s])),
            ghi: std::array::from_fn(|s| cut(&self.ghi[s])),
        })
    }

    /// Contiguous hour ranges per calendar year, in order.
    pub fn year_ranges(&self) -> Vec<(i32, Range<usize>)> {
        let mut out: Vec<(i32, Range<usize>)> = Vec::new();
        for day in 0..self.days() {
            let year = (self.start_date() + Duration::days(day as i64)).year();
            let hours = day * HOURS_PER_DAY..(day + 1) * HOURS_PER_DAY;
            match out.last_mut() {
                Some((y, r)) if *y == year => r.end = hours.end,
                _ => out.push((year, hours)),
            }
        }
        out
    }

    /// Hour range of the `index`-th calendar year in the frame (1-based).
    pub fn year_range(&self, index: usize) -> Option<Range<usize>> {
        index
            .checked_sub(1)
            .and_then(|i| self.year_ranges().into_iter().nth(i))
            .map(|(_, r)| r)
    }

    /// `observations × SITES` matrix of temperatures over `rows`.
    pub fn temp_matrix(&self, rows: Range<usize>) -> crate::linalg::Matrix {
        site_matrix(&self.temp, rows)
    }

    /// `observations × SITES` matrix of GHI over `rows`.
    pub fn ghi_matrix(&self, rows: Range<usize>) -> crate::linalg::Matrix {
        site_matrix(&self.ghi, rows)
    }
}

fn site_matrix(series: &[Vec<f64>; SITES], rows: Range<usize>) -> crate::linalg::Matrix {
    let mut m = crate::linalg::Matrix::zeros(rows.len(), SITES);
    for (i, r) in rows.enumerate() {
        for s in 0..SITES {
            m[(i, s)] = series[s][r];
        }
    }
    m
}
