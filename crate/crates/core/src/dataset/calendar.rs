use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use super::frame::{LoadFrame, HOURS_PER_DAY};
use crate::error::{Error, Result};

const SHIPPED_HOLIDAYS: &str = include_str!("../../data/us_federal_holidays.csv");

/// Set of dates treated as days off.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HolidayCalendar {
    dates: BTreeMap<NaiveDate, String>,
}

impl HolidayCalendar {
    /// Fixed-date and observed US federal holidays for 2020–2022.
    pub fn us_federal() -> Self {
        Self::parse(SHIPPED_HOLIDAYS).expect("shipped holiday file is well formed")
    }

    /// Parse `date[,name]` lines; `#` starts a comment and a `date` header is skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dates = BTreeMap::new();
        for (row, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with("date") {
                continue;
            }
            let (date, name) = line.split_once(',').unwrap_or((line, ""));
            let date = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d").map_err(|e| {
                Error::Parse {
                    row,
                    column: "date".into(),
                    message: format!("`{date}`: {e}"),
                }
            })?;
            dates.insert(date, name.trim().to_string());
        }
        Ok(Self { dates })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn from_dates(dates: impl IntoIterator<Item = NaiveDate>) -> Self {
        Self {
            dates: dates.into_iter().map(|d| (d, String::new())).collect(),
        }
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.dates.contains_key(&date)
    }

    pub fn name(&self, date: NaiveDate) -> Option<&str> {
        self.dates.get(&date).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// How the first day of the frame is mapped onto the Gregorian calendar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// Use the dates carried by the frame's timestamps.
    Frame,
    /// The first day is this date.
    Date(NaiveDate),
    /// The first day is January 1 of the earliest leap year since 2001 that
    /// starts on this weekday.
    LeapYearStartingOn(Weekday),
}

impl Default for Anchor {
    fn default() -> Self {
        Anchor::LeapYearStartingOn(Weekday::Wed)
    }
}

/// Leap years in `years` whose January 1 falls on `weekday`.
pub fn leap_years_starting_on(weekday: Weekday, years: std::ops::RangeInclusive<i32>) -> Vec<i32> {
    years
        .filter(|&y| NaiveDate::from_ymd_opt(y, 2, 29).is_some())
        .filter(|&y| {
            NaiveDate::from_ymd_opt(y, 1, 1).map(|d| d.weekday()) == Some(weekday)
        })
        .collect()
}

impl Anchor {
    pub fn resolve(&self, frame: &LoadFrame) -> Result<NaiveDate> {
        match *self {
            Anchor::Frame => Ok(frame.start_date()),
            Anchor::Date(d) => Ok(d),
            Anchor::LeapYearStartingOn(w) => leap_years_starting_on(w, 2001..=2100)
                .first()
                .and_then(|&y| NaiveDate::from_ymd_opt(y, 1, 1))
                .ok_or_else(|| Error::argument(format!("no 21st-century leap year starts on {w}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayInfo {
    pub date: NaiveDate,
    pub weekday: Weekday,
    pub weekend: bool,
    pub holiday: bool,
    /// 1–12.
    pub month: u32,
    /// 1 for the anchor's year, 2 for the next, and so on.
    pub year_index: u32,
}

/// Per-day calendar attributes for a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CalendarInfo {
    days: Vec<DayInfo>,
}

impl CalendarInfo {
    pub fn days(&self) -> &[DayInfo] {
        &self.days
    }

    pub fn day(&self, index: usize) -> &DayInfo {
        &self.days[index]
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    /// Calendar starting at `first` spanning `n_days`.
    pub fn from_dates(first: NaiveDate, n_days: usize, holidays: &HolidayCalendar) -> Self {
        let base_year = first.year();
        let days = (0..n_days)
            .map(|i| {
                let date = first + Duration::days(i as i64);
                let weekday = date.weekday();
                DayInfo {
                    date,
                    weekday,
                    weekend: matches!(weekday, Weekday::Sat | Weekday::Sun),
                    holiday: holidays.contains(date),
                    month: date.month(),
                    year_index: (date.year() - base_year + 1) as u32,
                }
            })
            .collect();
        Self { days }
    }
}

/// Assign a date to every day of the frame by counting from the anchor.
pub fn infer_calendar(
    frame: &LoadFrame,
    anchor: Anchor,
    holidays: &HolidayCalendar,
) -> Result<CalendarInfo> {
    if !frame.len().is_multiple_of(HOURS_PER_DAY) {
        return Err(Error::Integrity {
            row: frame.len(),
            message: "frame length is not a multiple of 24".into(),
        });
    }
    let first = anchor.resolve(frame)?;
    Ok(CalendarInfo::from_dates(first, frame.days(), holidays))
}
