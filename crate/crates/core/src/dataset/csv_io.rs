use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use super::frame::{LoadFrame, SITES};
use crate::error::{Error, Result};

/// Maps logical columns to header names in the input file.
///
/// Time is read either from a single ISO-8601 `timestamp` column or from the
/// `year`, `month`, `day`, `hour` quadruple, whichever is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMapping {
    pub timestamp: String,
    pub year: String,
    pub month: String,
    pub day: String,
    pub hour: String,
    pub load: String,
    pub temp: [String; SITES],
    pub ghi: [String; SITES],
    /// Calendar year assigned to year index 1 when the `year` column holds
    /// small indices (1, 2, 3) instead of calendar years.
    pub year_index_base: i32,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            year: "year".into(),
            month: "month".into(),
            day: "day".into(),
            hour: "hour".into(),
            load: "load".into(),
            temp: std::array::from_fn(|s| format!("temp_{}", s + 1)),
            ghi: std::array::from_fn(|s| format!("ghi_{}", s + 1)),
            year_index_base: 2020,
        }
    }
}

const TIMESTAMP_FORMATS: &[&str] = &[
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    for fmt in TIMESTAMP_FORMATS {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t);
        }
    }
    // Hour-only forms such as `2020-01-01T05` or `2020-01-01 05`.
    let (date, hour) = s.split_once(['T', ' '])?;
    let date = NaiveDate::parse_from_str(date, "%Y-%m-%d").ok()?;
    let hour: u32 = hour.parse().ok()?;
    date.and_hms_opt(hour, 0, 0)
}

enum TimeColumns {
    Iso(usize),
    Parts([usize; 4]),
}

/// Read a competition-format CSV into a validated [`LoadFrame`].
///
/// Rows are sorted by timestamp before validation; integrity errors report
/// the 0-based data-row index from the file. A missing load column yields a
/// load-free frame, and so does a load column that is empty in every row.
pub fn load_csv(path: impl AsRef<Path>, schema: &ColumnMapping) -> Result<LoadFrame> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

pub fn read_csv<R: std::io::Read>(reader: R, schema: &ColumnMapping) -> Result<LoadFrame> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::Schema {
            column: schema.timestamp.clone(),
        });
    }
    let find = |name: &str| headers.iter().position(|h| h == name);
    let require = |name: &str| {
        find(name).ok_or_else(|| Error::Schema {
            column: name.to_string(),
        })
    };

    let time = match find(&schema.timestamp) {
        Some(i) => TimeColumns::Iso(i),
        None if find(&schema.year).is_some() => TimeColumns::Parts([
            require(&schema.year)?,
            require(&schema.month)?,
            require(&schema.day)?,
            require(&schema.hour)?,
        ]),
        None => {
            return Err(Error::Schema {
                column: schema.timestamp.clone(),
            })
        }
    };
    let load_col = find(&schema.load);
    let temp_cols: Vec<usize> = schema.temp.iter().map(|n| require(n)).collect::<Result<_>>()?;
    let ghi_cols: Vec<usize> = schema.ghi.iter().map(|n| require(n)).collect::<Result<_>>()?;

    struct Row {
        file_row: usize,
        raw_time: RawTime,
        load: Option<f64>,
        temp: [f64; SITES],
        ghi: [f64; SITES],
    }
    enum RawTime {
        Iso(NaiveDateTime),
        Parts(i32, u32, u32, u32),
    }

    let mut rows = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let cell = |col: usize| record.get(col).unwrap_or("");
        let number = |col: usize, name: &str| -> Result<f64> {
            cell(col).parse::<f64>().map_err(|e| Error::Parse {
                row,
                column: name.to_string(),
                message: format!("`{}`: {e}", cell(col)),
            })
        };
        let raw_time = match &time {
            TimeColumns::Iso(c) => RawTime::Iso(parse_timestamp(cell(*c)).ok_or_else(|| {
                Error::Parse {
                    row,
                    column: schema.timestamp.clone(),
                    message: format!("`{}` is not an ISO-8601 timestamp", cell(*c)),
                }
            })?),
            TimeColumns::Parts([y, m, d, h]) => {
                let int = |col: usize, name: &str| -> Result<i64> {
                    let v = number(col, name)?;
                    if v.fract() != 0.0 {
                        return Err(Error::Parse {
                            row,
                            column: name.to_string(),
                            message: format!("`{}` is not an integer", cell(col)),
                        });
                    }
                    Ok(v as i64)
                };
                RawTime::Parts(
                    int(*y, &schema.year)? as i32,
                    int(*m, &schema.month)? as u32,
                    int(*d, &schema.day)? as u32,
                    int(*h, &schema.hour)? as u32,
                )
            }
        };
        let load = match load_col {
            Some(c) if !cell(c).is_empty() => Some(number(c, &schema.load)?),
            _ => None,
        };
        let mut temp = [0.0; SITES];
        let mut ghi = [0.0; SITES];
        for s in 0..SITES {
            temp[s] = number(temp_cols[s], &schema.temp[s])?;
            ghi[s] = number(ghi_cols[s], &schema.ghi[s])?;
        }
        rows.push(Row {
            file_row: row,
            raw_time,
            load,
            temp,
            ghi,
        });
    }
    if rows.is_empty() {
        return Err(Error::Integrity {
            row: 0,
            message: "file has no data rows".into(),
        });
    }

    // Hour conventions: 0..23, or 1..24 (hour-ending) which is shifted down.
    let hour_shift = match &time {
        TimeColumns::Parts(_) => {
            let hours = rows.iter().filter_map(|r| match r.raw_time {
                RawTime::Parts(_, _, _, h) => Some(h),
                RawTime::Iso(_) => None,
            });
            let (lo, hi) = hours.fold((u32::MAX, 0), |(lo, hi), h| (lo.min(h), hi.max(h)));
            u32::from(lo >= 1 && hi == 24)
        }
        TimeColumns::Iso(_) => 0,
    };

    let mut stamped = Vec::with_capacity(rows.len());
    for r in rows {
        let ts = match r.raw_time {
            RawTime::Iso(t) => t,
            RawTime::Parts(y, m, d, h) => {
                let year = if y < 1000 { schema.year_index_base + y - 1 } else { y };
                NaiveDate::from_ymd_opt(year, m, d)
                    .and_then(|date| date.and_hms_opt(h - hour_shift.min(h), 0, 0))
                    .ok_or_else(|| Error::Parse {
                        row: r.file_row,
                        column: schema.year.clone(),
                        message: format!("invalid date {y}-{m}-{d} hour {h}"),
                    })?
            }
        };
        if ts.minute() != 0 || ts.second() != 0 {
            return Err(Error::Integrity {
                row: r.file_row,
                message: format!("timestamp {ts} is not on the hour"),
            });
        }
        stamped.push((ts, r));
    }
    stamped.sort_by_key(|(ts, _)| *ts);

    let start = stamped[0].0;
    for (i, (ts, r)) in stamped.iter().enumerate().skip(1) {
        let expected = start + Duration::hours(i as i64);
        if *ts == stamped[i - 1].0 {
            return Err(Error::Integrity {
                row: r.file_row,
                message: format!("duplicate timestamp {ts}"),
            });
        }
        if *ts != expected {
            return Err(Error::Integrity {
                row: r.file_row,
                message: format!("gap: expected {expected}, found {ts}"),
            });
        }
    }

    let present = stamped.iter().filter(|(_, r)| r.load.is_some()).count();
    let load = if present == 0 {
        None
    } else if present == stamped.len() {
        Some(stamped.iter().map(|(_, r)| r.load.unwrap_or_default()).collect())
    } else {
        let (_, r) = stamped.iter().find(|(_, r)| r.load.is_none()).expect("some row lacks load");
        return Err(Error::Parse {
            row: r.file_row,
            column: schema.load.clone(),
            message: "empty load cell in a file that has load values".into(),
        });
    };
    let temp = std::array::from_fn(|s| stamped.iter().map(|(_, r)| r.temp[s]).collect());
    let ghi = std::array::from_fn(|s| stamped.iter().map(|(_, r)| r.ghi[s]).collect());
    LoadFrame::new(start, load, temp, ghi)
}

/// Write a frame with the default column names and an ISO `timestamp`.
///
/// Numbers use the shortest representation that parses back to the same
/// `f64`, so writing then reading is lossless.
pub fn write_csv(frame: &LoadFrame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(frame, file)
}

pub fn write_csv_to<W: std::io::Write>(frame: &LoadFrame, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mapping = ColumnMapping::default();
    let mut header = vec![mapping.timestamp.clone()];
    if frame.load().is_some() {
        header.push(mapping.load.clone());
    }
    header.extend(mapping.temp.iter().cloned());
    header.extend(mapping.ghi.iter().cloned());
    wtr.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..frame.len() {
        record.clear();
        record.push(frame.timestamp(i).format("%Y-%m-%dT%H:%M:%S").to_string());
        if let Some(load) = frame.load() {
            record.push(load[i].to_string());
        }
        for s in 0..SITES {
            record.push(frame.temp(s)[i].to_string());
        }
        for s in 0..SITES {
            record.push(frame.ghi(s)[i].to_string());
        }
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fmt::Write as _;

    fn csv_text(days: usize, skip_hour: Option<usize>, with_load: bool) -> String {
        let mut s = String::from("timestamp");
        if with_load {
            s.push_str(",load");
        }
        for k in 1..=5 {
            write!(s, ",temp_{k}").unwrap();
        }
        for k in 1..=5 {
            write!(s, ",ghi_{k}").unwrap();
        }
        s.push('\n');
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        for i in 0..days * 24 {
            if Some(i) == skip_hour {
                continue;
            }
            let ts = start + Duration::hours(i as i64);
            write!(s, "{}", ts.format("%Y-%m-%dT%H:%M:%S")).unwrap();
            if with_load {
                write!(s, ",{}", 1000 + i).unwrap();
            }
            for k in 0..5 {
                write!(s, ",{}", 10.0 + k as f64 + i as f64 * 0.1).unwrap();
            }
            for k in 0..5 {
                write!(s, ",{}", (i % 24) as f64 * k as f64).unwrap();
            }
            s.push('\n');
        }
        s
    }

    #[test]
    fn reads_two_day_file() {
        let f = read_csv(csv_text(2, None, true).as_bytes(), &ColumnMapping::default()).unwrap();
        assert_eq!(f.len(), 48);
        assert_eq!(f.load().unwrap()[47], 1047.0);
    }

    #[test]
    fn gap_reports_row_of_missing_hour() {
        let err =
            read_csv(csv_text(2, Some(13), true).as_bytes(), &ColumnMapping::default()).unwrap_err();
        assert!(matches!(err, Error::Integrity { row: 13, .. }), "{err}");
    }

    #[test]
    fn duplicate_is_integrity_error() {
        let mut text = csv_text(1, None, true);
        let line = text.lines().nth(5).unwrap().to_string();
        text.push_str(&line);
        text.push('\n');
        let err = read_csv(text.as_bytes(), &ColumnMapping::default()).unwrap_err();
        assert!(matches!(err, Error::Integrity { .. }));
    }

    #[test]
    fn missing_column_is_named() {
        let text = csv_text(1, None, true).replace("ghi_3", "ghi_x");
        let err = read_csv(text.as_bytes(), &ColumnMapping::default()).unwrap_err();
        match err {
            Error::Schema { column } => assert_eq!(column, "ghi_3"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_location() {
        let text = csv_text(1, None, true).replacen(",1003,", ",abc,", 1);
        let err = read_csv(text.as_bytes(), &ColumnMapping::default()).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "load");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn load_column_is_optional() {
        let f = read_csv(csv_text(1, None, false).as_bytes(), &ColumnMapping::default()).unwrap();
        assert!(f.load().is_none());
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(read_csv("".as_bytes(), &ColumnMapping::default()).is_err());
    }

    #[test]
    fn quadruple_with_year_index_and_hour_ending() {
        let mut s = String::from("year,month,day,hour,load,temp_1,temp_2,temp_3,temp_4,temp_5,ghi_1,ghi_2,ghi_3,ghi_4,ghi_5\n");
        for h in 1..=24 {
            writeln!(s, "1,1,1,{h},{h},1,1,1,1,1,0,0,0,0,0").unwrap();
        }
        let f = read_csv(s.as_bytes(), &ColumnMapping::default()).unwrap();
        assert_eq!(f.start().to_string(), "2020-01-01 00:00:00");
        assert_eq!(f.load().unwrap()[0], 1.0);
    }

    #[test]
    fn unsorted_rows_are_sorted() {
        let text = csv_text(1, None, true);
        let mut lines: Vec<&str> = text.lines().collect();
        lines[1..].reverse();
        let f = read_csv(lines.join("\n").as_bytes(), &ColumnMapping::default()).unwrap();
        assert_eq!(f.load().unwrap()[0], 1000.0);
    }
}
