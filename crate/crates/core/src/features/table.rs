use std::ops::Range;
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pca::{pca_fit, Components, FitScope, PcaModel};
use super::spec::LagLeadSpec;
use crate::dataset::{CalendarInfo, LoadFrame, HOURS_PER_DAY, SITES};
use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Everything needed to rebuild the same columns at forecast time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub lag_lead: LagLeadSpec,
    pub pca_temp: PcaModel,
    pub pca_ghi: PcaModel,
}

/// Fit the temperature and GHI PCA models on hours `rows` of `frame`.
pub fn fit_pca_pair(
    frame: &LoadFrame,
    rows: Range<usize>,
    components: Components,
) -> Result<(PcaModel, PcaModel)> {
    let scope = FitScope {
        start: frame.timestamp(rows.start),
        hours: rows.len(),
    };
    let temp = pca_fit(&frame.temp_matrix(rows.clone()), components)?.with_scope(scope);
    let ghi = pca_fit(&frame.ghi_matrix(rows), components)?.with_scope(scope);
    Ok((temp, ghi))
}

/// Source instant of the rawest input behind a feature cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: NaiveDateTime,
    /// Set when a lag reached before the first hour and the earliest value
    /// was used instead.
    pub backfilled: bool,
}

/// Design matrix of one hour-of-day: one row per day.
#[derive(Debug, Clone, PartialEq)]
pub struct HourMatrix {
    pub hour: usize,
    /// Day index (from the table origin) of each row.
    pub days: Vec<usize>,
    pub design: DesignMatrix,
    /// Row-major, `rows × columns`.
    pub provenance: Vec<Provenance>,
    pub target: Option<Vec<f64>>,
}

impl HourMatrix {
    pub fn rows(&self) -> usize {
        self.days.len()
    }

    pub fn provenance_at(&self, row: usize, col: usize) -> Provenance {
        self.provenance[row * self.design.columns.len() + col]
    }

    fn select(&self, keep: &[usize]) -> HourMatrix {
        let cols = self.design.columns.len();
        HourMatrix {
            hour: self.hour,
            days: keep.iter().map(|&r| self.days[r]).collect(),
            design: self.design.select_rows(keep),
            provenance: keep
                .iter()
                .flat_map(|&r| self.provenance[r * cols..(r + 1) * cols].iter().copied())
                .collect(),
            target: self
                .target
                .as_ref()
                .map(|t| keep.iter().map(|&r| t[r]).collect()),
        }
    }
}

/// Twenty-four per-hour design matrices sharing one column set.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    origin: NaiveDateTime,
    hours: Vec<HourMatrix>,
    spec: FeatureSpec,
}

impl FeatureTable {
    pub fn origin(&self) -> NaiveDateTime {
        self.origin
    }

    pub fn spec(&self) -> &FeatureSpec {
        &self.spec
    }

    pub fn columns(&self) -> &[String] {
        &self.hours[0].design.columns
    }

    pub fn hour(&self, h: usize) -> &HourMatrix {
        &self.hours[h]
    }

    pub fn hours(&self) -> &[HourMatrix] {
        &self.hours
    }

    pub fn has_targets(&self) -> bool {
        self.hours.iter().all(|h| h.target.is_some())
    }

    pub fn total_rows(&self) -> usize {
        self.hours.iter().map(HourMatrix::rows).sum()
    }

    pub fn date_of_day(&self, day: usize) -> NaiveDate {
        self.origin.date() + Duration::days(day as i64)
    }

    pub fn timestamp_of(&self, hour_index: usize) -> NaiveDateTime {
        self.origin + Duration::hours(hour_index as i64)
    }

    /// `(hour, row)` of every cell in chronological order, with its absolute
    /// hour index from the origin.
    pub fn chronological(&self) -> Vec<(usize, usize, usize)> {
        let mut cells: Vec<(usize, usize, usize)> = self
            .hours
            .iter()
            .enumerate()
            .flat_map(|(h, m)| {
                m.days
                    .iter()
                    .enumerate()
                    .map(move |(r, &d)| (d * HOURS_PER_DAY + h, h, r))
            })
            .collect();
        cells.sort_unstable();
        cells.into_iter().map(|(i, h, r)| (h, r, i)).collect()
    }

    /// Targets in chronological order, when present.
    pub fn targets_chronological(&self) -> Option<Vec<f64>> {
        if !self.has_targets() {
            return None;
        }
        Some(
            self.chronological()
                .into_iter()
                .map(|(h, r, _)| self.hours[h].target.as_ref().expect("checked")[r])
                .collect(),
        )
    }

    /// Keep only cells whose absolute hour index lies in `range`.
    pub fn select_hours(&self, range: Range<usize>) -> FeatureTable {
        let hours = self
            .hours
            .iter()
            .enumerate()
            .map(|(h, m)| {
                let keep: Vec<usize> = m
                    .days
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| range.contains(&(d * HOURS_PER_DAY + h)))
                    .map(|(r, _)| r)
                    .collect();
                m.select(&keep)
            })
            .collect();
        FeatureTable {
            origin: self.origin,
            hours,
            spec: self.spec.clone(),
        }
    }

    pub fn select_days(&self, days: Range<usize>) -> FeatureTable {
        self.select_hours(days.start * HOURS_PER_DAY..days.end * HOURS_PER_DAY)
    }

    /// Overwrite one provenance record. Used to inject faults when testing audits.
    pub fn set_provenance(&mut self, hour: usize, row: usize, col: usize, p: Provenance) {
        let cols = self.hours[hour].design.columns.len();
        self.hours[hour].provenance[row * cols + col] = p;
    }

    /// Write `hour_00.csv` … `hour_23.csv` plus a `provenance.json` sidecar.
    pub fn export(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for m in &self.hours {
            let path = dir.join(format!("hour_{:02}.csv", m.hour));
            let mut wtr = csv::Writer::from_path(&path)?;
            let mut header = vec!["date".to_string()];
            header.extend(m.design.columns.iter().cloned());
            if m.target.is_some() {
                header.push("load".into());
            }
            wtr.write_record(&header)?;
            for r in 0..m.rows() {
                let mut rec = vec![self.date_of_day(m.days[r]).to_string()];
                rec.extend(m.design.x.row(r).iter().map(f64::to_string));
                if let Some(t) = &m.target {
                    rec.push(t[r].to_string());
                }
                wtr.write_record(&rec)?;
            }
            wtr.flush().map_err(|e| Error::io(&path, e))?;
        }

        #[derive(Serialize)]
        struct Sidecar<'a> {
            origin: NaiveDateTime,
            columns: &'a [String],
            hours: Vec<HourSidecar>,
        }
        #[derive(Serialize)]
        struct HourSidecar {
            hour: usize,
            rows: Vec<RowSidecar>,
        }
        #[derive(Serialize)]
        struct RowSidecar {
            date: NaiveDate,
            sources: Vec<NaiveDateTime>,
            backfilled: Vec<String>,
        }
        let cols = self.columns();
        let sidecar = Sidecar {
            origin: self.origin,
            columns: cols,
            hours: self
                .hours
                .iter()
                .map(|m| HourSidecar {
                    hour: m.hour,
                    rows: (0..m.rows())
                        .map(|r| RowSidecar {
                            date: self.date_of_day(m.days[r]),
                            sources: (0..cols.len()).map(|c| m.provenance_at(r, c).source).collect(),
                            backfilled: (0..cols.len())
                                .filter(|&c| m.provenance_at(r, c).backfilled)
                                .map(|c| cols[c].clone())
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        };
        let path = dir.join("provenance.json");
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), &sidecar)?;
        Ok(())
    }
}

fn pca_names(prefix: &str, k: usize) -> Vec<String> {
    if k == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=k).map(|c| format!("{prefix}_{c}")).collect()
    }
}

/// Column names produced by [`build_features`] for a given spec.
pub fn feature_columns(spec: &LagLeadSpec, temp_components: usize, ghi_components: usize) -> Vec<String> {
    let pca: Vec<String> = pca_names("pca_temp", temp_components)
        .into_iter()
        .chain(pca_names("pca_ghi", ghi_components))
        .collect();
    let mut cols = pca.clone();
    cols.extend((2..=12).map(|m| format!("month_{m}")));
    cols.push("holiday".into());
    cols.push("weekend".into());
    for k in spec.lags() {
        cols.extend(pca.iter().map(|c| format!("{c}_lag{k}")));
    }
    for k in spec.leads() {
        cols.extend(pca.iter().map(|c| format!("{c}_lead{k}")));
    }
    cols
}

/// Build the 24 per-hour design matrices for `frame`.
///
/// Row `D` of the hour-`h` matrix holds, in order: the PCA scores at
/// `(D, h)`, eleven month dummies (January is the reference), the holiday
/// and weekend dummies, then for each lag `k` the scores `k` hours earlier
/// in the continuous series and for each lead `k` the scores at hour
/// `min(h + k, 23)` of day `D`.
pub fn build_features(
    frame: &LoadFrame,
    calendar: &CalendarInfo,
    pca_temp: &PcaModel,
    pca_ghi: &PcaModel,
    spec: &LagLeadSpec,
) -> Result<FeatureTable> {
    spec.validate()?;
    if calendar.len() != frame.days() {
        return Err(Error::argument(format!(
            "calendar has {} days, frame has {}",
            calendar.len(),
            frame.days()
        )));
    }
    for (name, model) in [("temperature", pca_temp), ("GHI", pca_ghi)] {
        if model.n_features() != SITES {
            return Err(Error::argument(format!(
                "{name} PCA expects {} features, frame has {SITES} sites",
                model.n_features()
            )));
        }
        if model.scope.is_none() {
            return Err(Error::argument(format!(
                "{name} PCA model carries no fit scope; fit it on a training window"
            )));
        }
    }

    let n = frame.len();
    let temp_scores = pca_temp.transform(&frame.temp_matrix(0..n))?;
    let ghi_scores = pca_ghi.transform(&frame.ghi_matrix(0..n))?;
    let kt = pca_temp.n_components();
    let kg = pca_ghi.n_components();
    let columns = feature_columns(spec, kt, kg);
    let lags: Vec<u32> = spec.lags().collect();
    let leads: Vec<u32> = spec.leads().collect();
    let days = frame.days();

    let build_hour = |h: usize| -> Result<HourMatrix> {
        let mut x = Matrix::zeros(days, columns.len());
        let mut provenance = Vec::with_capacity(days * columns.len());
        let mut target = frame.load().map(|_| Vec::with_capacity(days));
        for d in 0..days {
            let idx = d * HOURS_PER_DAY + h;
            let here = frame.timestamp(idx);
            let row = x.row_mut(d);
            let mut c = 0;
            let put_scores = |row: &mut [f64],
                              provenance: &mut Vec<Provenance>,
                              c: &mut usize,
                              src: usize,
                              backfilled: bool| {
                let p = Provenance {
                    source: frame.timestamp(src),
                    backfilled,
                };
                for j in 0..kt {
                    row[*c] = temp_scores[(src, j)];
                    provenance.push(p);
                    *c += 1;
                }
                for j in 0..kg {
                    row[*c] = ghi_scores[(src, j)];
                    provenance.push(p);
                    *c += 1;
                }
            };
            put_scores(row, &mut provenance, &mut c, idx, false);

            let info = calendar.day(d);
            let own = Provenance {
                source: here,
                backfilled: false,
            };
            for m in 2..=12 {
                row[c] = f64::from(u8::from(info.month == m));
                c += 1;
            }
            row[c] = f64::from(u8::from(info.holiday));
            row[c + 1] = f64::from(u8::from(info.weekend));
            c += 2;
            provenance.extend(std::iter::repeat_n(own, 13));

            for &k in &lags {
                let k = k as usize;
                let (src, backfilled) = if idx >= k { (idx - k, false) } else { (0, true) };
                put_scores(row, &mut provenance, &mut c, src, backfilled);
            }
            for &k in &leads {
                let src = d * HOURS_PER_DAY + (h + k as usize).min(HOURS_PER_DAY - 1);
                put_scores(row, &mut provenance, &mut c, src, false);
            }
            debug_assert_eq!(c, columns.len());
            if let (Some(t), Some(load)) = (target.as_mut(), frame.load()) {
                t.push(load[idx]);
            }
        }
        Ok(HourMatrix {
            hour: h,
            days: (0..days).collect(),
            design: DesignMatrix::new(columns.clone(), x)?,
            provenance,
            target,
        })
    };

    let hours = (0..HOURS_PER_DAY)
        .into_par_iter()
        .map(build_hour)
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureTable {
        origin: frame.start(),
        hours,
        spec: FeatureSpec {
            lag_lead: spec.clone(),
            pca_temp: pca_temp.clone(),
            pca_ghi: pca_ghi.clone(),
        },
    })
}

/// A cell whose source instant is on or after the start of the next day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub date: NaiveDate,
    pub hour: usize,
    pub column: String,
    pub source: NaiveDateTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AuditReport {
    pub cells_checked: usize,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every cell against the day-ahead rule: features for day `D` may
/// only come from instants before day `D + 1`, hour 0.
pub fn audit_day_ahead(table: &FeatureTable) -> AuditReport {
    let mut report = AuditReport::default();
    for m in table.hours() {
        let cols = &m.design.columns;
        for (r, &d) in m.days.iter().enumerate() {
            let boundary = table.origin() + Duration::hours(((d + 1) * HOURS_PER_DAY) as i64);
            for (c, name) in cols.iter().enumerate() {
                report.cells_checked += 1;
                let p = m.provenance_at(r, c);
                if p.source >= boundary {
                    report.violations.push(Violation {
                        date: table.date_of_day(d),
                        hour: m.hour,
                        column: name.clone(),
                        source: p.source,
                    });
                }
            }
        }
    }
    report
}
