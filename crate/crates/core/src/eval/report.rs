use std::fs;
use std::path::Path;

use super::cases::{CaseTag, TestCaseResult};
use super::metrics::{MetricSet, Score};
use crate::error::{Error, Result};

const METRICS: [&str; 4] = ["R2", "RMSE", "MAPE (%)", "sMAPE (%)"];

fn metric_cell(m: &MetricSet, which: usize) -> String {
    match which {
        0 => m.r2.format(4),
        1 => format!("{:.2}", m.rmse),
        2 => m.mape.format(2),
        _ => m.smape.format(2),
    }
}

fn score_csv(s: &Score) -> String {
    s.value().map_or_else(String::new, |v| v.to_string())
}

/// Rendered comparison of test-case results.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub csv: String,
    pub json: String,
}

fn column_key(r: &TestCaseResult, vary_model: bool, vary_spec: bool) -> String {
    match (vary_model, vary_spec) {
        (true, true) => format!("{}:{}", r.model, r.spec),
        (false, true) => r.spec.clone(),
        _ => r.model.clone(),
    }
}

/// Metric × case rows against model or spec columns, in first-appearance order.
pub fn render_report(results: &[TestCaseResult]) -> Result<Report> {
    if results.is_empty() {
        return Err(Error::argument("no results to report"));
    }
    let vary_model = results.iter().any(|r| r.model != results[0].model);
    let vary_spec = results.iter().any(|r| r.spec != results[0].spec);
    let mut columns: Vec<String> = Vec::new();
    let mut cases: Vec<CaseTag> = Vec::new();
    for r in results {
        let key = column_key(r, vary_model, vary_spec);
        if !columns.contains(&key) {
            columns.push(key);
        }
        if !cases.contains(&r.case) {
            cases.push(r.case);
        }
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["metric".to_string(), "case".to_string()];
    header.extend(columns.iter().cloned());
    rows.push(header);
    for (mi, name) in METRICS.iter().enumerate() {
        for case in &cases {
            let mut row = vec![name.to_string(), case.label().to_string()];
            for col in &columns {
                let cell = results
                    .iter()
                    .find(|r| r.case == *case && column_key(r, vary_model, vary_spec) == *col)
                    .map_or_else(|| "-".to_string(), |r| metric_cell(&r.metrics, mi));
                row.push(cell);
            }
            rows.push(row);
        }
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut text = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c < 2 {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect();
        text.push_str(line.join("  ").trim_end());
        text.push('\n');
        if i == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            text.push_str(&"-".repeat(total));
            text.push('\n');
        }
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["case", "model", "spec", "fold", "n", "r2", "rmse", "mape", "smape"])?;
    for r in results {
        let mut write = |fold: String, m: &MetricSet| {
            w.write_record([
                r.case.label().to_string(),
                r.model.clone(),
                r.spec.clone(),
                fold,
                m.n.to_string(),
                score_csv(&m.r2),
                m.rmse.to_string(),
                score_csv(&m.mape),
                score_csv(&m.smape),
            ])
        };
        write("pooled".into(), &r.metrics)?;
        for f in &r.folds {
            write(f.fold.to_string(), &f.metrics)?;
        }
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| Error::argument(e.to_string()))?)
        .expect("csv output is utf-8");
    let json = serde_json::to_string_pretty(results)? + "\n";
    Ok(Report { text, csv, json })
}

/// `(timestamp, actual, predicted)` rows of one result.
pub fn write_predictions(result: &TestCaseResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["timestamp", "actual", "predicted"])?;
    for ((t, a), p) in result.timestamps.iter().zip(&result.actual).zip(&result.predicted) {
        w.write_record([
            t.format("%Y-%m-%d %H:%M:%S").to_string(),
            a.to_string(),
            p.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

/// File name of the prediction dump of `result`.
pub fn predictions_file_name(result: &TestCaseResult) -> String {
    format!(
        "predictions_{}_{}_{}.csv",
        result.case.slug(),
        file_safe(&result.model),
        file_safe(&result.spec)
    )
}

impl Report {
    /// Write `report.txt`, `report.csv`, `report.json` and one prediction dump per result.
    pub fn write(&self, dir: &Path, results: &[TestCaseResult]) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [
            ("report.txt", &self.text),
            ("report.csv", &self.csv),
            ("report.json", &self.json),
        ] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        for r in results {
            write_predictions(r, &dir.join(predictions_file_name(r)))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::metrics::metrics;
    use super::*;

    fn result(case: CaseTag, model: &str, spec: &str, y: &[f64], p: &[f64]) -> TestCaseResult {
        TestCaseResult {
            case,
            model: model.into(),
            spec: spec.into(),
            metrics: metrics(y, p).unwrap(),
            folds: Vec::new(),
            timestamps: Vec::new(),
            actual: y.to_vec(),
            predicted: p.to_vec(),
        }
    }

    #[test]
    fn single_result_one_column() {
        let r = result(CaseTag::Y1Y2, "gbtree", "Lag1", &[100.0, 200.0], &[110.0, 180.0]);
        let rep = render_report(&[r]).unwrap();
        let lines: Vec<&str> = rep.text.lines().collect();
        assert_eq!(lines.len(), 2 + 4);
        assert!(lines[0].ends_with("gbtree"));
        assert!(rep.text.contains("10.00"));
        assert_eq!(rep.csv.lines().count(), 2);
    }

    #[test]
    fn columns_follow_first_appearance() {
        let y = [1.0, 2.0, 3.0];
        let rs: Vec<TestCaseResult> = ["Lag2", "Baseline", "Lag1"]
            .iter()
            .map(|s| result(CaseTag::Cv, "gbtree", s, &y, &y))
            .collect();
        let rep = render_report(&rs).unwrap();
        let header: Vec<&str> = rep.text.lines().next().unwrap().split_whitespace().collect();
        assert_eq!(header, ["metric", "case", "Lag2", "Baseline", "Lag1"]);
        let row: Vec<&str> = rep.text.lines().nth(2).unwrap().split_whitespace().collect();
        assert_eq!(row[2], row[3]);
        assert_eq!(row[3], row[4]);
    }

    #[test]
    fn empty_is_rejected() {
        assert!(render_report(&[]).is_err());
    }
}
