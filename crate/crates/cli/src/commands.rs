use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use chrono::{Datelike, Duration, Timelike};
use hourcast::dataset::{
    describe_years, load_csv, render_stats_table, synth_generate, write_csv, write_stats_csv,
    CalendarInfo, LoadFrame, SynthConfig, HOURS_PER_DAY, SITES,
};
use hourcast::eval::{
    ablate_lags, render_report, run_case, run_case_expanding_cv, CaseTag, Experiment, Forecaster,
    HourlyMean, ModelPlan, Oracle, TestCaseResult,
};
use hourcast::features::{
    ablation_presets, audit_day_ahead, build_features, fit_pca_pair, pca_fit, vif, FeatureTable,
    PcaModel, VifReport,
};
use hourcast::hourly::{grid_search, train_ensemble, Forecast, HourlyEnsemble, ModelChoice, SearchGrid};
use hourcast::linalg::Matrix;
use hourcast::regressors::Family;
use hourcast::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;

/// Shared state of one command invocation; collects timings and outputs for
/// the run manifest.
pub struct Run {
    pub command: &'static str,
    pub config: RunConfig,
    started: Instant,
    timings: BTreeMap<String, f64>,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    threads: usize,
    config: &'a RunConfig,
    timings_s: &'a BTreeMap<String, f64>,
    outputs: &'a [String],
}

impl Run {
    pub fn new(command: &'static str, config: RunConfig) -> Self {
        Self {
            command,
            config,
            started: Instant::now(),
            timings: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&RunConfig) -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f(&self.config)?;
        self.timings.insert(stage.into(), t.elapsed().as_secs_f64());
        Ok(out)
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.config.out_dir.clone();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    fn write(&mut self, name: &str, body: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.out_dir()?.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.record(name);
        Ok(path)
    }

    fn record(&mut self, name: &str) {
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
    }

    pub fn finish(mut self) -> Result<()> {
        self.timings
            .insert("total".into(), self.started.elapsed().as_secs_f64());
        let manifest = RunManifest {
            tool: "hourcast",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            threads: rayon::current_num_threads(),
            config: &self.config,
            timings_s: &self.timings,
            outputs: &self.outputs,
        };
        let path = self.out_dir()?.join("run_manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }
}

fn load_frame(path: &Path, cfg: &RunConfig) -> Result<LoadFrame> {
    load_csv(path, &cfg.columns).with_context(|| format!("loading {}", path.display()))
}

fn load_training(cfg: &RunConfig) -> Result<LoadFrame> {
    let frame = load_frame(cfg.train_csv()?, cfg)?;
    if frame.load().is_none() {
        bail!("{} has no load column", cfg.train_csv()?.display());
    }
    Ok(frame)
}

fn calendar_for(frame: &LoadFrame, cfg: &RunConfig) -> Result<CalendarInfo> {
    let first = cfg.anchor()?.resolve(frame)?;
    Ok(CalendarInfo::from_dates(first, frame.days(), &cfg.holiday_calendar()?))
}

pub fn stats(run: &mut Run) -> Result<()> {
    let frame = run.timed("load", load_training)?;
    let stats = describe_years(&frame)?;
    let table = render_stats_table(&stats);
    let mut csv = Vec::new();
    write_stats_csv(&stats, &mut csv)?;
    run.write("stats.txt", &table)?;
    run.write("stats.csv", csv)?;
    print!("{table}");
    Ok(())
}

#[derive(Serialize)]
struct PcaSummary<'a> {
    temperature: &'a PcaModel,
    ghi: &'a PcaModel,
}

pub fn pca(run: &mut Run) -> Result<()> {
    let frame = run.timed("load", load_training)?;
    let components = run.config.components();
    let (temp, ghi) = run.timed("fit", |_| Ok(fit_pca_pair(&frame, 0..frame.len(), components)?))?;
    let mut csv = String::from("block,component,explained_variance_ratio,cumulative,retained\n");
    let mut text = String::new();
    for (name, m) in [("temperature", &temp), ("ghi", &ghi)] {
        text.push_str(&format!("{name} PCA ({} retained)\n", m.n_components()));
        let mut cum = 0.0;
        for (k, r) in m.full_variance_ratio.iter().enumerate() {
            cum += r;
            let kept = k < m.n_components();
            csv.push_str(&format!("{name},{},{r},{cum},{kept}\n", k + 1));
            text.push_str(&format!("  PC{}  {:>9.6}  {:>9.6}\n", k + 1, r, cum));
        }
    }
    run.write("pca.csv", csv)?;
    run.write(
        "pca.json",
        serde_json::to_string_pretty(&PcaSummary { temperature: &temp, ghi: &ghi })? + "\n",
    )?;
    print!("{text}");
    Ok(())
}

/// Which columns enter the VIF computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum VifStage {
    /// Raw sites plus load: one panel for temperature, one for GHI.
    Before,
    /// Load and the retained PCA scores.
    After,
}

fn vif_panel(columns: Vec<(String, Vec<f64>)>) -> Result<VifReport> {
    let names: Vec<String> = columns.iter().map(|(n, _)| n.clone()).collect();
    let data: Vec<Vec<f64>> = columns.into_iter().map(|(_, c)| c).collect();
    Ok(vif(&Matrix::from_columns(&data)?, &names)?)
}

fn read_numeric_csv(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    if headers.is_empty() {
        bail!("{} has no header", path.display());
    }
    let mut cols = vec![Vec::new(); headers.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().with_context(|| {
                format!("{} row {row}, column `{}`: `{field}` is not a number", path.display(), headers[c])
            })?;
            cols[c].push(v);
        }
    }
    if cols[0].is_empty() {
        bail!("{} has no data rows", path.display());
    }
    Ok(headers.into_iter().zip(cols).collect())
}

fn site_columns(prefix: &str, series: &[Vec<f64>; SITES], rows: std::ops::Range<usize>) -> Vec<(String, Vec<f64>)> {
    (0..SITES)
        .map(|s| (format!("{prefix}_{}", s + 1), series[s][rows.clone()].to_vec()))
        .collect()
}

fn score_columns(prefix: &str, scores: &Matrix) -> Vec<(String, Vec<f64>)> {
    (0..scores.cols())
        .map(|k| {
            let name = if scores.cols() == 1 {
                prefix.to_string()
            } else {
                format!("{prefix}_{}", k + 1)
            };
            (name, scores.column(k))
        })
        .collect()
}

pub fn vif_cmd(run: &mut Run, stage: VifStage, year: Option<usize>, matrix: Option<PathBuf>) -> Result<()> {
    let panels: Vec<(String, VifReport)> = if let Some(path) = matrix {
        let cols = read_numeric_csv(&path)?;
        vec![("matrix".into(), vif_panel(cols)?)]
    } else {
        let frame = run.timed("load", load_training)?;
        let rows = match year {
            Some(y) => frame
                .year_range(y)
                .with_context(|| format!("training data has no year {y}"))?,
            None => 0..frame.len(),
        };
        let load = ("Load".to_string(), frame.load().expect("checked at load")[rows.clone()].to_vec());
        match stage {
            VifStage::Before => {
                let mut temp = vec![load.clone()];
                temp.extend(site_columns("Temp", frame.temps(), rows.clone()));
                let mut ghi = vec![load];
                ghi.extend(site_columns("GHI", frame.ghis(), rows));
                vec![
                    ("temperature".into(), vif_panel(temp)?),
                    ("ghi".into(), vif_panel(ghi)?),
                ]
            }
            VifStage::After => {
                let components = run.config.components();
                let t = pca_fit(&frame.temp_matrix(rows.clone()), components)?;
                let g = pca_fit(&frame.ghi_matrix(rows.clone()), components)?;
                let mut cols = vec![load];
                cols.extend(score_columns("PCA_Temp", &t.transform(&frame.temp_matrix(rows.clone()))?));
                cols.extend(score_columns("PCA_GHI", &g.transform(&frame.ghi_matrix(rows))?));
                vec![("after_pca".into(), vif_panel(cols)?)]
            }
        }
    };
    let mut text = String::new();
    let mut csv = String::from("panel,feature,vif,r_squared\n");
    for (name, report) in &panels {
        text.push_str(&format!("[{name}]\n{}", report.render()));
        for e in &report.entries {
            let v = if e.vif.is_finite() { e.vif.to_string() } else { "inf".into() };
            csv.push_str(&format!("{name},{},{v},{}\n", e.feature, e.r_squared));
        }
    }
    let json: BTreeMap<&str, &VifReport> = panels.iter().map(|(n, r)| (n.as_str(), r)).collect();
    run.write("vif.txt", &text)?;
    run.write("vif.csv", csv)?;
    run.write("vif.json", serde_json::to_string_pretty(&json)? + "\n")?;
    print!("{text}");
    Ok(())
}

fn parse_family(name: &str) -> Result<Family> {
    Ok(name.parse::<Family>()?)
}

/// Fixed config when one is given, otherwise a grid search.
fn training_plan(cfg: &RunConfig, family: Family) -> Result<ModelPlan> {
    if let Some(m) = cfg.fixed_model(family) {
        return Ok(ModelPlan::Fixed(m));
    }
    if let Some(g) = cfg.search_grid()? {
        return Ok(ModelPlan::Grid(g));
    }
    Ok(ModelPlan::Grid(match family {
        Family::Gbtree => SearchGrid::default_gbtree(),
        f => SearchGrid::single(f.default_config()),
    }))
}

/// Grid search only when asked for, otherwise the family defaults.
fn evaluation_plan(cfg: &RunConfig, family: Family) -> Result<ModelPlan> {
    if let Some(m) = cfg.fixed_model(family) {
        return Ok(ModelPlan::Fixed(m));
    }
    match cfg.search_grid()? {
        Some(g) if g.base.family() == family => Ok(ModelPlan::Grid(g)),
        _ => Ok(ModelPlan::Fixed(family.default_config())),
    }
}

fn forecaster(cfg: &RunConfig, name: &str) -> Result<Box<dyn Forecaster>> {
    Ok(match name {
        "hourly-mean" => Box::new(HourlyMean),
        "oracle" => Box::new(Oracle),
        other => Box::new(evaluation_plan(cfg, parse_family(other)?)?),
    })
}

struct Trained {
    ensemble: HourlyEnsemble,
    train_table: FeatureTable,
    calendar: CalendarInfo,
}

fn fit_ensemble(run: &mut Run, frame: &LoadFrame) -> Result<Trained> {
    let cfg = run.config.clone();
    let calendar = calendar_for(frame, &cfg)?;
    let spec = cfg.lag_lead()?;
    let train_table = run.timed("features", |c| {
        let (pt, pg) = fit_pca_pair(frame, 0..frame.len(), c.components())?;
        Ok(build_features(frame, &calendar, &pt, &pg, &spec)?)
    })?;
    let family = parse_family(&cfg.family)?;
    let choice = match training_plan(&cfg, family)? {
        ModelPlan::Fixed(m) => ModelChoice::Single(m),
        ModelPlan::Grid(g) => {
            let result = run.timed("grid_search", |c| Ok(grid_search(&train_table, &g, c.seed)?))?;
            let dir = run.out_dir()?;
            result.write_log_csv(&dir.join("grid_log.csv"))?;
            run.record("grid_log.csv");
            ModelChoice::PerHour(result.winners())
        }
    };
    let ensemble = run.timed("train", |c| Ok(train_ensemble(&train_table, &choice, c.seed)?))?;
    let dir = run.out_dir()?.join("model");
    ensemble.save(&dir)?;
    run.record("model/manifest.json");
    Ok(Trained {
        ensemble,
        train_table,
        calendar,
    })
}

fn write_forecast_csv(fc: &Forecast) -> String {
    let mut out = String::from("timestamp,predicted_load\n");
    for (t, v) in fc.timestamps.iter().zip(&fc.values) {
        out.push_str(&format!("{},{v}\n", t.format("%Y-%m-%d %H:%M:%S")));
    }
    out
}

pub fn train(run: &mut Run) -> Result<()> {
    let frame = run.timed("load", load_training)?;
    let trained = fit_ensemble(run, &frame)?;
    let fitted = trained.ensemble.stack_predict(&trained.train_table)?;
    run.write("train_fit.csv", write_forecast_csv(&fitted))?;
    if let Some(actual) = trained.train_table.targets_chronological() {
        let m = hourcast::eval::metrics(&actual, &fitted.values)?;
        println!(
            "trained 24 hourly models on {} days; in-sample RMSE {:.2}, sMAPE {}%",
            trained.calendar.len(),
            m.rmse,
            m.smape.format(2)
        );
    }
    for (h, m) in trained.ensemble.models().iter().enumerate() {
        println!("  hour {h:02}: {}", m.config.describe());
    }
    Ok(())
}

fn write_results(run: &mut Run, results: &[TestCaseResult]) -> Result<()> {
    let report = render_report(results)?;
    let dir = run.out_dir()?;
    report.write(&dir, results)?;
    for name in ["report.txt", "report.csv", "report.json"] {
        run.record(name);
    }
    for r in results {
        run.record(&hourcast::eval::predictions_file_name(r));
    }
    print!("{}", report.text);
    Ok(())
}

pub fn evaluate(run: &mut Run) -> Result<()> {
    let frame = run.timed("load", load_training)?;
    let cfg = run.config.clone();
    let calendar = calendar_for(&frame, &cfg)?;
    let spec = cfg.lag_lead()?;
    let cases = cfg.case_tags()?;
    let names = cfg.family_names();
    if names.is_empty() {
        bail!("no model family selected");
    }
    let forecasters = names
        .iter()
        .map(|n| forecaster(&cfg, n))
        .collect::<Result<Vec<_>>>()?;
    let exp = Experiment {
        frame: &frame,
        calendar: &calendar,
        components: cfg.components(),
    };
    let cells: Vec<(usize, CaseTag)> = (0..forecasters.len())
        .flat_map(|f| cases.iter().map(move |&c| (f, c)))
        .collect();
    let results = run.timed("cases", |c| {
        cells
            .par_iter()
            .map(|&(f, case)| {
                let fc = forecasters[f].as_ref();
                let r = match case {
                    CaseTag::Cv => run_case_expanding_cv(&exp, c.folds, fc, &spec, c.seed),
                    _ => run_case(&exp, case, fc, &spec, c.seed),
                };
                r.map(|mut r| {
                    r.model = names[f].clone();
                    r
                })
                .with_context(|| format!("{} {}", names[f], case))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<_>>>()
    })?;
    write_results(run, &results)
}

pub fn ablate(run: &mut Run) -> Result<()> {
    let frame = run.timed("load", load_training)?;
    let cfg = run.config.clone();
    let calendar = calendar_for(&frame, &cfg)?;
    let family = cfg
        .family_names()
        .first()
        .cloned()
        .context("no model family selected")?;
    let fc = forecaster(&cfg, &family)?;
    let exp = Experiment {
        frame: &frame,
        calendar: &calendar,
        components: cfg.components(),
    };
    let results = run.timed("cases", |c| {
        Ok(ablate_lags(&exp, &ablation_presets(), fc.as_ref(), c.seed)?)
    })?;
    write_results(run, &results)
}

fn concat_days(a: &LoadFrame, b: &LoadFrame) -> Result<LoadFrame> {
    let join = |x: &[f64], y: &[f64]| [x, y].concat();
    Ok(LoadFrame::new(
        a.start(),
        None,
        std::array::from_fn(|s| join(a.temp(s), b.temp(s))),
        std::array::from_fn(|s| join(a.ghi(s), b.ghi(s))),
    )?)
}

/// Features of the test frame. When it directly follows the training frame,
/// lags at its first hours read the last training hours instead of being
/// backfilled.
fn test_table(
    trained: &Trained,
    train: &LoadFrame,
    test: &LoadFrame,
    cfg: &RunConfig,
) -> Result<FeatureTable> {
    let spec = trained.ensemble.feature_spec();
    let holidays = cfg.holiday_calendar()?;
    let first = trained.calendar.day(0).date;
    let table = if test.start() == train.end() {
        let joined = concat_days(&train.without_load(), test)?;
        let cal = CalendarInfo::from_dates(first, joined.days(), &holidays);
        build_features(&joined, &cal, &spec.pca_temp, &spec.pca_ghi, &spec.lag_lead)?
            .select_days(train.days()..joined.days())
    } else {
        let offset = (test.start() - train.start()).num_days();
        if test.start() < train.end() || (test.start() - train.start()) != Duration::days(offset) {
            bail!(
                "test data starting {} must begin at a day boundary after the training data ends ({})",
                test.start(),
                train.end()
            );
        }
        let cal = CalendarInfo::from_dates(first + Duration::days(offset), test.days(), &holidays);
        build_features(test, &cal, &spec.pca_temp, &spec.pca_ghi, &spec.lag_lead)?
    };
    let audit = audit_day_ahead(&table);
    if let Some(v) = audit.violations.first() {
        return Err(Error::Constraint(format!(
            "{} day-ahead violations in the test year, first at {} hour {} column {}",
            audit.violations.len(),
            v.date,
            v.hour,
            v.column
        ))
        .into());
    }
    for m in [&spec.pca_temp, &spec.pca_ghi] {
        if m.scope.is_some_and(|s| s.overlaps(test.start(), test.len())) {
            return Err(Error::Constraint("PCA fit window overlaps the test year".into()).into());
        }
    }
    Ok(table)
}

pub fn forecast(run: &mut Run) -> Result<()> {
    let frame = run.timed("load", load_training)?;
    // Any load column in the test file is dropped unread.
    let test = load_frame(run.config.test_csv()?, &run.config)?.without_load();
    let trained = fit_ensemble(run, &frame)?;
    let cfg = run.config.clone();
    let table = test_table(&trained, &frame, &test, &cfg)?;
    let fc = run.timed("predict", |_| Ok(trained.ensemble.stack_predict(&table)?))?;
    if fc.len() != test.len() {
        return Err(Error::Constraint(format!(
            "forecast has {} values for {} test hours",
            fc.len(),
            test.len()
        ))
        .into());
    }
    run.write("forecast.csv", write_forecast_csv(&fc))?;

    let mut by_month = String::from("month,day,hour,timestamp,predicted_load\n");
    let mut summary: BTreeMap<(i32, u32), (f64, f64, f64, usize)> = BTreeMap::new();
    for (t, &v) in fc.timestamps.iter().zip(&fc.values) {
        by_month.push_str(&format!(
            "{},{},{},{},{v}\n",
            t.month(),
            t.day(),
            t.hour(),
            t.format("%Y-%m-%d %H:%M:%S")
        ));
        let e = summary
            .entry((t.year(), t.month()))
            .or_insert((0.0, f64::INFINITY, f64::NEG_INFINITY, 0));
        e.0 += v;
        e.1 = e.1.min(v);
        e.2 = e.2.max(v);
        e.3 += 1;
    }
    run.write("forecast_by_month.csv", by_month)?;
    println!("forecast {} hours ({} days)", fc.len(), fc.len() / HOURS_PER_DAY);
    println!("{:<8}  {:>10}  {:>10}  {:>10}", "month", "mean", "min", "max");
    for ((y, m), (sum, lo, hi, n)) in summary {
        println!("{y}-{m:02}   {:>10.2}  {lo:>10.2}  {hi:>10.2}", sum / n as f64);
    }
    Ok(())
}

pub fn synth(run: &mut Run, train_days: usize, test_days: usize) -> Result<()> {
    if train_days == 0 {
        bail!("--days must be at least 1");
    }
    let config = SynthConfig {
        days: train_days + test_days,
        ..SynthConfig::default()
    };
    let frame = run.timed("generate", |c| Ok(synth_generate(&config, c.seed)?))?;
    let dir = run.out_dir()?;
    let train = frame.slice_days(0..train_days)?;
    write_csv(&train, dir.join("train.csv"))?;
    run.record("train.csv");
    if test_days > 0 {
        let truth = frame.slice_days(train_days..train_days + test_days)?;
        write_csv(&truth.without_load(), dir.join("test.csv"))?;
        write_csv(&truth, dir.join("test_truth.csv"))?;
        run.record("test.csv");
        run.record("test_truth.csv");
    }
    println!(
        "wrote {train_days} training days and {test_days} test days to {}",
        dir.display()
    );
    Ok(())
}
