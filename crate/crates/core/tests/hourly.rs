mod common;

use hourcast::dataset::HOURS_PER_DAY;
use hourcast::error::Error;
use hourcast::eval::{metrics, SelectionMetric};
use hourcast::features::{build_features, fit_pca_pair, preset, Components, LagLeadSpec};
use hourcast::hourly::{
    grid_search, train_ensemble, GridAxis, HourlyEnsemble, ModelChoice, SearchGrid,
};
use hourcast::regressors::{
    Family, ForestConfig, GbTreeConfig, PolynomialConfig, RegressorConfig,
};
use chrono::Timelike;

fn gb(rounds: usize, depth: usize) -> RegressorConfig {
    RegressorConfig::Gbtree(GbTreeConfig {
        rounds,
        max_depth: depth,
        learning_rate: 0.3,
        ..GbTreeConfig::default()
    })
}

#[test]
fn constant_targets_give_constant_predictions() {
    let frame = common::frame_with(40, |_, h, _| h as f64);
    let t = common::table(&frame, &preset("Lag1").unwrap());
    for fam in Family::ALL {
        let cfg = match fam {
            Family::Polynomial => RegressorConfig::Polynomial(PolynomialConfig { degree: 2, ..Default::default() }),
            _ => fam.default_config(),
        };
        let e = train_ensemble(&t, &ModelChoice::Single(cfg), 1).unwrap();
        for (h, preds) in e.predict_hours(&t).unwrap().iter().enumerate() {
            for p in preds {
                assert!((p - h as f64).abs() < 1e-9, "{fam} hour {h}: {p}");
            }
        }
    }
}

#[test]
fn stacking_is_day_major() {
    let frame = common::frame_with(3, |_, h, _| h as f64);
    let t = common::table(&frame, &LagLeadSpec::baseline());
    let e = train_ensemble(&t, &ModelChoice::Single(gb(0, 1)), 0).unwrap();
    let fc = e.stack_predict(&t).unwrap();
    let want: Vec<f64> = (0..3).flat_map(|_| (0..24).map(|h| h as f64)).collect();
    assert_eq!(fc.values, want);
    assert_eq!(fc.timestamps[25].hour(), 1);

    let one = t.select_days(1..2);
    assert_eq!(e.stack_predict(&one).unwrap().len(), 24);
}

#[test]
fn stacking_adds_no_transformation() {
    let frame = common::synth(60, 9);
    let t = common::table(&frame, &preset("Lag2").unwrap());
    let e = train_ensemble(&t, &ModelChoice::Single(gb(20, 3)), 4).unwrap();
    let fc = e.stack_predict(&t).unwrap();
    for h in 0..HOURS_PER_DAY {
        let direct = e.model(h).predict(&t.hour(h).design).unwrap();
        let stacked: Vec<f64> = fc
            .timestamps
            .iter()
            .zip(&fc.values)
            .filter(|(ts, _)| ts.hour() as usize == h)
            .map(|(_, v)| *v)
            .collect();
        assert_eq!(stacked, direct);
    }
}

#[test]
fn deterministic_and_thread_count_independent() {
    let frame = common::synth(45, 2);
    let t = common::table(&frame, &preset("Lag1").unwrap());
    let cfg = RegressorConfig::Rforest(ForestConfig { trees: 10, ..Default::default() });
    let a = train_ensemble(&t, &ModelChoice::Single(cfg.clone()), 3).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| train_ensemble(&t, &ModelChoice::Single(cfg.clone()), 3).unwrap());
    assert_eq!(a, b);
    let c = train_ensemble(&t, &ModelChoice::Single(cfg), 4).unwrap();
    assert_ne!(a, c);
}

#[test]
fn retraining_one_hour_leaves_others_untouched() {
    let frame = common::synth(45, 2);
    let t = common::table(&frame, &preset("Lag1").unwrap());
    let cfg = RegressorConfig::Rforest(ForestConfig { trees: 5, ..Default::default() });
    let a = train_ensemble(&t, &ModelChoice::Single(cfg.clone()), 3).unwrap();
    let mut b = a.clone();
    b.retrain_hour(&t, 7, &cfg, 99).unwrap();
    for h in 0..HOURS_PER_DAY {
        if h == 7 {
            assert_ne!(a.model(h), b.model(h));
        } else {
            assert_eq!(a.model(h), b.model(h));
        }
    }
}

#[test]
fn missing_targets_report_the_hour() {
    let frame = common::synth(10, 2).without_load();
    let t = common::table(&frame, &LagLeadSpec::baseline());
    let err = train_ensemble(&t, &ModelChoice::Single(gb(5, 2)), 0).unwrap_err();
    assert!(matches!(err, Error::Hour { hour: 0, .. }), "{err}");
}

#[test]
fn save_and_load_reproduce_predictions() {
    let frame = common::synth(40, 6);
    let t = common::table(&frame, &preset("Lag1+Lead1").unwrap());
    let e = train_ensemble(&t, &ModelChoice::Single(gb(15, 3)), 8).unwrap();
    let dir = tempfile::tempdir().unwrap();
    e.save(dir.path()).unwrap();
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 24 + 3);
    let back = HourlyEnsemble::load(dir.path()).unwrap();
    assert_eq!(back, e);
    assert_eq!(back.stack_predict(&t).unwrap(), e.stack_predict(&t).unwrap());

    let first = std::fs::read(dir.path().join("manifest.json")).unwrap();
    back.save(dir.path()).unwrap();
    assert_eq!(std::fs::read(dir.path().join("manifest.json")).unwrap(), first);
}

#[test]
fn singleton_grid_returns_its_config() {
    let frame = common::synth(160, 1);
    let t = common::table(&frame, &LagLeadSpec::baseline());
    let grid = SearchGrid::single(gb(5, 2));
    let r = grid_search(&t, &grid, 0).unwrap();
    assert!(r.winners().iter().all(|c| *c == gb(5, 2)));
    assert_eq!(r.log.len(), 24);
}

#[test]
fn short_validation_is_an_argument_error() {
    let frame = common::synth(100, 1);
    let t = common::table(&frame, &LagLeadSpec::baseline());
    let err = grid_search(&t, &SearchGrid::single(gb(5, 2)), 0).unwrap_err();
    match err {
        Error::Hour { source, .. } => assert!(matches!(*source, Error::Argument(_))),
        other => panic!("{other}"),
    }
}

#[test]
fn interaction_target_prefers_deeper_trees() {
    // Load is an XOR of the weekend flag and the sign of the temperature anomaly.
    let frame = common::frame_with(210, |_, _, _| 0.0);
    let cal = common::calendar(&frame);
    let temps = frame.temp(0).to_vec();
    let mean = temps.iter().sum::<f64>() / temps.len() as f64;
    let load: Vec<f64> = (0..frame.len())
        .map(|i| {
            let hot = temps[i] > mean;
            let weekend = cal.day(i / 24).weekend;
            if hot ^ weekend { 1100.0 } else { 1000.0 }
        })
        .collect();
    let frame = hourcast::dataset::LoadFrame::new(
        frame.start(),
        Some(load),
        frame.temps().clone(),
        frame.ghis().clone(),
    )
    .unwrap();
    let t = common::table(&frame, &LagLeadSpec::baseline());
    let grid = SearchGrid {
        base: gb(40, 1),
        axes: vec![GridAxis { name: "max_depth".into(), values: vec![1.0, 6.0] }],
        holdout_fraction: 0.2,
        metric: SelectionMetric::Rmse,
    };
    let r = grid_search(&t, &grid, 0).unwrap();
    assert_eq!(r.log.len(), 24 * 2);
    assert!(r.best_index.iter().all(|&i| i == 1), "{:?}", r.best_index);

    // Argmin property and log layout.
    for h in 0..HOURS_PER_DAY {
        let scores: Vec<f64> = r.log.iter().filter(|e| e.hour == h).map(|e| e.score).collect();
        assert!(scores.iter().all(|&s| r.best_score[h] <= s));
    }
    let mape = SearchGrid { metric: SelectionMetric::Mape, ..grid };
    assert_eq!(grid_search(&t, &mape, 0).unwrap().log.len(), 48);
}

#[test]
fn log_is_written_as_csv() {
    let frame = common::synth(160, 1);
    let t = common::table(&frame, &LagLeadSpec::baseline());
    let grid = SearchGrid {
        base: gb(5, 1),
        axes: vec![GridAxis { name: "lambda".into(), values: vec![1.0, 5.0, 1.0] }],
        holdout_fraction: 0.2,
        metric: SelectionMetric::Rmse,
    };
    let r = grid_search(&t, &grid, 0).unwrap();
    // Configs 0 and 2 are identical, so ties must go to the earlier one.
    assert!(r.best_index.iter().all(|&i| i != 2));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.csv");
    r.write_log_csv(&path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 1 + 72);
    assert!(text.starts_with("hour,config_id,params,score"));
}

#[test]
fn default_boosting_fits_every_hour() {
    let frame = common::synth(731, 42);
    let t = common::table(&frame, &preset("Lag1").unwrap());
    let e = train_ensemble(&t, &ModelChoice::Single(RegressorConfig::default()), 1).unwrap();
    for (h, preds) in e.predict_hours(&t).unwrap().iter().enumerate() {
        let y = t.hour(h).target.as_ref().unwrap();
        let r2 = metrics(y, preds).unwrap().r2.value().unwrap();
        assert!(r2 > 0.5, "hour {h}: R2 {r2}");
    }
}

#[test]
fn held_out_third_year() {
    let frame = common::synth(1096, 42);
    let spec = preset("Lag1").unwrap();
    let train = 0..731 * 24;
    let (pt, pg) = fit_pca_pair(&frame, train.clone(), Components::Count(1)).unwrap();
    let full = build_features(&frame, &common::calendar(&frame), &pt, &pg, &spec).unwrap();
    let e = train_ensemble(&full.select_hours(train), &ModelChoice::Single(RegressorConfig::default()), 1).unwrap();
    let test = full.select_days(731..1096);
    let fc = e.stack_predict(&test).unwrap();
    assert_eq!(fc.len(), 365 * 24);
    let m = metrics(&test.targets_chronological().unwrap(), &fc.values).unwrap();
    assert!(m.smape.value().unwrap() < 15.0, "{m:?}");
}
