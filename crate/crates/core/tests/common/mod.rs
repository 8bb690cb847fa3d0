#![allow(dead_code)]

use chrono::NaiveDate;
use hourcast::dataset::{
    infer_calendar, synth_generate, Anchor, CalendarInfo, HolidayCalendar, LoadFrame, SynthConfig,
    HOURS_PER_DAY, SITES,
};
use hourcast::features::{build_features, fit_pca_pair, Components, FeatureTable, LagLeadSpec};

pub fn synth(days: usize, seed: u64) -> LoadFrame {
    let cfg = SynthConfig {
        days,
        ..SynthConfig::default()
    };
    synth_generate(&cfg, seed).unwrap()
}

pub fn calendar(frame: &LoadFrame) -> CalendarInfo {
    infer_calendar(frame, Anchor::Frame, &HolidayCalendar::us_federal()).unwrap()
}

/// Features over the whole frame with PCA fitted on all of it.
pub fn table(frame: &LoadFrame, spec: &LagLeadSpec) -> FeatureTable {
    let (pt, pg) = fit_pca_pair(frame, 0..frame.len(), Components::Count(1)).unwrap();
    build_features(frame, &calendar(frame), &pt, &pg, spec).unwrap()
}

/// Frame whose load at `(day, hour)` is `load(day, hour, temp)`; site
/// temperatures are a smooth signal plus small site offsets.
pub fn frame_with(days: usize, load: impl Fn(usize, usize, f64) -> f64) -> LoadFrame {
    let n = days * HOURS_PER_DAY;
    let base: Vec<f64> = (0..n)
        .map(|i| 15.0 + 8.0 * ((i as f64) * 0.013).sin() + 3.0 * ((i as f64) * 0.61).cos())
        .collect();
    let temp: [Vec<f64>; SITES] = std::array::from_fn(|s| {
        base.iter()
            .enumerate()
            .map(|(i, t)| t + s as f64 * 0.3 + 0.05 * ((i * (s + 3)) as f64).sin())
            .collect()
    });
    let ghi: [Vec<f64>; SITES] = std::array::from_fn(|s| {
        (0..n)
            .map(|i| {
                let h = i % HOURS_PER_DAY;
                let sun = ((h as f64 - 6.0) / 12.0 * std::f64::consts::PI).sin().max(0.0);
                sun * (800.0 + 20.0 * s as f64 + 100.0 * ((i / 24) as f64 * 0.2).sin())
            })
            .collect()
    });
    let y: Vec<f64> = (0..n)
        .map(|i| load(i / HOURS_PER_DAY, i % HOURS_PER_DAY, base[i]))
        .collect();
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    LoadFrame::new(start, Some(y), temp, ghi).unwrap()
}
