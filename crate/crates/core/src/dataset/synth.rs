//! Synthetic hourly datasets with the qualitative structure of utility load:
//! heating and cooling tails around a comfort zone, solar-driven midday
//! relief, weekly dips and strongly correlated sites.

use std::f64::consts::PI;

use chrono::{Datelike, Duration, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::calendar::{CalendarInfo, HolidayCalendar};
use super::frame::{LoadFrame, HOURS_PER_DAY, SITES};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub days: usize,
    pub start: NaiveDate,
    pub latitude_deg: f64,

    pub temp_mean: f64,
    pub temp_seasonal_amp: f64,
    pub temp_diurnal_amp: f64,
    pub site_temp_offset: [f64; SITES],
    pub site_temp_scale: [f64; SITES],
    /// Per-site, per-hour measurement noise (°C).
    pub site_temp_noise: f64,
    /// Stationary std dev of the shared day-to-day weather anomaly (°C).
    pub weather_anomaly_sd: f64,
    /// Lag-one autocorrelation of the daily anomaly.
    pub weather_persistence: f64,

    pub ghi_peak: f64,
    /// Lower bound of the daily clear-sky fraction; 1 disables clouds.
    pub cloud_min: f64,
    pub site_ghi_noise: f64,

    pub base_load: f64,
    pub heating_threshold: f64,
    pub heating_slope: f64,
    pub cooling_threshold: f64,
    pub cooling_slope: f64,
    /// Load reduction per W/m² of mean GHI.
    pub solar_coeff: f64,
    pub daily_profile_amp: f64,
    pub weekend_dip: f64,
    pub holiday_dip: f64,
    /// Std dev of i.i.d. hourly load noise.
    pub noise_scale: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            days: 731,
            start: NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date"),
            latitude_deg: 37.5,
            temp_mean: 17.5,
            temp_seasonal_amp: 6.0,
            temp_diurnal_amp: 4.0,
            site_temp_offset: [0.0, -0.3, 0.8, 0.2, 0.1],
            site_temp_scale: [1.0, 0.9, 1.5, 0.95, 1.2],
            site_temp_noise: 0.3,
            weather_anomaly_sd: 2.0,
            weather_persistence: 0.8,
            ghi_peak: 1000.0,
            cloud_min: 0.4,
            site_ghi_noise: 0.02,
            base_load: 2000.0,
            heating_threshold: 14.0,
            heating_slope: 60.0,
            cooling_threshold: 21.0,
            cooling_slope: 90.0,
            solar_coeff: 0.4,
            daily_profile_amp: 250.0,
            weekend_dip: 150.0,
            holiday_dip: 150.0,
            noise_scale: 40.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.days < 2 {
            return Err(Error::argument("synthetic frames need at least 2 days"));
        }
        let nonneg = [
            ("noise_scale", self.noise_scale),
            ("site_temp_noise", self.site_temp_noise),
            ("weather_anomaly_sd", self.weather_anomaly_sd),
            ("site_ghi_noise", self.site_ghi_noise),
            ("ghi_peak", self.ghi_peak),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::argument(format!("{name} must be finite and >= 0")));
            }
        }
        if !(0.0..=1.0).contains(&self.cloud_min) {
            return Err(Error::argument("cloud_min must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.weather_persistence) {
            return Err(Error::argument("weather_persistence must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Sine of the solar elevation at the middle of `hour` on `day_of_year`.
pub fn solar_elevation_sine(day_of_year: u32, hour: usize, latitude_deg: f64) -> f64 {
    let decl = 23.44f64.to_radians() * (2.0 * PI * (284.0 + day_of_year as f64) / 365.0).sin();
    let lat = latitude_deg.to_radians();
    let hour_angle = (15.0 * (hour as f64 + 0.5 - 12.0)).to_radians();
    lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos()
}

fn daily_profile(hour: usize) -> f64 {
    let h = hour as f64;
    0.6 * (-(h - 8.0).powi(2) / 8.0).exp() + (-(h - 19.0).powi(2) / 10.0).exp() - 0.5
}

/// Generate a frame. Identical `(config, seed)` produce identical frames.
pub fn synth_generate(config: &SynthConfig, seed: u64) -> Result<LoadFrame> {
    config.validate()?;
    let n = config.days * HOURS_PER_DAY;
    let calendar = CalendarInfo::from_dates(config.start, config.days, &HolidayCalendar::us_federal());

    let mut weather_rng = stream_rng(seed, "synth-weather", 0);
    let mut cloud_rng = stream_rng(seed, "synth-cloud", 0);
    let mut site_rng = stream_rng(seed, "synth-site", 0);
    let mut load_rng = stream_rng(seed, "synth-load", 0);

    let innovation_sd =
        config.weather_anomaly_sd * (1.0 - config.weather_persistence.powi(2)).sqrt();
    let innovation = Normal::new(0.0, innovation_sd).map_err(|e| Error::argument(e.to_string()))?;
    let mut anomaly = config.weather_anomaly_sd * weather_rng.sample::<f64, _>(StandardNormal);

    let mut temp: [Vec<f64>; SITES] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut ghi: [Vec<f64>; SITES] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut load = Vec::with_capacity(n);

    for (d, day) in calendar.days().iter().enumerate() {
        if d > 0 {
            anomaly = config.weather_persistence * anomaly + innovation.sample(&mut weather_rng);
        }
        let doy = day.date.ordinal();
        let clear_fraction = if config.cloud_min < 1.0 {
            cloud_rng.random_range(config.cloud_min..=1.0)
        } else {
            1.0
        };
        let seasonal = -config.temp_seasonal_amp
            * (2.0 * PI * (doy as f64 - 20.0) / 365.25).cos();
        for h in 0..HOURS_PER_DAY {
            let diurnal = config.temp_diurnal_amp * (2.0 * PI * (h as f64 - 15.0) / 24.0).cos();
            let shared = seasonal + diurnal + anomaly;
            let clear_sky = config.ghi_peak
                * solar_elevation_sine(doy, h, config.latitude_deg).max(0.0).powf(1.15)
                * clear_fraction;

            let mut t_sum = 0.0;
            let mut g_sum = 0.0;
            for s in 0..SITES {
                let t_noise: f64 = site_rng.sample(StandardNormal);
                let g_noise: f64 = site_rng.sample(StandardNormal);
                let t = config.temp_mean
                    + config.site_temp_offset[s]
                    + config.site_temp_scale[s] * shared
                    + config.site_temp_noise * t_noise;
                let g = (clear_sky * (1.0 + config.site_ghi_noise * g_noise)).max(0.0);
                t_sum += t;
                g_sum += g;
                temp[s].push(t);
                ghi[s].push(g);
            }
            let t_eff = t_sum / SITES as f64;
            let g_eff = g_sum / SITES as f64;

            let mut y = config.base_load
                + config.heating_slope * (config.heating_threshold - t_eff).max(0.0)
                + config.cooling_slope * (t_eff - config.cooling_threshold).max(0.0)
                + config.daily_profile_amp * daily_profile(h)
                - config.solar_coeff * g_eff;
            if day.weekend {
                y -= config.weekend_dip;
            }
            if day.holiday {
                y -= config.holiday_dip;
            }
            let noise: f64 = load_rng.sample(StandardNormal);
            load.push(y + config.noise_scale * noise);
        }
    }

    let start = config.start.and_hms_opt(0, 0, 0).expect("midnight exists");
    LoadFrame::new(start, Some(load), temp, ghi)
}

/// Date of day `index` for a config; convenience for tests and fixtures.
pub fn synth_date(config: &SynthConfig, index: usize) -> NaiveDate {
    config.start + Duration::days(index as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Weekday;

    fn small(days: usize) -> SynthConfig {
        SynthConfig {
            days,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = synth_generate(&small(20), 9).unwrap();
        let b = synth_generate(&small(20), 9).unwrap();
        assert_eq!(a, b);
        let c = synth_generate(&small(20), 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn night_ghi_is_zero_at_all_sites() {
        let cfg = small(60);
        let f = synth_generate(&cfg, 1).unwrap();
        let mut night = 0;
        for i in 0..f.len() {
            let day = i / 24;
            let doy = synth_date(&cfg, day).ordinal();
            if solar_elevation_sine(doy, i % 24, cfg.latitude_deg) <= 0.0 {
                night += 1;
                for s in 0..SITES {
                    assert_eq!(f.ghi(s)[i], 0.0);
                }
            }
        }
        assert!(night > 60 * 8);
    }

    #[test]
    fn weekend_dip_is_exact_without_noise() {
        // Flat seasons, no weather, no clouds, no solar term: every day shares
        // one hourly profile, so weekday and Saturday means differ by the dip.
        let cfg = SynthConfig {
            days: 70,
            start: NaiveDate::from_ymd_opt(2020, 3, 2).unwrap(),
            temp_seasonal_amp: 0.0,
            weather_anomaly_sd: 0.0,
            site_temp_noise: 0.0,
            cloud_min: 1.0,
            solar_coeff: 0.0,
            holiday_dip: 0.0,
            noise_scale: 0.0,
            weekend_dip: 123.0,
            ..SynthConfig::default()
        };
        let f = synth_generate(&cfg, 3).unwrap();
        let load = f.load().unwrap();
        let cal = CalendarInfo::from_dates(cfg.start, cfg.days, &HolidayCalendar::default());
        let (mut sat, mut ns, mut wk, mut nw) = (0.0, 0, 0.0, 0);
        for (d, info) in cal.days().iter().enumerate() {
            let day_sum: f64 = load[d * 24..(d + 1) * 24].iter().sum();
            if info.weekday == Weekday::Sat {
                sat += day_sum;
                ns += 24;
            } else if !info.weekend {
                wk += day_sum;
                nw += 24;
            }
        }
        let diff = wk / nw as f64 - sat / ns as f64;
        assert!((diff - 123.0).abs() < 1e-9, "diff = {diff}");
    }

    #[test]
    fn weekend_dip_paired_with_seasonality() {
        let base = SynthConfig {
            noise_scale: 0.0,
            holiday_dip: 0.0,
            ..small(56)
        };
        let dipped = SynthConfig {
            weekend_dip: 200.0,
            ..base.clone()
        };
        let flat = SynthConfig {
            weekend_dip: 0.0,
            ..base
        };
        let a = synth_generate(&dipped, 4).unwrap();
        let b = synth_generate(&flat, 4).unwrap();
        let cal = CalendarInfo::from_dates(dipped.start, dipped.days, &HolidayCalendar::default());
        for (i, (x, y)) in a.load().unwrap().iter().zip(b.load().unwrap()).enumerate() {
            let expected = if cal.day(i / 24).weekend { 200.0 } else { 0.0 };
            assert!((y - x - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_single_day_and_negative_noise() {
        assert!(synth_generate(&small(1), 0).is_err());
        let cfg = SynthConfig {
            noise_scale: -1.0,
            ..small(5)
        };
        assert!(synth_generate(&cfg, 0).is_err());
    }
}
