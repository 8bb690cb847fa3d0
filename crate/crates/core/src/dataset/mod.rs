//! Ingestion, calendar inference, descriptive statistics and synthetic data.

mod calendar;
mod csv_io;
mod frame;
mod stats;
mod synth;

pub use calendar::{
    infer_calendar, leap_years_starting_on, Anchor, CalendarInfo, DayInfo, HolidayCalendar,
};
pub use csv_io::{load_csv, read_csv, write_csv, write_csv_to, ColumnMapping};
pub use frame::{series_names, LoadFrame, HOURS_PER_DAY, SITES};
pub use stats::{
    describe, describe_years, render_stats_table, summarize, write_stats_csv, DescriptiveStats,
    Period,
};
pub use synth::{solar_elevation_sine, synth_date, synth_generate, SynthConfig};
