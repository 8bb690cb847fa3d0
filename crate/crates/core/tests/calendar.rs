mod common;

use chrono::{NaiveDate, Weekday};
use hourcast::dataset::{infer_calendar, Anchor, HolidayCalendar};

fn date(m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, m, d).unwrap()
}

#[test]
fn anchored_calendar_2020() {
    let frame = common::synth(731, 5);
    let cal = infer_calendar(&frame, Anchor::default(), &HolidayCalendar::us_federal()).unwrap();
    let day = |d: NaiveDate| cal.day((d - date(1, 1)).num_days() as usize);
    assert_eq!(day(date(1, 1)).weekday, Weekday::Wed);
    assert!(day(date(1, 4)).weekend && day(date(1, 5)).weekend);
    assert!(!day(date(1, 6)).weekend);
    assert!(day(date(2, 17)).holiday);
    assert!(!day(date(2, 18)).holiday);
    assert_eq!(frame.year_range(1).unwrap().len(), 8784);
    assert_eq!(frame.year_range(2).unwrap().len(), 8760);
}
