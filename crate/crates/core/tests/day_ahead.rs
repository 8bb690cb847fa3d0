mod common;

use chrono::Duration;
use hourcast::features::{audit_day_ahead, LagLeadSpec, LeadPolicy, Provenance};
use proptest::prelude::*;
use std::sync::OnceLock;

fn frame() -> &'static hourcast::dataset::LoadFrame {
    static FRAME: OnceLock<hourcast::dataset::LoadFrame> = OnceLock::new();
    FRAME.get_or_init(|| common::synth(30, 3))
}

fn specs() -> impl Strategy<Value = LagLeadSpec> {
    (
        prop::collection::btree_set(1u32..=24, 0..6),
        prop::collection::btree_set(1u32..=24, 0..4),
    )
        .prop_map(|(lags, leads)| LagLeadSpec::new(lags, leads, LeadPolicy::ClampAtDayEnd).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_specs_respect_day_ahead(spec in specs(), hour in 0usize..24, row in 0usize..30, col_pick in 0usize..64) {
        let mut table = common::table(frame(), &spec);
        let report = audit_day_ahead(&table);
        prop_assert!(report.passed(), "{:?}", report.violations.first());
        prop_assert_eq!(report.cells_checked, table.total_rows() * table.columns().len());

        let col = col_pick % table.columns().len();
        let next_day = table.date_of_day(table.hour(hour).days[row]) + Duration::days(1);
        let bad = Provenance { source: next_day.and_hms_opt(0, 0, 0).unwrap(), backfilled: false };
        table.set_provenance(hour, row, col, bad);
        let report = audit_day_ahead(&table);
        prop_assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        prop_assert_eq!(v.hour, hour);
        prop_assert_eq!(&v.column, &table.columns()[col]);
        prop_assert_eq!(v.date, next_day - Duration::days(1));
    }
}

#[test]
fn crossing_leads_are_rejected() {
    let err = LagLeadSpec::new([1], [2], LeadPolicy::CrossDayBoundary).unwrap_err();
    assert!(err.is_invariant_violation());
}

#[test]
fn lags_read_earlier_hours() {
    let spec = LagLeadSpec::new([24], [], LeadPolicy::ClampAtDayEnd).unwrap();
    let t = common::table(frame(), &spec);
    let c = t.columns().iter().position(|c| c == "pca_temp_lag24").unwrap();
    let p0 = t.columns().iter().position(|c| c == "pca_temp").unwrap();
    let m = t.hour(5);
    for r in 1..m.rows() {
        assert_eq!(m.design.x[(r, c)], m.design.x[(r - 1, p0)]);
        assert!(!m.provenance_at(r, c).backfilled);
    }
    assert!(m.provenance_at(0, c).backfilled);
}
