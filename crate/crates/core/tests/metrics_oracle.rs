use hourcast::eval::{metrics, Score, Undefined};
use proptest::prelude::*;

/// Direct formula evaluation, written independently of the library.
fn naive(y: &[f64], p: &[f64]) -> (Option<f64>, f64, Option<f64>, Option<f64>) {
    let n = y.len() as f64;
    let mean: f64 = y.iter().sum::<f64>() / n;
    let ss_res: f64 = y.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|a| (a - mean).powi(2)).sum();
    let r2 = if y.iter().all(|&a| a == y[0]) { None } else { Some(1.0 - ss_res / ss_tot) };
    let rmse = (ss_res / n).sqrt();
    let mape = if y.contains(&0.0) {
        None
    } else {
        Some(y.iter().zip(p).map(|(a, b)| ((a - b) / a).abs()).sum::<f64>() / n * 100.0)
    };
    let smape = if y.iter().zip(p).any(|(a, b)| a.abs() + b.abs() == 0.0) {
        None
    } else {
        Some(
            y.iter()
                .zip(p)
                .map(|(a, b)| (a - b).abs() / ((a.abs() + b.abs()) / 2.0))
                .sum::<f64>()
                / n
                * 100.0,
        )
    };
    (r2, rmse, mape, smape)
}

fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=500).prop_flat_map(|n| {
        (
            prop::collection::vec(100.0f64..5000.0, n),
            prop::collection::vec(50.0f64..6000.0, n),
        )
    })
}

fn close(a: Score, b: Option<f64>) -> bool {
    match (a, b) {
        (Score::Value(x), Some(y)) => (x - y).abs() < 1e-9,
        (Score::Undefined(_), None) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_naive_formulas((y, p) in pairs()) {
        let m = metrics(&y, &p).unwrap();
        let (r2, rmse, mape, smape) = naive(&y, &p);
        prop_assert!(close(m.r2, r2), "r2 {:?} vs {:?}", m.r2, r2);
        prop_assert!((m.rmse - rmse).abs() < 1e-9);
        prop_assert!(close(m.mape, mape));
        prop_assert!(close(m.smape, smape));
    }

    #[test]
    fn smape_symmetric_and_bounded((y, p) in pairs()) {
        let a = metrics(&y, &p).unwrap().smape.value().unwrap();
        let b = metrics(&p, &y).unwrap().smape.value().unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((0.0..=200.0).contains(&a));
    }

    #[test]
    fn invariances((y, p) in pairs(), c in -1000.0f64..1000.0, k in 0.01f64..100.0) {
        let m = metrics(&y, &p).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v + c).collect();
        let ps: Vec<f64> = p.iter().map(|v| v + c).collect();
        let shifted = metrics(&ys, &ps).unwrap();
        prop_assert!((shifted.rmse - m.rmse).abs() <= 1e-9 * m.rmse.max(1.0));
        let ys: Vec<f64> = y.iter().map(|v| v * k).collect();
        let ps: Vec<f64> = p.iter().map(|v| v * k).collect();
        let scaled = metrics(&ys, &ps).unwrap();
        let (a, b) = (scaled.mape.value().unwrap(), m.mape.value().unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * b);
        prop_assert!(m.rmse >= 0.0);
        prop_assert!(m.r2.value().is_none_or(|r| r <= 1.0));
    }
}

#[test]
fn undefined_reasons_are_reported() {
    let m = metrics(&[5.0, 5.0], &[4.0, 6.0]).unwrap();
    assert_eq!(m.r2, Score::Undefined(Undefined::ConstantActuals));
    let m = metrics(&[0.0, 2.0], &[0.0, 1.0]).unwrap();
    assert_eq!(m.mape, Score::Undefined(Undefined::ZeroActual));
    assert_eq!(m.smape, Score::Undefined(Undefined::ZeroPair));
}
