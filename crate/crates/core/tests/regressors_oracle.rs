use hourcast::design::DesignMatrix;
use hourcast::linalg::Matrix;
use hourcast::regressors::{
    breakpoint_grid, fit, ForestConfig, PiecewiseConfig, PolynomialConfig, RegressorConfig, Term,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ols(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let n = rows.len();
    let p = rows[0].len();
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let yv = DVector::from_column_slice(y);
    let b = (x.transpose() * &x).lu().solve(&(x.transpose() * &yv)).unwrap();
    let r = &yv - &x * &b;
    (b.iter().copied().collect(), r.dot(&r))
}

fn sample(seed: u64, n: usize) -> (DesignMatrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..25.0)).collect();
    let g: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..900.0)).collect();
    let w: Vec<f64> = (0..n).map(|_| f64::from(rng.random_bool(0.3) as u8)).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| 2000.0 + 40.0 * (12.0 - t[i]).max(0.0) + 70.0 * (t[i] - 18.0).max(0.0)
            - 0.3 * g[i] - 120.0 * w[i] + rng.random_range(-30.0..30.0))
        .collect();
    let d = DesignMatrix::new(
        vec!["pca_temp".into(), "pca_ghi".into(), "weekend".into()],
        Matrix::from_columns(&[t, g, w]).unwrap(),
    )
    .unwrap();
    (d, y)
}

#[test]
fn degree_one_polynomial_is_ols() {
    for seed in 0..5 {
        let (d, y) = sample(seed, 120);
        let cfg = RegressorConfig::Polynomial(PolynomialConfig { degree: 1, ridge: 0.0, ..Default::default() });
        let m = fit(&cfg, &d, &y, 0).unwrap();
        let rows: Vec<Vec<f64>> = d.x.iter_rows().map(|r| [&[1.0][..], r].concat()).collect();
        let (beta, _) = ols(&rows, &y);
        let lin = m.linear().unwrap();
        assert!((lin.intercept - beta[0]).abs() < 1e-6 * beta[0].abs());
        for (j, b) in beta[1..].iter().enumerate() {
            let got = lin.coefficient(&Term::Column { index: j }).unwrap();
            assert!((got - b).abs() < 1e-6 * b.abs().max(1.0), "coef {j}: {got} vs {b}");
        }
    }
}

#[test]
fn cubic_fits_cubic_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t: Vec<f64> = (0..50).map(|_| rng.random_range(-3.0..3.0)).collect();
    let g: Vec<f64> = (0..50).map(|_| rng.random_range(-3.0..3.0)).collect();
    let y: Vec<f64> = (0..50).map(|i| 1.0 + t[i] * t[i] * g[i] - 2.0 * g[i].powi(3) + t[i]).collect();
    let d = DesignMatrix::new(vec!["pca_temp".into(), "pca_ghi".into()], Matrix::from_columns(&[t, g]).unwrap()).unwrap();
    let m = fit(&RegressorConfig::Polynomial(PolynomialConfig::default()), &d, &y, 0).unwrap();
    for (p, want) in m.predict(&d).unwrap().iter().zip(&y) {
        assert!((p - want).abs() < 1e-8);
    }
}

#[test]
fn ridge_shrinks_coefficients() {
    let (d, y) = sample(8, 100);
    let norm = |ridge: f64| {
        let cfg = RegressorConfig::Polynomial(PolynomialConfig { degree: 2, ridge, ..Default::default() });
        let m = fit(&cfg, &d, &y, 0).unwrap();
        m.linear().unwrap().coefficients.iter().map(|c| c * c).sum::<f64>()
    };
    assert!(norm(1e3) < norm(0.0));
    assert!(norm(1e12) < 1e-6);
}

#[test]
fn piecewise_is_best_hinge_on_grid() {
    let (d, y) = sample(11, 200);
    let cfg = PiecewiseConfig { grid_size: 9, ..Default::default() };
    let m = fit(&RegressorConfig::Piecewise(cfg), &d, &y, 0).unwrap();
    let lin = m.linear().unwrap();
    let knot = lin.breakpoint().unwrap();

    // Refit every candidate knot with an independent OLS and compare.
    let t = d.x.column(0);
    let mut best = (f64::INFINITY, f64::NAN);
    for b in breakpoint_grid(&t, 9) {
        let rows: Vec<Vec<f64>> = d
            .x
            .iter_rows()
            .map(|r| vec![1.0, r[0], r[1], r[2], (r[0] - b).max(0.0)])
            .collect();
        let (beta, sse) = ols(&rows, &y);
        if sse < best.0 {
            best = (sse, b);
        }
        if b == knot {
            assert!((lin.intercept - beta[0]).abs() < 1e-6 * beta[0].abs());
            let hinge = lin.coefficient(&Term::Hinge { index: 0, knot }).unwrap();
            assert!((hinge - beta[4]).abs() < 1e-6 * beta[4].abs().max(1.0));
        }
    }
    assert_eq!(knot, best.1);

    // Continuity at the knot.
    let left = lin.predict_row(&[knot - 1e-9, 100.0, 0.0]);
    let right = lin.predict_row(&[knot + 1e-9, 100.0, 0.0]);
    assert!((left - right).abs() < 1e-5);
}

#[test]
fn unlimited_forest_without_bootstrap_memorizes() {
    let (d, y) = sample(21, 150);
    let cfg = RegressorConfig::Rforest(ForestConfig {
        trees: 5,
        max_depth: None,
        min_samples_leaf: 1,
        feature_fraction: 1.0,
        bootstrap: false,
    });
    let p = fit(&cfg, &d, &y, 0).unwrap().predict(&d).unwrap();
    for (a, b) in p.iter().zip(&y) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn forest_thresholds_lie_inside_training_range() {
    let (d, y) = sample(22, 150);
    let m = fit(&RegressorConfig::Rforest(ForestConfig { trees: 10, ..Default::default() }), &d, &y, 5).unwrap();
    for t in m.trees() {
        for (f, thr, _) in t.splits() {
            let col = d.x.column(f);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(thr >= lo && thr < hi);
        }
    }
}
