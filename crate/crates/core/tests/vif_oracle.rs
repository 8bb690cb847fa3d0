mod common;

use hourcast::features::{fit_pca_pair, vif, Components};
use hourcast::linalg::Matrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// VIF of column `j` through the normal equations `(XᵀX) b = Xᵀy`.
fn normal_equation_vif(m: &Matrix, j: usize) -> f64 {
    let n = m.rows();
    let others: Vec<usize> = (0..m.cols()).filter(|&k| k != j).collect();
    let mut x = DMatrix::zeros(n, others.len() + 1);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        x[(i, 0)] = 1.0;
        for (c, &k) in others.iter().enumerate() {
            x[(i, c + 1)] = m[(i, k)];
        }
        y[i] = m[(i, j)];
    }
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let b = xtx.lu().solve(&xty).unwrap();
    let fitted = &x * b;
    let mean = y.mean();
    let ss_res: f64 = (0..n).map(|i| (y[i] - fitted[i]).powi(2)).sum();
    let ss_tot: f64 = (0..n).map(|i| (y[i] - mean).powi(2)).sum();
    1.0 / (ss_res / ss_tot)
}

#[test]
fn matches_normal_equation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let names: Vec<String> = (0..6).map(|j| format!("x{j}")).collect();
    for _ in 0..20 {
        let mut data = vec![0.0; 200 * 6];
        for i in 0..200 {
            let shared: f64 = rng.random_range(-1.0..1.0);
            for j in 0..6 {
                data[i * 6 + j] = shared * j as f64 + rng.random_range(-1.0..1.0);
            }
        }
        let m = Matrix::from_vec(200, 6, data).unwrap();
        let report = vif(&m, &names).unwrap();
        for j in 0..6 {
            let want = normal_equation_vif(&m, j);
            let got = report.entries[j].vif;
            assert!((got - want).abs() < 1e-6, "column {j}: {got} vs {want}");
        }
    }
}

#[test]
fn orthogonal_columns_have_unit_vif() {
    let a = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
    let b = [1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0];
    let m = Matrix::from_columns(&[a.to_vec(), b.to_vec()]).unwrap();
    let r = vif(&m, &["a".into(), "b".into()]).unwrap();
    for v in r.values() {
        assert!((v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn exact_collinearity_is_infinite() {
    let a: Vec<f64> = (0..10).map(|i| i as f64).collect();
    let b: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
    let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - y).collect();
    let m = Matrix::from_columns(&[a, b, c]).unwrap();
    let r = vif(&m, &["a".into(), "b".into(), "c".into()]).unwrap();
    assert!(r.values().iter().all(|v| v.is_infinite()));
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"vif\":null"));
}

#[test]
fn synthetic_sites_collapse_after_pca() {
    let frame = common::synth(731, 42);
    let y1 = frame.year_range(1).unwrap();
    let load = frame.load().unwrap()[y1.clone()].to_vec();
    let names: Vec<String> = ["s1", "s2", "s3", "s4", "s5", "load"].map(String::from).to_vec();
    for panel in [frame.temps(), frame.ghis()] {
        let mut cols: Vec<Vec<f64>> = panel.iter().map(|s| s[y1.clone()].to_vec()).collect();
        cols.push(load.clone());
        let r = vif(&Matrix::from_columns(&cols).unwrap(), &names).unwrap();
        for e in &r.entries[..5] {
            assert!(e.vif > 100.0, "{} = {}", e.feature, e.vif);
        }
    }
    let (pt, pg) = fit_pca_pair(&frame, y1.clone(), Components::Count(1)).unwrap();
    let st = pt.transform(&frame.temp_matrix(y1.clone())).unwrap().column(0);
    let sg = pg.transform(&frame.ghi_matrix(y1.clone())).unwrap().column(0);
    let m = Matrix::from_columns(&[load, st, sg]).unwrap();
    let r = vif(&m, &["load".into(), "pca_temp".into(), "pca_ghi".into()]).unwrap();
    for e in &r.entries {
        assert!(e.vif < 5.0, "{} = {}", e.feature, e.vif);
    }
}
