use serde::{Deserialize, Serialize};

use super::config::{PiecewiseConfig, PolynomialConfig};
use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::linalg::{lstsq, Matrix};

/// Basis function of a linear model, evaluated on one design row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Column { index: usize },
    /// `max(0, x[index] - knot)`.
    Hinge { index: usize, knot: f64 },
    /// Product of `x[index]^power` over the listed factors.
    Monomial { factors: Vec<(usize, u32)> },
}

impl Term {
    pub fn eval(&self, row: &[f64]) -> f64 {
        match self {
            Term::Column { index } => row[*index],
            Term::Hinge { index, knot } => (row[*index] - knot).max(0.0),
            Term::Monomial { factors } => factors
                .iter()
                .map(|&(i, p)| row[i].powi(p as i32))
                .product(),
        }
    }

    pub fn name(&self, columns: &[String]) -> String {
        match self {
            Term::Column { index } => columns[*index].clone(),
            Term::Hinge { index, knot } => format!("max(0, {} - {knot})", columns[*index]),
            Term::Monomial { factors } => factors
                .iter()
                .map(|&(i, p)| {
                    if p == 1 {
                        columns[i].clone()
                    } else {
                        format!("{}^{p}", columns[i])
                    }
                })
                .collect::<Vec<_>>()
                .join("*"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub terms: Vec<Term>,
    pub coefficients: Vec<f64>,
}

impl LinearModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut acc = self.intercept;
        for (t, c) in self.terms.iter().zip(&self.coefficients) {
            acc += c * t.eval(row);
        }
        acc
    }

    /// Knot of the hinge term, if the model has one.
    pub fn breakpoint(&self) -> Option<f64> {
        self.terms.iter().find_map(|t| match t {
            Term::Hinge { knot, .. } => Some(*knot),
            _ => None,
        })
    }

    pub fn coefficient(&self, term: &Term) -> Option<f64> {
        self.terms
            .iter()
            .position(|t| t == term)
            .map(|i| self.coefficients[i])
    }
}

fn basis(x: &Matrix, terms: &[Term]) -> Matrix {
    let mut out = Matrix::zeros(x.rows(), terms.len() + 1);
    for i in 0..x.rows() {
        let row = x.row(i);
        let dst = out.row_mut(i);
        dst[0] = 1.0;
        for (k, t) in terms.iter().enumerate() {
            dst[k + 1] = t.eval(row);
        }
    }
    out
}

fn solve(x: &Matrix, y: &[f64], terms: Vec<Term>, ridge: f64) -> Result<(LinearModel, f64)> {
    let a = basis(x, &terms);
    let mut mask = vec![true; a.cols()];
    mask[0] = false;
    let beta = lstsq(&a, y, ridge, &mask)?;
    let model = LinearModel {
        intercept: beta[0],
        terms,
        coefficients: beta[1..].to_vec(),
    };
    let sse = (0..x.rows())
        .map(|i| {
            let r = y[i] - model.predict_row(x.row(i));
            r * r
        })
        .sum();
    Ok((model, sse))
}

/// Type-7 sample quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Candidate knots at quantiles `j / (m + 1)`, `j = 1..=m`, without duplicates.
pub fn breakpoint_grid(values: &[f64], m: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(m);
    for j in 1..=m {
        let q = quantile_sorted(&sorted, j as f64 / (m + 1) as f64);
        if out.last() != Some(&q) {
            out.push(q);
        }
    }
    out
}

fn linear_terms(p: usize) -> Vec<Term> {
    (0..p).map(|index| Term::Column { index }).collect()
}

pub(crate) fn fit_piecewise(
    cfg: &PiecewiseConfig,
    design: &DesignMatrix,
    y: &[f64],
) -> Result<(LinearModel, Vec<String>)> {
    let b = design.column_index(&cfg.breakpoint_column).ok_or_else(|| {
        Error::argument(format!(
            "breakpoint column `{}` not in design",
            cfg.breakpoint_column
        ))
    })?;
    let x = &design.x;
    let xb = x.column(b);
    let lo = xb.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xb.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        let (model, _) = solve(x, y, linear_terms(x.cols()), 0.0)?;
        let warning = format!(
            "breakpoint column `{}` is constant; fitted a plain linear model",
            cfg.breakpoint_column
        );
        return Ok((model, vec![warning]));
    }
    let mut best: Option<(LinearModel, f64)> = None;
    for knot in breakpoint_grid(&xb, cfg.grid_size) {
        let mut terms = linear_terms(x.cols());
        terms.push(Term::Hinge { index: b, knot });
        let (model, sse) = solve(x, y, terms, 0.0)?;
        if best.as_ref().is_none_or(|(_, s)| sse < *s) {
            best = Some((model, sse));
        }
    }
    let (model, sse) = best.expect("grid is non-empty");
    if !sse.is_finite() {
        return Err(Error::fit("piecewise fit produced a non-finite residual"));
    }
    Ok((model, Vec::new()))
}

/// Exponent tuples over `k` variables with total degree exactly `d`, highest
/// power of the first variable first.
fn exponent_tuples(k: usize, d: u32) -> Vec<Vec<u32>> {
    if k == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in exponent_tuples(k - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub(crate) fn polynomial_terms(cfg: &PolynomialConfig, design: &DesignMatrix) -> Result<Vec<Term>> {
    let mut expand = Vec::with_capacity(cfg.expand.len());
    for name in &cfg.expand {
        let i = design
            .column_index(name)
            .ok_or_else(|| Error::argument(format!("expansion column `{name}` not in design")))?;
        if !expand.contains(&i) {
            expand.push(i);
        }
    }
    let mut terms = Vec::new();
    if !expand.is_empty() {
        for d in 1..=cfg.degree {
            for exps in exponent_tuples(expand.len(), d) {
                let factors: Vec<(usize, u32)> = expand
                    .iter()
                    .zip(&exps)
                    .filter(|(_, &e)| e > 0)
                    .map(|(&i, &e)| (i, e))
                    .collect();
                terms.push(match factors.as_slice() {
                    [(i, 1)] => Term::Column { index: *i },
                    _ => Term::Monomial { factors },
                });
            }
        }
    }
    for index in 0..design.columns.len() {
        if !expand.contains(&index) {
            terms.push(Term::Column { index });
        }
    }
    Ok(terms)
}

pub(crate) fn fit_polynomial(
    cfg: &PolynomialConfig,
    design: &DesignMatrix,
    y: &[f64],
) -> Result<LinearModel> {
    let terms = polynomial_terms(cfg, design)?;
    let (model, sse) = solve(&design.x, y, terms, cfg.ridge)?;
    if !sse.is_finite() {
        return Err(Error::fit("polynomial fit produced a non-finite residual"));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(cols: &[(&str, Vec<f64>)]) -> DesignMatrix {
        let names = cols.iter().map(|(n, _)| n.to_string()).collect();
        let data: Vec<Vec<f64>> = cols.iter().map(|(_, v)| v.clone()).collect();
        DesignMatrix::new(names, Matrix::from_columns(&data).unwrap()).unwrap()
    }

    #[test]
    fn quantile_grid_type7() {
        let v: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        assert_eq!(breakpoint_grid(&v, 1), vec![5.0]);
        assert_eq!(breakpoint_grid(&v, 4), vec![2.0, 4.0, 6.0, 8.0]);
        assert_eq!(breakpoint_grid(&[1.0, 1.0, 1.0, 2.0], 3), vec![1.0, 1.25]);
    }

    #[test]
    fn monomial_count() {
        let d = design(&[
            ("pca_temp", vec![1.0, 2.0]),
            ("pca_ghi", vec![3.0, 4.0]),
            ("holiday", vec![0.0, 1.0]),
        ]);
        let cfg = PolynomialConfig {
            degree: 3,
            ..PolynomialConfig::default()
        };
        let terms = polynomial_terms(&cfg, &d).unwrap();
        // 2 + 3 + 4 monomials plus one linear column.
        assert_eq!(terms.len(), 10);
        assert_eq!(terms[0], Term::Column { index: 0 });
        assert_eq!(terms[2].name(&d.columns), "pca_temp^2");
        assert_eq!(terms[3].name(&d.columns), "pca_temp*pca_ghi");
        assert_eq!(terms[9], Term::Column { index: 2 });
    }

    #[test]
    fn hinge_recovery() {
        let xs: Vec<f64> = (-20..=20).map(|i| i as f64 / 4.0).collect();
        let y: Vec<f64> = xs.iter().map(|&v| 2.0 - v + 4.0 * v.max(0.0)).collect();
        let d = design(&[("pca_temp", xs)]);
        let cfg = PiecewiseConfig {
            grid_size: 19,
            ..PiecewiseConfig::default()
        };
        let (m, warnings) = fit_piecewise(&cfg, &d, &y).unwrap();
        assert!(warnings.is_empty());
        assert!(m.breakpoint().unwrap().abs() < 1e-12);
        assert!((m.intercept - 2.0).abs() < 1e-9);
        assert!((m.coefficients[0] + 1.0).abs() < 1e-9);
        assert!((m.coefficients[1] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn constant_breakpoint_column_degrades() {
        let d = design(&[("pca_temp", vec![3.0; 5]), ("z", vec![1.0, 2.0, 3.0, 4.0, 5.0])]);
        let y = [2.0, 4.0, 6.0, 8.0, 10.0];
        let (m, warnings) = fit_piecewise(&PiecewiseConfig::default(), &d, &y).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(m.breakpoint().is_none());
        assert!((m.predict_row(&[3.0, 6.0]) - 12.0).abs() < 1e-9);
    }
}
