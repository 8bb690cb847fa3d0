//! Gradient boosting with exact greedy split search on squared error.
//!
//! For squared error the gradient is `pred - y` and the hessian is 1, so the
//! hessian sum of a node is its row count. Trees grow level by level; each
//! level scans every feature once in presorted order.

use rand::seq::index::sample;

use super::config::GbTreeConfig;
use super::tree::{midpoint, Tree};
use crate::linalg::Matrix;
use crate::rng::stream_rng;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Stat {
    node: usize,
    g: f64,
    h: f64,
}

#[derive(Clone, Copy)]
struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

pub(crate) fn presort(x: &Matrix) -> Vec<Vec<u32>> {
    (0..x.cols())
        .map(|j| {
            let mut idx: Vec<u32> = (0..x.rows() as u32).collect();
            idx.sort_by(|&a, &b| x[(a as usize, j)].total_cmp(&x[(b as usize, j)]));
            idx
        })
        .collect()
}

pub(crate) fn split_gain(gl: f64, hl: f64, g: f64, h: f64, lambda: f64, gamma: f64) -> f64 {
    let gr = g - gl;
    let hr = h - hl;
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) - gamma
}

pub(crate) fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

/// Grow one tree on gradients `grad`; rows with `in_sample == false` are ignored.
pub(crate) fn grow_tree(
    x: &Matrix,
    sorted: &[Vec<u32>],
    grad: &[f64],
    in_sample: &[bool],
    cfg: &GbTreeConfig,
) -> Tree {
    let n = x.rows();
    let mut tree = Tree::new();
    let root = tree.push_leaf(0.0);
    let mut node_of: Vec<u32> = (0..n)
        .map(|i| if in_sample[i] { root as u32 } else { NONE })
        .collect();
    let (g, h) = (0..n)
        .filter(|&i| in_sample[i])
        .fold((0.0, 0.0), |(g, h), i| (g + grad[i], h + 1.0));
    let mut frontier = vec![Stat { node: root, g, h }];

    for _depth in 0..cfg.max_depth {
        if frontier.is_empty() {
            break;
        }
        let mut slot_of = vec![NONE; tree.len()];
        for (s, st) in frontier.iter().enumerate() {
            slot_of[st.node] = s as u32;
        }
        let m = frontier.len();
        let mut best: Vec<Best> = vec![
            Best {
                gain: 0.0,
                feature: 0,
                threshold: 0.0,
            };
            m
        ];
        let mut gl = vec![0.0; m];
        let mut hl = vec![0.0; m];
        let mut last = vec![0.0; m];
        for (j, order) in sorted.iter().enumerate() {
            gl.iter_mut().for_each(|v| *v = 0.0);
            hl.iter_mut().for_each(|v| *v = 0.0);
            for &r in order {
                let r = r as usize;
                let nd = node_of[r];
                if nd == NONE {
                    continue;
                }
                let s = slot_of[nd as usize];
                if s == NONE {
                    continue;
                }
                let s = s as usize;
                let v = x[(r, j)];
                if hl[s] > 0.0 && v > last[s] {
                    let st = frontier[s];
                    let hr = st.h - hl[s];
                    if hl[s] >= cfg.min_child_weight && hr >= cfg.min_child_weight {
                        let gain = split_gain(gl[s], hl[s], st.g, st.h, cfg.lambda, cfg.gamma);
                        if gain > best[s].gain {
                            best[s] = Best {
                                gain,
                                feature: j,
                                threshold: midpoint(last[s], v),
                            };
                        }
                    }
                }
                gl[s] += grad[r];
                hl[s] += 1.0;
                last[s] = v;
            }
        }

        let mut next = Vec::new();
        let mut child_of: Vec<Option<(usize, usize)>> = vec![None; m];
        for (s, st) in frontier.iter().enumerate() {
            if best[s].gain > 0.0 {
                let l = tree.push_leaf(0.0);
                let r = tree.push_leaf(0.0);
                tree.set_split(st.node, best[s].feature, best[s].threshold, best[s].gain, l, r);
                child_of[s] = Some((l, r));
                next.push(Stat { node: l, g: 0.0, h: 0.0 });
                next.push(Stat { node: r, g: 0.0, h: 0.0 });
            } else {
                tree.set_leaf(st.node, leaf_weight(st.g, st.h, cfg.lambda));
            }
        }
        if next.is_empty() {
            frontier.clear();
            break;
        }
        let mut pos = vec![NONE; tree.len()];
        for (k, st) in next.iter().enumerate() {
            pos[st.node] = k as u32;
        }
        for i in 0..n {
            let nd = node_of[i];
            if nd == NONE {
                continue;
            }
            let s = slot_of[nd as usize];
            if s == NONE {
                continue;
            }
            if let Some((l, r)) = child_of[s as usize] {
                let b = best[s as usize];
                let c = if x[(i, b.feature)] <= b.threshold { l } else { r };
                node_of[i] = c as u32;
                let k = pos[c] as usize;
                next[k].g += grad[i];
                next[k].h += 1.0;
            }
        }
        frontier = next;
    }
    for st in &frontier {
        tree.set_leaf(st.node, leaf_weight(st.g, st.h, cfg.lambda));
    }
    tree
}

/// Returns the base score and the fitted trees (leaf weights before shrinkage).
pub(crate) fn fit(cfg: &GbTreeConfig, x: &Matrix, y: &[f64], seed: u64) -> (f64, Vec<Tree>) {
    let n = x.rows();
    let base = cfg
        .base_score
        .unwrap_or_else(|| y.iter().sum::<f64>() / n as f64);
    let mut pred = vec![base; n];
    let sorted = presort(x);
    let mut trees = Vec::with_capacity(cfg.rounds);
    let mut grad = vec![0.0; n];
    let mut in_sample = vec![true; n];
    let take = ((cfg.subsample * n as f64).round() as usize).clamp(1, n);
    for round in 0..cfg.rounds {
        for i in 0..n {
            grad[i] = pred[i] - y[i];
        }
        if take < n {
            let mut rng = stream_rng(seed, "gbtree-subsample", round as u64);
            in_sample.iter_mut().for_each(|v| *v = false);
            for i in sample(&mut rng, n, take) {
                in_sample[i] = true;
            }
        }
        let tree = grow_tree(x, &sorted, &grad, &in_sample, cfg);
        for (i, p) in pred.iter_mut().enumerate() {
            *p += cfg.learning_rate * tree.predict(x.row(i));
        }
        trees.push(tree);
    }
    (base, trees)
}

pub(crate) fn predict_row(base: f64, learning_rate: f64, trees: &[Tree], row: &[f64]) -> f64 {
    let mut p = base;
    for t in trees {
        p += learning_rate * t.predict(row);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rounds: usize, depth: usize, lambda: f64) -> GbTreeConfig {
        GbTreeConfig {
            rounds,
            learning_rate: 1.0,
            max_depth: depth,
            min_child_weight: 1.0,
            lambda,
            gamma: 0.0,
            subsample: 1.0,
            base_score: None,
        }
    }

    #[test]
    fn single_split_on_step() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = xs.iter().map(|&v| if v < 5.0 { 0.0 } else { 1.0 }).collect();
        let x = Matrix::from_columns(&[xs]).unwrap();
        let (base, trees) = fit(&cfg(1, 1, 0.0), &x, &y, 0);
        assert_eq!(base, 0.5);
        let splits: Vec<_> = trees[0].splits().collect();
        assert_eq!(splits.len(), 1);
        assert_eq!(splits[0].0, 0);
        assert_eq!(splits[0].1, 4.5);
        for i in 0..10 {
            let p = predict_row(base, 1.0, &trees, x.row(i));
            assert!((p - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn ties_prefer_first_feature() {
        let a: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let y: Vec<f64> = a.iter().map(|&v| if v < 4.0 { -1.0 } else { 1.0 }).collect();
        let x = Matrix::from_columns(&[a.clone(), a]).unwrap();
        let (_, trees) = fit(&cfg(1, 1, 1.0), &x, &y, 0);
        assert_eq!(trees[0].splits().next().unwrap().0, 0);
    }

    #[test]
    fn constant_feature_gives_stump() {
        let x = Matrix::from_columns(&[vec![1.0; 6]]).unwrap();
        let y = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let (base, trees) = fit(&cfg(3, 4, 1.0), &x, &y, 0);
        assert_eq!(base, 3.5);
        for t in &trees {
            assert_eq!(t.len(), 1);
            assert!(t.leaf_values().all(|w| w.abs() < 1e-12));
        }
    }

    #[test]
    fn subsample_is_seeded() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = xs.iter().map(|v| v * 3.0).collect();
        let x = Matrix::from_columns(&[xs]).unwrap();
        let c = GbTreeConfig {
            subsample: 0.5,
            ..cfg(5, 2, 1.0)
        };
        assert_eq!(fit(&c, &x, &y, 4), fit(&c, &x, &y, 4));
        assert_ne!(fit(&c, &x, &y, 4).1, fit(&c, &x, &y, 5).1);
    }
}
