//! Bagged CART regression trees with per-node feature subsampling.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ForestConfig;
use super::tree::{midpoint, Tree};
use crate::linalg::Matrix;
use crate::rng::stream_rng;

struct Work {
    node: usize,
    rows: Vec<u32>,
    depth: usize,
}

fn features_per_node(cfg: &ForestConfig, p: usize) -> usize {
    ((cfg.feature_fraction * p as f64).round() as usize).clamp(1, p)
}

fn grow(cfg: &ForestConfig, x: &Matrix, y: &[f64], rows: Vec<u32>, rng: &mut ChaCha8Rng) -> Tree {
    let p = x.cols();
    let mtry = features_per_node(cfg, p);
    let max_depth = cfg.max_depth.unwrap_or(usize::MAX);
    let min_leaf = cfg.min_samples_leaf;
    let mut tree = Tree::new();
    let root = tree.push_leaf(0.0);
    let mut stack = vec![Work {
        node: root,
        rows,
        depth: 0,
    }];
    let mut order: Vec<(f64, u32)> = Vec::new();
    while let Some(w) = stack.pop() {
        let n = w.rows.len();
        let mean = w.rows.iter().map(|&r| y[r as usize]).sum::<f64>() / n as f64;
        let y0 = y[w.rows[0] as usize];
        let pure = w.rows.iter().all(|&r| y[r as usize] == y0);
        if pure || w.depth >= max_depth || n < 2 * min_leaf {
            tree.set_leaf(w.node, if pure { y0 } else { mean });
            continue;
        }
        let mut feats: Vec<usize> = if mtry == p {
            (0..p).collect()
        } else {
            sample(rng, p, mtry).into_vec()
        };
        feats.sort_unstable();

        // Gain is the SSE reduction, computed from residuals about the node mean.
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in &feats {
            order.clear();
            order.extend(w.rows.iter().map(|&r| (x[(r as usize, f)], r)));
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut sl = 0.0;
            for i in 1..n {
                sl += y[order[i - 1].1 as usize] - mean;
                if order[i - 1].0 < order[i].0 && i >= min_leaf && n - i >= min_leaf {
                    let (nl, nr) = (i as f64, (n - i) as f64);
                    let gain = sl * sl * (1.0 / nl + 1.0 / nr);
                    if best.is_none_or(|b| gain > b.0) {
                        best = Some((gain, f, midpoint(order[i - 1].0, order[i].0)));
                    }
                }
            }
        }
        match best {
            Some((gain, f, thr)) if gain > 0.0 => {
                let (lrows, rrows): (Vec<u32>, Vec<u32>) =
                    w.rows.iter().partition(|&&r| x[(r as usize, f)] <= thr);
                let l = tree.push_leaf(0.0);
                let r = tree.push_leaf(0.0);
                tree.set_split(w.node, f, thr, gain, l, r);
                stack.push(Work {
                    node: r,
                    rows: rrows,
                    depth: w.depth + 1,
                });
                stack.push(Work {
                    node: l,
                    rows: lrows,
                    depth: w.depth + 1,
                });
            }
            _ => tree.set_leaf(w.node, mean),
        }
    }
    tree
}

pub(crate) fn fit(cfg: &ForestConfig, x: &Matrix, y: &[f64], seed: u64) -> Vec<Tree> {
    let n = x.rows();
    (0..cfg.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, "rforest", t as u64);
            let rows: Vec<u32> = if cfg.bootstrap {
                (0..n).map(|_| rng.random_range(0..n as u32)).collect()
            } else {
                (0..n as u32).collect()
            };
            grow(cfg, x, y, rows, &mut rng)
        })
        .collect()
}

pub(crate) fn predict_row(trees: &[Tree], row: &[f64]) -> f64 {
    trees.iter().map(|t| t.predict(row)).sum::<f64>() / trees.len() as f64
}
