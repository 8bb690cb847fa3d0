use serde::{Deserialize, Serialize};

const LEAF: i32 = -1;

/// Binary regression tree stored as flat node arrays.
///
/// Node `i` is a leaf when `feature[i] < 0`, in which case `value[i]` is its
/// output. Otherwise rows with `x[feature] <= value[i]` go to `left[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    feature: Vec<i32>,
    value: Vec<f64>,
    left: Vec<u32>,
    right: Vec<u32>,
    gain: Vec<f64>,
}

impl Tree {
    pub(crate) fn new() -> Self {
        Self {
            feature: Vec::new(),
            value: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            gain: Vec::new(),
        }
    }

    pub(crate) fn push_leaf(&mut self, value: f64) -> usize {
        self.feature.push(LEAF);
        self.value.push(value);
        self.left.push(0);
        self.right.push(0);
        self.gain.push(0.0);
        self.feature.len() - 1
    }

    pub(crate) fn set_leaf(&mut self, node: usize, value: f64) {
        self.feature[node] = LEAF;
        self.value[node] = value;
    }

    pub(crate) fn set_split(
        &mut self,
        node: usize,
        feature: usize,
        threshold: f64,
        gain: f64,
        left: usize,
        right: usize,
    ) {
        self.feature[node] = feature as i32;
        self.value[node] = threshold;
        self.gain[node] = gain;
        self.left[node] = left as u32;
        self.right[node] = right as u32;
    }

    pub fn len(&self) -> usize {
        self.feature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feature.is_empty()
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            let f = self.feature[i];
            if f < 0 {
                return self.value[i];
            }
            i = if row[f as usize] <= self.value[i] {
                self.left[i]
            } else {
                self.right[i]
            } as usize;
        }
    }

    /// Depth of the deepest leaf (a single leaf has depth 0).
    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            if self.feature[i] < 0 {
                max = max.max(d);
            } else {
                stack.push((self.left[i] as usize, d + 1));
                stack.push((self.right[i] as usize, d + 1));
            }
        }
        max
    }

    /// `(feature, threshold, gain)` of every internal node.
    pub fn splits(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        (0..self.len())
            .filter(|&i| self.feature[i] >= 0)
            .map(|i| (self.feature[i] as usize, self.value[i], self.gain[i]))
    }

    /// Output values of every leaf.
    pub fn leaf_values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len())
            .filter(|&i| self.feature[i] < 0)
            .map(|i| self.value[i])
    }

    pub(crate) fn add_importance(&self, totals: &mut [f64]) {
        for (f, _, g) in self.splits() {
            totals[f] += g;
        }
    }
}

/// Split point between two consecutive distinct sorted values, never equal
/// to the upper one.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}
