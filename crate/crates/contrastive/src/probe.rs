//! Linear probing: a softmax classifier on frozen embeddings, selected by
//! validation accuracy.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::nn::{col_sum, Mat, Params};
use crate::optim::Adam;
use planegen_core::seed::{mix, rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 128,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearHead {
    pub w: Mat,
    pub b: Mat,
}

impl Params for LinearHead {
    fn tensors(&self) -> Vec<(&'static str, &Mat)> {
        vec![("probe.w", &self.w), ("probe.b", &self.b)]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Mat> {
        vec![&mut self.w, &mut self.b]
    }
}

impl LinearHead {
    pub fn zeros(dim: usize, classes: usize) -> Self {
        Self {
            w: Array2::zeros((dim, classes)),
            b: Array2::zeros((1, classes)),
        }
    }

    pub fn logits(&self, x: &Mat) -> Mat {
        x.dot(&self.w) + &self.b
    }

    /// Mean cross-entropy over the rows of `x` and its gradient.
    pub fn loss_grad(&self, x: &Mat, y: &[usize]) -> (f64, LinearHead) {
        let n = x.nrows() as f64;
        let mut p = self.logits(x);
        let mut loss = 0.0;
        for (mut row, &label) in p.rows_mut().into_iter().zip(y) {
            let m = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
            row.mapv_inplace(|v| (v - m).exp());
            let z = row.sum();
            row /= z;
            loss -= row[label].ln();
            row[label] -= 1.0;
        }
        p /= n;
        (
            loss / n,
            LinearHead {
                w: x.t().dot(&p),
                b: col_sum(&p),
            },
        )
    }

    pub fn predict(&self, x: &Mat) -> Vec<usize> {
        self.logits(x)
            .rows()
            .into_iter()
            .map(|r| {
                // First maximum wins.
                let mut best = 0;
                for (j, &v) in r.iter().enumerate() {
                    if v > r[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }

    pub fn accuracy(&self, x: &Mat, y: &[usize]) -> f64 {
        if y.is_empty() {
            return 0.0;
        }
        let hits = self
            .predict(x)
            .iter()
            .zip(y)
            .filter(|(a, b)| a == b)
            .count();
        hits as f64 / y.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub test_accuracy: f64,
    pub best_val_accuracy: f64,
    pub best_epoch: usize,
    pub val_curve: Vec<f64>,
}

/// Labelled embeddings for one split.
#[derive(Clone, Copy, Debug)]
pub struct Split<'a> {
    pub x: &'a Mat,
    pub y: &'a [usize],
}

/// Trains a softmax head on `train`; after every epoch the validation
/// accuracy is measured and the test accuracy of the best epoch (earliest
/// on ties) is reported.
pub fn linear_probe(
    train: Split<'_>,
    val: Split<'_>,
    test: Split<'_>,
    classes: usize,
    cfg: &ProbeConfig,
) -> ProbeResult {
    let dim = train.x.ncols();
    let mut head = LinearHead::zeros(dim, classes);
    let mut opt = Adam::new(&head, cfg.beta1, cfg.beta2, 0.0);
    let mut order: Vec<usize> = (0..train.y.len()).collect();
    let mut best = (f64::NEG_INFINITY, 0, 0.0);
    let mut val_curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng(mix(cfg.seed, epoch as u64)));
        for chunk in order.chunks(cfg.batch_size.max(1)) {
            let xb = train.x.select(Axis(0), chunk);
            let yb: Vec<usize> = chunk.iter().map(|&i| train.y[i]).collect();
            let (_, g) = head.loss_grad(&xb, &yb);
            opt.step(&mut head, &g, cfg.learning_rate);
        }
        let va = head.accuracy(val.x, val.y);
        val_curve.push(va);
        if va > best.0 {
            best = (va, epoch, head.accuracy(test.x, test.y));
        }
    }
    ProbeResult {
        test_accuracy: best.2,
        best_val_accuracy: best.0,
        best_epoch: best.1,
        val_curve,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn loss_gradient_by_differences() {
        let x = array![
            [0.2, -0.5, 1.0],
            [0.7, 0.1, -0.3],
            [-0.4, 0.9, 0.0],
            [0.3, 0.3, 0.3]
        ];
        let y = [0, 2, 1, 2];
        let mut h = LinearHead::zeros(3, 3);
        h.w = array![[0.1, -0.2, 0.3], [0.0, 0.5, -0.1], [0.2, 0.2, -0.4]];
        h.b = array![[0.05, -0.05, 0.0]];
        let (_, g) = h.loss_grad(&x, &y);
        let eps = 1e-6;
        for (i, j) in [(0, 0), (1, 2), (2, 1)] {
            let (mut p, mut m) = (h.clone(), h.clone());
            p.w[[i, j]] += eps;
            m.w[[i, j]] -= eps;
            let fd = (p.loss_grad(&x, &y).0 - m.loss_grad(&x, &y).0) / (2.0 * eps);
            assert!((fd - g.w[[i, j]]).abs() / fd.abs().max(1e-8) < 1e-6);
        }
    }

    #[test]
    fn separable_toy_is_solved() {
        let x = Array2::from_shape_fn((200, 2), |(i, j)| {
            let c = if i % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 {
                c * (1.0 + (i % 7) as f64 * 0.1)
            } else {
                ((i * 13) % 11) as f64 / 11.0 - 0.5
            }
        });
        let y: Vec<usize> = (0..200).map(|i| i % 2).collect();
        let s = Split { x: &x, y: &y };
        let r = linear_probe(s, s, s, 2, &ProbeConfig::default());
        assert_eq!(r.test_accuracy, 1.0);
    }
}
