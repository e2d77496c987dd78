//! Adam with optional decoupled weight decay, and the warmup + cosine
//! learning-rate schedule.

use std::f64::consts::PI;

use ndarray::Zip;

use crate::nn::{Mat, Params};

#[derive(Clone, Debug)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    m: Vec<Mat>,
    v: Vec<Mat>,
    t: i32,
}

impl Adam {
    pub fn new<P: Params>(p: &P, beta1: f64, beta2: f64, weight_decay: f64) -> Self {
        let zeros: Vec<Mat> = p
            .tensors()
            .iter()
            .map(|(_, t)| Mat::zeros(t.dim()))
            .collect();
        Self {
            beta1,
            beta2,
            eps: 1e-8,
            weight_decay,
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    pub fn step<P: Params>(&mut self, params: &mut P, grads: &P, lr: f64) {
        self.t += 1;
        let (b1, b2, eps, wd) = (self.beta1, self.beta2, self.eps, self.weight_decay);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let gs: Vec<&Mat> = grads.tensors().into_iter().map(|(_, g)| g).collect();
        for (k, p) in params.tensors_mut().into_iter().enumerate() {
            Zip::from(p)
                .and(gs[k])
                .and(&mut self.m[k])
                .and(&mut self.v[k])
                .for_each(|w, &g, m, v| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    let update = (*m / c1) / ((*v / c2).sqrt() + eps);
                    *w -= lr * (update + wd * *w);
                });
        }
    }
}

/// Linear warmup over `warmup` steps, then cosine decay to zero at `total`.
pub fn warmup_cosine(step: usize, total: usize, warmup: usize, max_lr: f64) -> f64 {
    if step < warmup {
        return max_lr * (step + 1) as f64 / warmup as f64;
    }
    let span = total.saturating_sub(warmup).max(1);
    let progress = ((step - warmup) as f64 / span as f64).min(1.0);
    max_lr * 0.5 * (1.0 + (PI * progress).cos())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_shape() {
        let lr = |s| warmup_cosine(s, 100, 2, 1.0);
        assert_eq!(lr(0), 0.5);
        assert_eq!(lr(1), 1.0);
        assert_eq!(lr(2), 1.0);
        assert!((lr(51) - 0.5).abs() < 0.02);
        assert!(lr(99) < 0.01);
        assert!((2..99).all(|s| lr(s + 1) <= lr(s)));
    }
}
