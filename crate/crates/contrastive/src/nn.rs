//! Small building blocks shared by the encoders.

use ndarray::{Array2, Axis, Zip};
use rand::Rng;

pub type Mat = Array2<f64>;

/// Uniform Glorot initialisation.
pub fn glorot<R: Rng>(rows: usize, cols: usize, r: &mut R) -> Mat {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    Mat::from_shape_fn((rows, cols), |_| r.gen_range(-a..a))
}

pub fn uniform<R: Rng>(rows: usize, cols: usize, a: f64, r: &mut R) -> Mat {
    Mat::from_shape_fn((rows, cols), |_| r.gen_range(-a..a))
}

pub fn relu(x: &Mat) -> Mat {
    x.mapv(|v| v.max(0.0))
}

/// `dy` masked by `x > 0`.
pub fn relu_backward(x: &Mat, dy: &Mat) -> Mat {
    let mut out = dy.clone();
    Zip::from(&mut out).and(x).for_each(|d, &v| {
        if v <= 0.0 {
            *d = 0.0;
        }
    });
    out
}

/// Row-wise L2 normalisation; returns the normalised rows and the norms.
pub fn normalize_rows(x: &Mat) -> (Mat, Vec<f64>) {
    let norms: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|r| r.dot(&r).sqrt().max(1e-12))
        .collect();
    let mut y = x.clone();
    for (mut row, n) in y.rows_mut().into_iter().zip(&norms) {
        row /= *n;
    }
    (y, norms)
}

/// Backward of `normalize_rows`: (dy - y (y·dy)) / |x|.
pub fn normalize_rows_backward(y: &Mat, norms: &[f64], dy: &Mat) -> Mat {
    let mut dx = dy.clone();
    for ((mut d, yr), n) in dx.rows_mut().into_iter().zip(y.rows()).zip(norms) {
        let proj = yr.dot(&d);
        d.scaled_add(-proj, &yr);
        d /= *n;
    }
    dx
}

/// Column sums as a 1×n row.
pub fn col_sum(x: &Mat) -> Mat {
    x.sum_axis(Axis(0)).insert_axis(Axis(0))
}

/// Stacks matrices vertically.
pub fn vstack(parts: &[&Mat]) -> Mat {
    let views: Vec<_> = parts.iter().map(|m| m.view()).collect();
    ndarray::concatenate(Axis(0), &views).expect("equal column counts")
}

/// Rows `[lo, hi)` as an owned matrix.
pub fn rows(x: &Mat, lo: usize, hi: usize) -> Mat {
    x.slice(ndarray::s![lo..hi, ..]).to_owned()
}

/// Adds `src` into rows `[lo, lo + src.nrows())` of `dst`.
pub fn add_rows(dst: &mut Mat, lo: usize, src: &Mat) {
    let mut view = dst.slice_mut(ndarray::s![lo..lo + src.nrows(), ..]);
    view += src;
}

/// A model whose weights are a fixed list of named matrices.
pub trait Params: Clone {
    fn tensors(&self) -> Vec<(&'static str, &Mat)>;
    fn tensors_mut(&mut self) -> Vec<&mut Mat>;

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill(0.0);
        }
        z
    }

    fn num_weights(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }

    /// Adds `other` into `self`, tensor by tensor.
    fn accumulate(&mut self, other: &Self) {
        let others: Vec<Mat> = other
            .tensors()
            .into_iter()
            .map(|(_, t)| t.clone())
            .collect();
        for (t, o) in self.tensors_mut().into_iter().zip(&others) {
            *t += o;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn normalize_backward_matches_difference() {
        let x = array![[0.3, -1.2, 2.0], [1.0, 0.5, -0.25]];
        let dy = array![[0.7, 0.1, -0.4], [-1.0, 2.0, 0.3]];
        let (y, n) = normalize_rows(&x);
        let dx = normalize_rows_backward(&y, &n, &dy);
        let f = |x: &Mat| (normalize_rows(x).0 * &dy).sum();
        let h = 1e-6;
        for i in 0..2 {
            for j in 0..3 {
                let (mut p, mut m) = (x.clone(), x.clone());
                p[[i, j]] += h;
                m[[i, j]] -= h;
                let fd = (f(&p) - f(&m)) / (2.0 * h);
                assert!((fd - dx[[i, j]]).abs() < 1e-8);
            }
        }
    }
}
