//! Vision encoder: a shared linear map over 8×8 patches with ReLU, pooled
//! over the 64 patches by both mean and max (a right-angle mark covers one
//! or two patches and would vanish in a mean alone), then a two-layer
//! perceptron and L2 normalisation.

use ndarray::{Array1, Array2, Axis};
use planegen_core::render::GrayImage;
use rand::Rng;
use rayon::prelude::*;

use crate::input::{resample, INPUT_LEN, INPUT_SIZE};
use crate::nn::{
    col_sum, glorot, normalize_rows, normalize_rows_backward, relu, relu_backward, uniform, Mat,
    Params,
};
use crate::ContrastiveError;

pub const PATCH_SIZE: usize = 8;
pub const GRID: usize = INPUT_SIZE / PATCH_SIZE;
pub const PATCHES: usize = GRID * GRID;
pub const PATCH_DIM: usize = PATCH_SIZE * PATCH_SIZE;
pub const PATCH_FEATURES: usize = 96;
pub const POOLED: usize = 2 * PATCH_FEATURES;
pub const HIDDEN: usize = 128;
pub const EMBED_DIM: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct VisionEncoderParams {
    pub w_patch: Mat,
    pub b_patch: Mat,
    pub w1: Mat,
    pub b1: Mat,
    pub w2: Mat,
    pub b2: Mat,
}

pub struct VisionCache {
    patches: Mat,
    z: Mat,
    pooled: Mat,
    /// Winning patch of every max-pooled feature.
    argmax: Vec<usize>,
    h: Mat,
    y: Mat,
    norms: Vec<f64>,
}

impl VisionCache {
    pub fn embeddings(&self) -> &Mat {
        &self.y
    }
}

/// Rearranges N×4096 images into (N·64)×64 patch rows.
fn to_patches(x: &Mat) -> Mat {
    let n = x.nrows();
    let mut p = Array2::zeros((n * PATCHES, PATCH_DIM));
    for b in 0..n {
        let img = x.row(b);
        for gi in 0..GRID {
            for gj in 0..GRID {
                let mut row = p.row_mut(b * PATCHES + gi * GRID + gj);
                for u in 0..PATCH_SIZE {
                    let src = (gi * PATCH_SIZE + u) * INPUT_SIZE + gj * PATCH_SIZE;
                    for v in 0..PATCH_SIZE {
                        row[u * PATCH_SIZE + v] = img[src + v];
                    }
                }
            }
        }
    }
    p
}

impl VisionEncoderParams {
    pub fn init<R: Rng>(r: &mut R) -> Self {
        Self {
            w_patch: glorot(PATCH_DIM, PATCH_FEATURES, r),
            b_patch: uniform(1, PATCH_FEATURES, 0.05, r),
            w1: glorot(POOLED, HIDDEN, r),
            b1: uniform(1, HIDDEN, 0.05, r),
            w2: glorot(HIDDEN, EMBED_DIM, r),
            b2: uniform(1, EMBED_DIM, 0.05, r),
        }
    }

    /// Embeds an N×4096 batch, keeping what the backward pass needs.
    pub fn forward(&self, x: &Mat) -> VisionCache {
        assert_eq!(x.ncols(), INPUT_LEN);
        let n = x.nrows();
        let patches = to_patches(x);
        let z = patches.dot(&self.w_patch) + &self.b_patch;
        let a = relu(&z);
        let mut pooled = Array2::zeros((n, POOLED));
        let mut argmax = vec![0; n * PATCH_FEATURES];
        for b in 0..n {
            let block = a.slice(ndarray::s![b * PATCHES..(b + 1) * PATCHES, ..]);
            let mean = block.mean_axis(Axis(0)).expect("non-empty patch axis");
            for f in 0..PATCH_FEATURES {
                pooled[[b, f]] = mean[f];
                let mut best = 0;
                for p in 1..PATCHES {
                    if block[[p, f]] > block[[best, f]] {
                        best = p;
                    }
                }
                pooled[[b, PATCH_FEATURES + f]] = block[[best, f]];
                argmax[b * PATCH_FEATURES + f] = best;
            }
        }
        let h = pooled.dot(&self.w1) + &self.b1;
        let o = relu(&h).dot(&self.w2) + &self.b2;
        let (y, norms) = normalize_rows(&o);
        VisionCache {
            patches,
            z,
            pooled,
            argmax,
            h,
            y,
            norms,
        }
    }

    pub fn encode(&self, x: &Mat) -> Mat {
        self.forward(x).y
    }

    /// Embeds a large batch in independent chunks across threads.
    pub fn encode_all(&self, x: &Mat) -> Mat {
        const CHUNK: usize = 128;
        let starts: Vec<usize> = (0..x.nrows()).step_by(CHUNK).collect();
        let parts: Vec<Mat> = starts
            .par_iter()
            .map(|&s| self.encode(&crate::nn::rows(x, s, (s + CHUNK).min(x.nrows()))))
            .collect();
        if parts.is_empty() {
            return Array2::zeros((0, EMBED_DIM));
        }
        crate::nn::vstack(&parts.iter().collect::<Vec<_>>())
    }

    /// Gradients of all weights given the gradient w.r.t. the embeddings.
    pub fn backward(&self, c: &VisionCache, dy: &Mat) -> Self {
        let n = dy.nrows();
        let d_o = normalize_rows_backward(&c.y, &c.norms, dy);
        let r = relu(&c.h);
        let w2 = r.t().dot(&d_o);
        let b2 = col_sum(&d_o);
        let d_h = relu_backward(&c.h, &d_o.dot(&self.w2.t()));
        let w1 = c.pooled.t().dot(&d_h);
        let b1 = col_sum(&d_h);
        let d_pooled = d_h.dot(&self.w1.t());
        let mut d_a = Array2::zeros((n * PATCHES, PATCH_FEATURES));
        for b in 0..n {
            let mean_part =
                d_pooled.slice(ndarray::s![b, ..PATCH_FEATURES]).to_owned() / PATCHES as f64;
            for p in 0..PATCHES {
                d_a.row_mut(b * PATCHES + p).assign(&mean_part);
            }
            for f in 0..PATCH_FEATURES {
                d_a[[b * PATCHES + c.argmax[b * PATCH_FEATURES + f], f]] +=
                    d_pooled[[b, PATCH_FEATURES + f]];
            }
        }
        let d_z = relu_backward(&c.z, &d_a);
        Self {
            w_patch: c.patches.t().dot(&d_z),
            b_patch: col_sum(&d_z),
            w1,
            b1,
            w2,
            b2,
        }
    }

    /// Unit-norm embedding of one square raster of any size.
    pub fn encode_image(&self, raster: &GrayImage) -> Result<Array1<f64>, ContrastiveError> {
        let v = resample(raster)?;
        let x = Array2::from_shape_vec((1, INPUT_LEN), v).expect("resample yields 64×64");
        Ok(self.encode(&x).row(0).to_owned())
    }
}

impl Params for VisionEncoderParams {
    fn tensors(&self) -> Vec<(&'static str, &Mat)> {
        vec![
            ("vision.w_patch", &self.w_patch),
            ("vision.b_patch", &self.b_patch),
            ("vision.w1", &self.w1),
            ("vision.b1", &self.b1),
            ("vision.w2", &self.w2),
            ("vision.b2", &self.b2),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Mat> {
        vec![
            &mut self.w_patch,
            &mut self.b_patch,
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use planegen_core::seed::rng;

    #[test]
    fn blank_input_still_unit() {
        let enc = VisionEncoderParams::init(&mut rng(1));
        let img = GrayImage {
            size: 224,
            data: vec![0.0; 224 * 224],
        };
        let e = enc.encode_image(&img).unwrap();
        assert!((e.dot(&e).sqrt() - 1.0).abs() < 1e-9);
        assert_eq!(enc.encode_image(&img).unwrap(), e);
    }

    #[test]
    fn patches_tile_the_image() {
        let x = Array2::from_shape_fn((1, INPUT_LEN), |(_, i)| i as f64);
        let p = to_patches(&x);
        assert_eq!(p[[0, 0]], 0.0);
        assert_eq!(p[[0, 9]], 65.0);
        assert_eq!(p[[1, 0]], 8.0);
        assert_eq!(p[[GRID, 0]], (8 * 64) as f64);
        let mut seen: Vec<f64> = p.iter().copied().collect();
        seen.sort_by(f64::total_cmp);
        assert!(seen.iter().enumerate().all(|(i, v)| *v == i as f64));
    }

    #[test]
    fn chunked_encoding_matches() {
        let enc = VisionEncoderParams::init(&mut rng(2));
        let mut r = rng(3);
        let x = Array2::from_shape_fn((300, INPUT_LEN), |_| r.gen_range(0.0..1.0));
        let a = enc.encode(&x);
        let b = enc.encode_all(&x);
        assert!((a - b).iter().all(|d| d.abs() < 1e-12));
    }
}
