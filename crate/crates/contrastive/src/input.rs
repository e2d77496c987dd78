//! Raster preparation: every image is area-resampled to 64×64 before it
//! reaches the vision encoder.

use ndarray::Array2;
use planegen_core::render::GrayImage;

use crate::ContrastiveError;

pub const INPUT_SIZE: usize = 64;
pub const INPUT_LEN: usize = INPUT_SIZE * INPUT_SIZE;

/// Overlap weights of each output cell with each input pixel along one axis.
fn area_weights(n_in: usize, n_out: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|o| {
            let (lo, hi) = (o as f64 * scale, (o + 1) as f64 * scale);
            let mut w = Vec::new();
            let mut i = lo.floor() as usize;
            while (i as f64) < hi && i < n_in {
                let overlap = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
                if overlap > 0.0 {
                    w.push((i, overlap / scale));
                }
                i += 1;
            }
            w
        })
        .collect()
}

/// Area-averages a square raster down (or up) to 64×64, row-major.
pub fn resample(img: &GrayImage) -> Result<Vec<f64>, ContrastiveError> {
    let n = img.size as usize;
    if n == 0 || img.data.len() != n * n {
        return Err(ContrastiveError::ShapeMismatch {
            expected: n * n,
            got: img.data.len(),
        });
    }
    let w = area_weights(n, INPUT_SIZE);
    // Rows first, then columns.
    let mut tmp = vec![0.0; INPUT_SIZE * n];
    for (oy, wy) in w.iter().enumerate() {
        for &(iy, a) in wy {
            let src = &img.data[iy * n..(iy + 1) * n];
            let dst = &mut tmp[oy * n..(oy + 1) * n];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * f64::from(*s);
            }
        }
    }
    let mut out = vec![0.0; INPUT_LEN];
    for oy in 0..INPUT_SIZE {
        for (ox, wx) in w.iter().enumerate() {
            out[oy * INPUT_SIZE + ox] = wx.iter().map(|&(ix, a)| a * tmp[oy * n + ix]).sum();
        }
    }
    Ok(out)
}

/// Stacks resampled rasters into an N×4096 matrix.
pub fn batch(images: &[GrayImage]) -> Result<Array2<f64>, ContrastiveError> {
    let mut m = Array2::zeros((images.len(), INPUT_LEN));
    for (mut row, img) in m.rows_mut().into_iter().zip(images) {
        row.assign(&ndarray::ArrayView1::from(&resample(img)?));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_mean_is_preserved() {
        for size in [224u32, 336, 512, 64, 100] {
            let n = size as usize;
            let data: Vec<f32> = (0..n * n)
                .map(|i| ((i * 37) % 101) as f32 / 100.0)
                .collect();
            let mean_in: f64 = data.iter().map(|&v| f64::from(v)).sum::<f64>() / (n * n) as f64;
            let out = resample(&GrayImage { size, data }).unwrap();
            let mean_out: f64 = out.iter().sum::<f64>() / INPUT_LEN as f64;
            assert!((mean_in - mean_out).abs() < 1e-9, "{size}");
        }
    }

    #[test]
    fn constant_stays_constant() {
        let out = resample(&GrayImage {
            size: 336,
            data: vec![0.5; 336 * 336],
        })
        .unwrap();
        assert!(out.iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn bad_shape() {
        let img = GrayImage {
            size: 4,
            data: vec![0.0; 15],
        };
        assert!(matches!(
            resample(&img),
            Err(ContrastiveError::ShapeMismatch { .. })
        ));
    }
}
