//! Text encoder: hashed token embeddings, mean-pooled, then a linear head
//! and L2 normalisation. Captions come from a closed template set, so a
//! hash table is enough; numbers are split into place-tagged digits.

use ndarray::Array2;
use planegen_core::seed::fnv1a64;
use rand::Rng;

use crate::nn::{col_sum, glorot, normalize_rows, normalize_rows_backward, uniform, Mat, Params};
use crate::vision::EMBED_DIM;

pub const BUCKETS: usize = 1024;
pub const TOKEN_DIM: usize = 64;
const CLS: &str = "<cls>";

/// Lower-cased word tokens. Point names ("AB") become one token per
/// letter; numbers become digits tagged with their place value, so
/// "1.25" yields `1@0 2@-1 5@-2`.
pub fn tokenize(caption: &str) -> Vec<String> {
    let mut out = vec![CLS.to_string()];
    for raw in caption.split_whitespace() {
        let w = raw.trim_end_matches([',', '.']);
        if w.is_empty() {
            continue;
        }
        if w.chars().next().is_some_and(|c| c.is_ascii_digit()) {
            let (int, frac) = w.split_once('.').unwrap_or((w, ""));
            let n = int.len() as i32;
            for (k, d) in int.chars().enumerate() {
                out.push(format!("{d}@{}", n - 1 - k as i32));
            }
            for (k, d) in frac.chars().enumerate() {
                out.push(format!("{d}@-{}", k + 1));
            }
        } else if w.len() > 1 && w.chars().all(|c| c.is_ascii_uppercase()) {
            out.extend(w.chars().map(|c| c.to_ascii_lowercase().to_string()));
        } else {
            out.push(w.to_lowercase());
        }
    }
    out
}

pub fn bucket(token: &str) -> usize {
    (fnv1a64(token.as_bytes()) % BUCKETS as u64) as usize
}

pub fn token_ids(caption: &str) -> Vec<usize> {
    tokenize(caption).iter().map(|t| bucket(t)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TextEncoderParams {
    pub table: Mat,
    pub w: Mat,
    pub b: Mat,
}

pub struct TextCache {
    ids: Vec<Vec<usize>>,
    pooled: Mat,
    y: Mat,
    norms: Vec<f64>,
}

impl TextCache {
    pub fn embeddings(&self) -> &Mat {
        &self.y
    }
}

impl TextEncoderParams {
    pub fn init<R: Rng>(r: &mut R) -> Self {
        Self {
            table: glorot(BUCKETS, TOKEN_DIM, r),
            w: glorot(TOKEN_DIM, EMBED_DIM, r),
            b: uniform(1, EMBED_DIM, 0.05, r),
        }
    }

    pub fn forward(&self, ids: &[Vec<usize>]) -> TextCache {
        let mut pooled = Array2::zeros((ids.len(), TOKEN_DIM));
        for (mut row, toks) in pooled.rows_mut().into_iter().zip(ids) {
            for &t in toks {
                row += &self.table.row(t);
            }
            if !toks.is_empty() {
                row /= toks.len() as f64;
            }
        }
        let o = pooled.dot(&self.w) + &self.b;
        let (y, norms) = normalize_rows(&o);
        TextCache {
            ids: ids.to_vec(),
            pooled,
            y,
            norms,
        }
    }

    pub fn encode(&self, ids: &[Vec<usize>]) -> Mat {
        self.forward(ids).y
    }

    pub fn encode_captions(&self, captions: &[String]) -> Mat {
        let ids: Vec<Vec<usize>> = captions.iter().map(|c| token_ids(c)).collect();
        self.encode(&ids)
    }

    pub fn backward(&self, c: &TextCache, dy: &Mat) -> Self {
        let d_o = normalize_rows_backward(&c.y, &c.norms, dy);
        let d_pooled = d_o.dot(&self.w.t());
        let mut table = Array2::zeros((BUCKETS, TOKEN_DIM));
        for (i, toks) in c.ids.iter().enumerate() {
            if toks.is_empty() {
                continue;
            }
            let g = &d_pooled.row(i) / toks.len() as f64;
            for &t in toks {
                let mut row = table.row_mut(t);
                row += &g;
            }
        }
        Self {
            table,
            w: c.pooled.t().dot(&d_o),
            b: col_sum(&d_o),
        }
    }
}

impl Params for TextEncoderParams {
    fn tensors(&self) -> Vec<(&'static str, &Mat)> {
        vec![
            ("text.table", &self.table),
            ("text.w", &self.w),
            ("text.b", &self.b),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Mat> {
        vec![&mut self.table, &mut self.w, &mut self.b]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use planegen_core::seed::rng;

    #[test]
    fn tokens() {
        assert_eq!(
            tokenize("AB is perpendicular to BC. Angle ABC measures 60 degrees."),
            [
                "<cls>",
                "a",
                "b",
                "is",
                "perpendicular",
                "to",
                "b",
                "c",
                "angle",
                "a",
                "b",
                "c",
                "measures",
                "6@1",
                "0@0",
                "degrees"
            ]
        );
        assert_eq!(
            tokenize("Segment AB has length 1.25."),
            ["<cls>", "segment", "a", "b", "has", "length", "1@0", "2@-1", "5@-2"]
        );
        assert_eq!(tokenize(""), ["<cls>"]);
    }

    #[test]
    fn unit_norm_and_deterministic() {
        let enc = TextEncoderParams::init(&mut rng(4));
        let caps = vec![
            "Points A, B, C and D lie on the same circle.".to_string(),
            String::new(),
        ];
        let e = enc.encode_captions(&caps);
        for r in e.rows() {
            assert!((r.dot(&r).sqrt() - 1.0).abs() < 1e-12);
        }
        assert_eq!(enc.encode_captions(&caps), e);
    }
}
