//! Contrastive objectives on embedding matrices.
//!
//! `clip_loss` is the image-to-text form: each query row is scored against
//! every key row of the batch and the matching key is the target. The
//! symmetric variant averages it with the key-to-query direction.
//! `clip_da_loss` adds, per target domain, a diagram-caption term and a
//! diagram-diagram term whose keys are the style-transferred renderings.

use ndarray::Array2;

use crate::nn::Mat;
use crate::ContrastiveError;

#[derive(Clone, Debug)]
pub struct ClipGrad {
    pub loss: f64,
    pub d_query: Mat,
    pub d_key: Mat,
}

/// Mean cross-entropy of row-softmax(sim / tau) against the diagonal, and
/// its gradient with respect to `sim`.
fn row_ce(sim: &Mat, tau: f64) -> (f64, Mat) {
    let n = sim.nrows();
    let mut d = Array2::zeros((n, n));
    let mut loss = 0.0;
    for i in 0..n {
        // Work with margins to the target so that a confident row keeps
        // full precision: loss_i = ln(1 + sum_{j != i} exp(margin_j)).
        let margin: Vec<f64> = sim
            .row(i)
            .iter()
            .map(|&v| (v - sim[[i, i]]) / tau)
            .collect();
        let m = margin.iter().fold(0.0f64, |a, &v| a.max(v));
        let li = if m == 0.0 {
            let rest: f64 = margin
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v.exp())
                .sum();
            rest.ln_1p()
        } else {
            m + margin.iter().map(|&v| (v - m).exp()).sum::<f64>().ln()
        };
        loss += li;
        for j in 0..n {
            d[[i, j]] = (margin[j] - li).exp() / (tau * n as f64);
        }
        d[[i, i]] -= 1.0 / (tau * n as f64);
    }
    (loss / n as f64, d)
}

/// Loss and gradient w.r.t. a square similarity matrix.
pub fn clip_loss_from_sim(
    sim: &Mat,
    tau: f64,
    symmetric: bool,
) -> Result<(f64, Mat), ContrastiveError> {
    let n = sim.nrows();
    if n < 2 || sim.ncols() != n {
        return Err(ContrastiveError::DegenerateBatch { n });
    }
    if !(tau > 0.0) {
        return Err(ContrastiveError::InvalidConfig(format!(
            "temperature {tau} must be positive"
        )));
    }
    let (l, d) = row_ce(sim, tau);
    if !symmetric {
        return Ok((l, d));
    }
    let st = sim.t().to_owned();
    let (lt, dt) = row_ce(&st, tau);
    Ok(((l + lt) / 2.0, (d + dt.t()) / 2.0))
}

/// Contrastive loss of queries against keys (row i matches row i).
pub fn clip_loss(
    query: &Mat,
    key: &Mat,
    tau: f64,
    symmetric: bool,
) -> Result<ClipGrad, ContrastiveError> {
    if query.dim() != key.dim() {
        return Err(ContrastiveError::ShapeMismatch {
            expected: query.len(),
            got: key.len(),
        });
    }
    let sim = query.dot(&key.t());
    let (loss, ds) = clip_loss_from_sim(&sim, tau, symmetric)?;
    Ok(ClipGrad {
        loss,
        d_query: ds.dot(key),
        d_key: ds.t().dot(query),
    })
}

/// Embeddings of one simulated target domain. `diagram` rows are target
/// renderings; `caption` rows embed their (filtered) captions; `transferred`
/// rows are the same diagrams re-rendered in the source style.
#[derive(Clone, Copy, Debug)]
pub struct DomainEmbeds<'a> {
    pub diagram: &'a Mat,
    pub caption: &'a Mat,
    pub transferred: &'a Mat,
}

#[derive(Clone, Debug)]
pub struct DomainGrad {
    pub caption_term: f64,
    pub diagram_term: f64,
    pub d_diagram: Mat,
    pub d_caption: Mat,
    pub d_transferred: Mat,
}

#[derive(Clone, Debug)]
pub struct DaGrad {
    pub loss: f64,
    pub source_term: f64,
    pub d_source_image: Mat,
    pub d_source_caption: Mat,
    pub domains: Vec<DomainGrad>,
}

/// Source diagram-caption term plus, for every target domain, a
/// diagram-caption term and a diagram-diagram term (vision encoder on both
/// sides).
pub fn clip_da_loss(
    source_image: &Mat,
    source_caption: &Mat,
    domains: &[DomainEmbeds<'_>],
    tau: f64,
    symmetric: bool,
) -> Result<DaGrad, ContrastiveError> {
    let src = clip_loss(source_image, source_caption, tau, symmetric)?;
    let mut loss = src.loss;
    let mut out = Vec::with_capacity(domains.len());
    for d in domains {
        let cap = clip_loss(d.diagram, d.caption, tau, symmetric)?;
        let dia = clip_loss(d.diagram, d.transferred, tau, symmetric)?;
        loss += cap.loss + dia.loss;
        out.push(DomainGrad {
            caption_term: cap.loss,
            diagram_term: dia.loss,
            d_diagram: cap.d_query + dia.d_query,
            d_caption: cap.d_key,
            d_transferred: dia.d_key,
        });
    }
    Ok(DaGrad {
        loss,
        source_term: src.loss,
        d_source_image: src.d_query,
        d_source_caption: src.d_key,
        domains: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn uniform_is_log_n() {
        for n in [2usize, 8, 64] {
            let e = Array2::from_shape_fn((n, 4), |(_, j)| if j == 0 { 1.0 } else { 0.0 });
            let g = clip_loss(&e, &e, 0.07, false).unwrap();
            assert!((g.loss - (n as f64).ln()).abs() <= 1e-12);
        }
    }

    #[test]
    fn two_by_two_hand_value() {
        let sim = array![[10.0, -10.0], [-10.0, 10.0]];
        let (l, _) = clip_loss_from_sim(&sim, 1.0, false).unwrap();
        // -ln sigmoid(20) = ln(1 + x) with x = e^-20; two series terms are exact here.
        let x = (-20f64).exp();
        let want = x - x * x / 2.0;
        assert!((l - want).abs() <= 1e-15 * want);
        assert!((l - 2.06e-9).abs() < 1e-11);
    }

    #[test]
    fn degenerate() {
        let e = Array2::<f64>::zeros((1, 3));
        assert!(matches!(
            clip_loss(&e, &e, 0.1, false),
            Err(ContrastiveError::DegenerateBatch { n: 1 })
        ));
    }

    #[test]
    fn no_domains_is_plain_clip() {
        let q = array![[1.0, 0.0], [0.6, 0.8], [0.0, 1.0]];
        let k = array![[0.8, 0.6], [0.0, 1.0], [1.0, 0.0]];
        let a = clip_loss(&q, &k, 0.5, false).unwrap();
        let b = clip_da_loss(&q, &k, &[], 0.5, false).unwrap();
        assert_eq!(a.loss, b.loss);
        assert_eq!(a.d_query, b.d_source_image);
    }
}
