//! Mean rank and mean average precision with one relevant item per query.

use crate::nn::Mat;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Retrieval {
    pub mean_rank: f64,
    pub mean_ap: f64,
}

/// 1-based rank of gallery item `target` for a row of similarities. Ties
/// go to the lower gallery index.
pub fn rank_of(sims: &[f64], target: usize) -> usize {
    let s = sims[target];
    1 + sims
        .iter()
        .enumerate()
        .filter(|&(j, &v)| v > s || (v == s && j < target))
        .count()
}

/// Ranks the gallery by cosine similarity (rows are taken as given, so
/// pass unit vectors) and scores the match of each query.
pub fn retrieval_metrics(queries: &Mat, gallery: &Mat, matches: &[usize]) -> Retrieval {
    assert_eq!(queries.nrows(), matches.len());
    assert!(gallery.nrows() >= 2, "gallery needs at least two items");
    let sims = queries.dot(&gallery.t());
    let ranks: Vec<usize> = sims
        .rows()
        .into_iter()
        .zip(matches)
        .map(|(r, &m)| rank_of(r.as_slice().expect("standard layout"), m))
        .collect();
    from_ranks(&ranks)
}

pub fn from_ranks(ranks: &[usize]) -> Retrieval {
    let n = ranks.len() as f64;
    Retrieval {
        mean_rank: ranks.iter().map(|&r| r as f64).sum::<f64>() / n,
        mean_ap: ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn perfect_and_fourth() {
        let g = array![[1.0, 0.0], [0.0, 1.0]];
        let r = retrieval_metrics(&g, &g, &[0, 1]);
        assert_eq!((r.mean_rank, r.mean_ap), (1.0, 1.0));
        let sims: Vec<f64> = (0..100).map(|i| -(i as f64)).collect();
        assert_eq!(rank_of(&sims, 3), 4);
        assert_eq!(from_ranks(&[4]).mean_ap, 0.25);
    }

    #[test]
    fn ties_go_to_lower_index() {
        assert_eq!(rank_of(&[0.5, 0.5, 0.5], 2), 3);
        assert_eq!(rank_of(&[0.5, 0.5, 0.5], 0), 1);
    }
}
