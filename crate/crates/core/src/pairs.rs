//! Diagram-caption pairs for contrastive training, and cross-style pairs
//! (one solved diagram drawn in a target style and in the synthetic style).

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::serialize_problem;
use crate::premises::{
    caption_from_premises, derive_premises, filter_premises, premise_hash, Caption,
};
use crate::render::{make_style_pair_for, render_svg, sample_style, DiagramImage, DomainTag};
use crate::seed::{mix, mix3, rng};
use crate::synth::{sample_problem, solve_diagram, SamplerConfig};

/// Resample budget per pair.
pub const PAIR_RESAMPLES: u64 = 50;
/// Clause counts drawn uniformly for pair problems.
pub const PAIR_CLAUSES: std::ops::RangeInclusive<usize> = 1..=5;

const PAIR_STREAM: u64 = 0x70;
const STYLE_STREAM: u64 = 0x71;

#[derive(Debug, Error, PartialEq)]
#[error("no captionable diagram within {PAIR_RESAMPLES} resamples (seed {seed})")]
pub struct PairExhausted {
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct CaptionedPair {
    pub seed: u64,
    pub problem_text: String,
    pub caption: Caption,
    pub image: DiagramImage,
}

#[derive(Clone, Debug)]
pub struct StylePair {
    pub domain: DomainTag,
    pub seed: u64,
    pub problem_text: String,
    pub caption: Caption,
    pub target: DiagramImage,
    pub source: DiagramImage,
}

/// One manifest line of `pairs.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairLine {
    pub index: usize,
    pub image: String,
    pub caption: String,
    pub premise_hash: String,
    pub problem: String,
    pub seed: u64,
}

/// One manifest line of a style-pair set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StylePairLine {
    pub index: usize,
    pub domain: String,
    pub target_image: String,
    pub source_image: String,
    pub caption: String,
    pub premise_hash: String,
    pub problem: String,
    pub seed: u64,
}

fn problem_for(s: u64) -> crate::lang::Problem {
    let n = rng(s).gen_range(PAIR_CLAUSES);
    sample_problem(&SamplerConfig::full(n, s))
}

/// Pair `index` of a dataset: a random problem with a non-empty caption,
/// drawn in the synthetic style.
pub fn generate_pair(dataset_seed: u64, index: usize) -> Result<CaptionedPair, PairExhausted> {
    let base = mix3(dataset_seed, PAIR_STREAM, index as u64);
    for attempt in 0..PAIR_RESAMPLES {
        let s = mix(base, attempt);
        let p = problem_for(s);
        let Ok(d) = solve_diagram(&p, s) else {
            continue;
        };
        let kept = filter_premises(&derive_premises(&d, &p));
        if kept.is_empty() {
            continue;
        }
        let caption = caption_from_premises(&kept).expect("filtered premises always caption");
        let image = render_svg(&d, &kept, &sample_style(DomainTag::Synthetic, s));
        return Ok(CaptionedPair {
            seed: s,
            problem_text: serialize_problem(&p),
            caption,
            image,
        });
    }
    Err(PairExhausted { seed: base })
}

/// Style pair `index` for a target domain. Streams differ per domain so
/// the two target sets hold different diagrams.
pub fn generate_style_pair(
    domain: DomainTag,
    dataset_seed: u64,
    index: usize,
) -> Result<StylePair, PairExhausted> {
    let base = mix3(mix(dataset_seed, STYLE_STREAM), domain as u64, index as u64);
    for attempt in 0..PAIR_RESAMPLES {
        let s = mix(base, attempt);
        let p = problem_for(s);
        let Ok((target, source, caption)) = make_style_pair_for(domain, &p, s) else {
            continue;
        };
        if caption.is_empty() {
            continue;
        }
        return Ok(StylePair {
            domain,
            seed: s,
            problem_text: serialize_problem(&p),
            caption,
            target,
            source,
        });
    }
    Err(PairExhausted { seed: base })
}

impl CaptionedPair {
    pub fn line(&self, index: usize, image: String) -> PairLine {
        PairLine {
            index,
            image,
            caption: self.caption.text(),
            premise_hash: self.image.source_premises.clone(),
            problem: self.problem_text.clone(),
            seed: self.seed,
        }
    }
}

impl StylePair {
    pub fn line(&self, index: usize, target_image: String, source_image: String) -> StylePairLine {
        StylePairLine {
            index,
            domain: self.domain.name().to_string(),
            target_image,
            source_image,
            caption: self.caption.text(),
            premise_hash: self.target.source_premises.clone(),
            problem: self.problem_text.clone(),
            seed: self.seed,
        }
    }
}

/// Hash check used when reloading: the caption's premises and the image's
/// recorded hash must agree.
pub fn pair_hash_matches(pair: &CaptionedPair) -> bool {
    let p = crate::lang::parse_problem(&pair.problem_text).expect("stored problems parse");
    solve_diagram(&p, pair.seed)
        .map(|d| {
            premise_hash(&filter_premises(&derive_premises(&d, &p))) == pair.image.source_premises
        })
        .unwrap_or(false)
}
