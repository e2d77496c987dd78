//! Mini-batch contrastive training with Adam and a warmup + cosine
//! schedule. With no target domains the step objective is the plain
//! diagram-caption loss; with domains it is the adaptation objective.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::input::INPUT_LEN;
use crate::loss::{clip_da_loss, DomainEmbeds};
use crate::nn::{add_rows, rows, vstack, Mat, Params};
use crate::optim::{warmup_cosine, Adam};
use crate::text::{token_ids, TextEncoderParams};
use crate::vision::VisionEncoderParams;
use crate::ContrastiveError;
use planegen_core::seed::{mix, mix3, rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContrastiveConfig {
    pub temperature: f64,
    pub batch_size: usize,
    /// Batch size of each target-domain term.
    pub da_batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Average the image-to-text loss with the text-to-image one.
    pub symmetric: bool,
    pub weight_decay: f64,
    /// Warmup length as a fraction of all steps.
    pub warmup_fraction: f64,
}

impl Default for ContrastiveConfig {
    fn default() -> Self {
        Self {
            temperature: 0.07,
            batch_size: 256,
            da_batch_size: 32,
            learning_rate: 1e-3,
            epochs: 50,
            seed: 0,
            symmetric: false,
            weight_decay: 0.0,
            warmup_fraction: 0.02,
        }
    }
}

impl ContrastiveConfig {
    pub fn validate(&self) -> Result<(), ContrastiveError> {
        if !(self.temperature > 0.0) {
            return Err(ContrastiveError::InvalidConfig(
                "temperature must be positive".into(),
            ));
        }
        if self.batch_size < 2 || self.da_batch_size < 2 {
            return Err(ContrastiveError::InvalidConfig(
                "batch sizes must be at least 2".into(),
            ));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(ContrastiveError::InvalidConfig(
                "learning rate must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub vision: VisionEncoderParams,
    pub text: TextEncoderParams,
}

impl Model {
    pub fn init(seed: u64) -> Self {
        let mut r = rng(seed);
        let vision = VisionEncoderParams::init(&mut r);
        let text = TextEncoderParams::init(&mut r);
        Self { vision, text }
    }
}

impl Params for Model {
    fn tensors(&self) -> Vec<(&'static str, &Mat)> {
        let mut v = self.vision.tensors();
        v.extend(self.text.tensors());
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut Mat> {
        let mut v = self.vision.tensors_mut();
        v.extend(self.text.tensors_mut());
        v
    }
}

/// Diagram-caption pairs: N×4096 prepared images and caption token ids.
#[derive(Clone, Debug)]
pub struct PairSet {
    pub images: Mat,
    pub tokens: Vec<Vec<usize>>,
}

impl PairSet {
    pub fn new(images: Mat, captions: &[String]) -> Self {
        assert_eq!(images.nrows(), captions.len());
        assert_eq!(images.ncols(), INPUT_LEN);
        Self {
            images,
            tokens: captions.iter().map(|c| token_ids(c)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn select(&self, idx: &[usize]) -> (Mat, Vec<Vec<usize>>) {
        (
            self.images.select(Axis(0), idx),
            idx.iter().map(|&i| self.tokens[i].clone()).collect(),
        )
    }
}

/// Few-shot pairs of one target domain: target renderings, the same
/// diagrams in the source style, and their captions.
#[derive(Clone, Debug)]
pub struct DomainSet {
    pub target: Mat,
    pub transferred: Mat,
    pub tokens: Vec<Vec<usize>>,
}

impl DomainSet {
    pub fn new(target: Mat, transferred: Mat, captions: &[String]) -> Self {
        assert_eq!(target.nrows(), captions.len());
        assert_eq!(transferred.dim(), target.dim());
        Self {
            target,
            transferred,
            tokens: captions.iter().map(|c| token_ids(c)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct DomainBatch {
    pub target: Mat,
    pub transferred: Mat,
    pub tokens: Vec<Vec<usize>>,
}

impl DomainBatch {
    pub fn from_set(set: &DomainSet, idx: &[usize]) -> Self {
        Self {
            target: set.target.select(Axis(0), idx),
            transferred: set.transferred.select(Axis(0), idx),
            tokens: idx.iter().map(|&i| set.tokens[i].clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepLoss {
    pub loss: f64,
    pub source_term: f64,
    pub domain_terms: Vec<(f64, f64)>,
}

/// Loss of one step and the gradients of every weight. All images go
/// through the vision encoder in one stacked pass, all captions through
/// the text encoder in another.
pub fn objective(
    model: &Model,
    src_images: &Mat,
    src_tokens: &[Vec<usize>],
    domains: &[DomainBatch],
    tau: f64,
    symmetric: bool,
) -> Result<(StepLoss, Model), ContrastiveError> {
    let ns = src_images.nrows();
    let mut img_parts = vec![src_images];
    let mut toks: Vec<Vec<usize>> = src_tokens.to_vec();
    for d in domains {
        img_parts.push(&d.target);
        img_parts.push(&d.transferred);
        toks.extend(d.tokens.iter().cloned());
    }
    let stacked = vstack(&img_parts);
    let vc = model.vision.forward(&stacked);
    let tc = model.text.forward(&toks);
    let (gy, ty) = (vc.embeddings(), tc.embeddings());

    let src_img = rows(gy, 0, ns);
    let src_txt = rows(ty, 0, ns);
    let mut owned = Vec::with_capacity(domains.len());
    let (mut vo, mut to) = (ns, ns);
    for d in domains {
        let nd = d.target.nrows();
        owned.push((
            rows(gy, vo, vo + nd),
            rows(ty, to, to + nd),
            rows(gy, vo + nd, vo + 2 * nd),
        ));
        vo += 2 * nd;
        to += nd;
    }
    let embeds: Vec<DomainEmbeds<'_>> = owned
        .iter()
        .map(|(diagram, caption, transferred)| DomainEmbeds {
            diagram,
            caption,
            transferred,
        })
        .collect();
    let g = clip_da_loss(&src_img, &src_txt, &embeds, tau, symmetric)?;

    let mut d_img = Array2::zeros(gy.dim());
    let mut d_txt = Array2::zeros(ty.dim());
    add_rows(&mut d_img, 0, &g.d_source_image);
    add_rows(&mut d_txt, 0, &g.d_source_caption);
    let (mut vo, mut to) = (ns, ns);
    for (d, dg) in domains.iter().zip(&g.domains) {
        let nd = d.target.nrows();
        add_rows(&mut d_img, vo, &dg.d_diagram);
        add_rows(&mut d_img, vo + nd, &dg.d_transferred);
        add_rows(&mut d_txt, to, &dg.d_caption);
        vo += 2 * nd;
        to += nd;
    }
    let grads = Model {
        vision: model.vision.backward(&vc, &d_img),
        text: model.text.backward(&tc, &d_txt),
    };
    let step = StepLoss {
        loss: g.loss,
        source_term: g.source_term,
        domain_terms: g
            .domains
            .iter()
            .map(|d| (d.caption_term, d.diagram_term))
            .collect(),
    };
    Ok((step, grads))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub steps: Vec<StepRecord>,
    /// Mean step loss of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Objective over fixed, unshuffled batches before and after training.
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Distinct target pairs seen per domain.
    pub target_pairs_used: Vec<usize>,
}

/// Source batches of one epoch: consecutive chunks of `order`, dropping a
/// final chunk smaller than two.
fn batches(order: &[usize], size: usize) -> Vec<&[usize]> {
    let mut out: Vec<&[usize]> = order.chunks(size).collect();
    if out.len() > 1 && out.last().is_some_and(|b| b.len() < 2) {
        out.pop();
    }
    out
}

/// Cycles through a domain's shots, reshuffling on every pass.
struct ShotStream {
    n: usize,
    seed: u64,
    pass: u64,
    order: Vec<usize>,
    pos: usize,
    shuffle: bool,
}

impl ShotStream {
    fn new(n: usize, seed: u64, shuffle: bool) -> Self {
        let mut s = Self {
            n,
            seed,
            pass: 0,
            order: Vec::new(),
            pos: 0,
            shuffle,
        };
        s.refill();
        s
    }

    fn refill(&mut self) {
        self.order = (0..self.n).collect();
        if self.shuffle {
            self.order.shuffle(&mut rng(mix(self.seed, self.pass)));
        }
        self.pass += 1;
        self.pos = 0;
    }

    /// Next `k` distinct shots (all of them if fewer than `k`).
    fn take(&mut self, k: usize) -> Vec<usize> {
        let k = k.min(self.n);
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            if self.pos == self.n {
                self.refill();
            }
            let i = self.order[self.pos];
            self.pos += 1;
            if !out.contains(&i) {
                out.push(i);
            }
        }
        out
    }
}

fn domain_batches(streams: &mut [ShotStream], sets: &[DomainSet], k: usize) -> Vec<DomainBatch> {
    streams
        .iter_mut()
        .zip(sets)
        .map(|(s, set)| DomainBatch::from_set(set, &s.take(k)))
        .collect()
}

/// Mean objective over fixed batches in dataset order.
pub fn evaluate(
    model: &Model,
    data: &PairSet,
    domains: &[DomainSet],
    cfg: &ContrastiveConfig,
) -> Result<f64, ContrastiveError> {
    let order: Vec<usize> = (0..data.len()).collect();
    let mut streams: Vec<ShotStream> = domains
        .iter()
        .map(|d| ShotStream::new(d.len(), 0, false))
        .collect();
    let bs = batches(&order, cfg.batch_size);
    let mut total = 0.0;
    for b in &bs {
        let (x, t) = data.select(b);
        let db = domain_batches(&mut streams, domains, cfg.da_batch_size);
        total += objective(model, &x, &t, &db, cfg.temperature, cfg.symmetric)?
            .0
            .loss;
    }
    Ok(total / bs.len() as f64)
}

/// Trains `model` in place of a copy and returns it with the loss record.
/// Fails with `TrainingDiverged` when any loss is non-finite or, with a
/// positive learning rate, the final objective is not below the initial one.
pub fn train_contrastive(
    model: &Model,
    data: &PairSet,
    domains: &[DomainSet],
    cfg: &ContrastiveConfig,
) -> Result<(Model, TrainReport), ContrastiveError> {
    cfg.validate()?;
    if data.len() < 2 {
        return Err(ContrastiveError::DegenerateBatch { n: data.len() });
    }
    if let Some(d) = domains.iter().find(|d| d.len() < 2) {
        return Err(ContrastiveError::DegenerateBatch { n: d.len() });
    }
    let mut model = model.clone();
    let initial_loss = evaluate(&model, data, domains, cfg)?;
    let mut opt = Adam::new(&model, 0.9, 0.999, cfg.weight_decay);
    let per_epoch = batches(&(0..data.len()).collect::<Vec<_>>(), cfg.batch_size).len();
    let total = per_epoch * cfg.epochs;
    let warmup = ((total as f64 * cfg.warmup_fraction).ceil() as usize).max(1);
    let mut streams: Vec<ShotStream> = domains
        .iter()
        .enumerate()
        .map(|(j, d)| ShotStream::new(d.len(), mix3(cfg.seed, 0xda, j as u64), true))
        .collect();
    let mut used: Vec<Vec<bool>> = domains.iter().map(|d| vec![false; d.len()]).collect();
    let mut steps = Vec::with_capacity(total);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut step = 0;
    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut rng(mix(cfg.seed, epoch as u64)));
        let mut sum = 0.0;
        let bs = batches(&order, cfg.batch_size);
        for b in &bs {
            let (x, t) = data.select(b);
            let mut db = Vec::with_capacity(domains.len());
            for (j, (s, set)) in streams.iter_mut().zip(domains).enumerate() {
                let idx = s.take(cfg.da_batch_size);
                for &i in &idx {
                    used[j][i] = true;
                }
                db.push(DomainBatch::from_set(set, &idx));
            }
            let (l, g) = objective(&model, &x, &t, &db, cfg.temperature, cfg.symmetric)?;
            if !l.loss.is_finite() || !g.all_finite() {
                return Err(ContrastiveError::TrainingDiverged {
                    initial: initial_loss,
                    last: l.loss,
                });
            }
            let lr = warmup_cosine(step, total, warmup, cfg.learning_rate);
            opt.step(&mut model, &g, lr);
            steps.push(StepRecord { step, loss: l.loss });
            sum += l.loss;
            step += 1;
        }
        epoch_losses.push(sum / bs.len() as f64);
    }
    let final_loss = evaluate(&model, data, domains, cfg)?;
    let improved = final_loss < initial_loss;
    if !final_loss.is_finite()
        || !model.all_finite()
        || (cfg.learning_rate > 0.0 && cfg.epochs > 0 && !improved)
    {
        return Err(ContrastiveError::TrainingDiverged {
            initial: initial_loss,
            last: final_loss,
        });
    }
    Ok((
        model,
        TrainReport {
            steps,
            epoch_losses,
            initial_loss,
            final_loss,
            target_pairs_used: used
                .iter()
                .map(|u| u.iter().filter(|&&b| b).count())
                .collect(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn toy(n: usize, seed: u64) -> PairSet {
        let mut r = rng(seed);
        let images =
            Array2::from_shape_fn((n, INPUT_LEN), |_| if r.gen_bool(0.05) { 1.0 } else { 0.0 });
        let caps: Vec<String> = (0..n)
            .map(|i| format!("Angle ABC measures {} degrees.", 20 + i))
            .collect();
        PairSet::new(images, &caps)
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let data = toy(12, 1);
        let m = Model::init(2);
        let cfg = ContrastiveConfig {
            learning_rate: 0.0,
            epochs: 2,
            batch_size: 4,
            ..Default::default()
        };
        let (out, rep) = train_contrastive(&m, &data, &[], &cfg).unwrap();
        assert_eq!(out, m);
        assert_eq!(rep.initial_loss, rep.final_loss);
    }

    #[test]
    fn shot_stream_yields_distinct() {
        let mut s = ShotStream::new(5, 3, true);
        for _ in 0..10 {
            let t = s.take(3);
            assert_eq!(t.len(), 3);
            assert!(t
                .iter()
                .all(|&i| t.iter().filter(|&&j| j == i).count() == 1));
        }
        assert_eq!(s.take(9).len(), 5);
    }

    #[test]
    fn last_singleton_batch_dropped() {
        let o: Vec<usize> = (0..9).collect();
        assert_eq!(batches(&o, 4).len(), 2);
        assert_eq!(batches(&o, 3).len(), 3);
    }
}
