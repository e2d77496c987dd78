//! Reading generated datasets back: JSONL manifests and rasters.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use planegen_contrastive::input::batch;
use planegen_contrastive::nn::Mat;
use planegen_contrastive::{read_checkpoint, write_checkpoint, DomainSet, Model, PairSet};
use planegen_core::benchmark::{manifest_path, ManifestLine, Split, TaskKind};
use planegen_core::pairs::{PairLine, StylePairLine};
use planegen_core::render::{decode_pgm, decode_png, DomainTag, GrayImage};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CliError;

pub const PAIRS_FILE: &str = "pairs.jsonl";
pub const STYLE_PAIRS_FILE: &str = "style_pairs.jsonl";
pub const CHECKPOINT_FILE: &str = "model.ckpt";

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path.display(), e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path.display(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line)
            .map_err(|e| CliError::Usage(format!("{}:{}: {e}", path.display(), n + 1)))?;
        out.push(v);
    }
    Ok(out)
}

/// Buffered JSONL sink, one serialized object per line.
pub struct JsonlWriter {
    path: PathBuf,
    w: BufWriter<File>,
}

impl JsonlWriter {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let f = File::create(path).map_err(|e| CliError::io(path.display(), e))?;
        Ok(Self {
            path: path.to_path_buf(),
            w: BufWriter::new(f),
        })
    }

    pub fn push<T: Serialize>(&mut self, v: &T) -> Result<(), CliError> {
        let s = serde_json::to_string(v)?;
        writeln!(self.w, "{s}").map_err(|e| CliError::io(self.path.display(), e))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.w
            .flush()
            .map_err(|e| CliError::io(self.path.display(), e))
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path.display(), e))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path.display(), e))
}

pub fn load_image(path: &Path) -> Result<GrayImage, CliError> {
    let f = BufReader::new(File::open(path).map_err(|e| CliError::io(path.display(), e))?);
    let img = match path.extension().and_then(|e| e.to_str()) {
        Some("png") => decode_png(f),
        _ => decode_pgm(f),
    };
    img.map_err(|e| CliError::io(path.display(), e))
}

/// Loads images relative to `root` and stacks them as encoder input.
pub fn load_batch(root: &Path, rel: &[&str]) -> Result<Mat, CliError> {
    let imgs: Vec<GrayImage> = rel
        .par_iter()
        .map(|r| load_image(&root.join(r)))
        .collect::<Result<_, _>>()?;
    Ok(batch(&imgs)?)
}

pub fn load_pairs(dir: &Path) -> Result<(Vec<PairLine>, PairSet), CliError> {
    let lines: Vec<PairLine> = read_jsonl(&dir.join(PAIRS_FILE))?;
    let imgs = load_batch(
        dir,
        &lines.iter().map(|l| l.image.as_str()).collect::<Vec<_>>(),
    )?;
    let caps: Vec<String> = lines.iter().map(|l| l.caption.clone()).collect();
    Ok((lines, PairSet::new(imgs, &caps)))
}

pub fn style_lines(dir: &Path) -> Result<Vec<StylePairLine>, CliError> {
    read_jsonl(&dir.join(STYLE_PAIRS_FILE))
}

pub fn domain_set(dir: &Path, lines: &[&StylePairLine]) -> Result<DomainSet, CliError> {
    let target = load_batch(
        dir,
        &lines
            .iter()
            .map(|l| l.target_image.as_str())
            .collect::<Vec<_>>(),
    )?;
    let source = load_batch(
        dir,
        &lines
            .iter()
            .map(|l| l.source_image.as_str())
            .collect::<Vec<_>>(),
    )?;
    let caps: Vec<String> = lines.iter().map(|l| l.caption.clone()).collect();
    Ok(DomainSet::new(target, source, &caps))
}

/// The first `shots` lines of every target domain present, in domain order.
pub fn load_shots(dir: &Path, shots: usize) -> Result<Vec<(DomainTag, DomainSet)>, CliError> {
    let lines = style_lines(dir)?;
    let mut out = Vec::new();
    for d in DomainTag::ALL {
        let mine: Vec<&StylePairLine> = lines
            .iter()
            .filter(|l| l.domain == d.name())
            .take(shots)
            .collect();
        if mine.is_empty() {
            continue;
        }
        if mine.len() < shots {
            return Err(CliError::Usage(format!(
                "{}: domain {} has {} pairs, fewer than --da-shots {shots}",
                dir.display(),
                d.name(),
                mine.len()
            )));
        }
        out.push((d, domain_set(dir, &mine)?));
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no target-domain pairs",
            dir.display()
        )));
    }
    Ok(out)
}

/// Labelled split of a benchmark task as encoder input.
pub fn load_split(
    bench: &Path,
    split: Split,
    task: TaskKind,
) -> Result<(Mat, Vec<usize>), CliError> {
    let lines: Vec<ManifestLine> = read_jsonl(&manifest_path(bench, split, task))?;
    let x = load_batch(
        bench,
        &lines.iter().map(|l| l.image.as_str()).collect::<Vec<_>>(),
    )?;
    Ok((x, lines.iter().map(|l| l.label).collect()))
}

/// Accepts a checkpoint file or a directory containing `model.ckpt`.
pub fn checkpoint_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(CHECKPOINT_FILE)
    } else {
        p.to_path_buf()
    }
}

pub fn load_model(p: &Path) -> Result<(Model, f64), CliError> {
    let path = checkpoint_path(p);
    let f = File::open(&path).map_err(|e| CliError::io(path.display(), e))?;
    Ok(read_checkpoint(BufReader::new(f))?)
}

pub fn save_model(dir: &Path, m: &Model, temperature: f64) -> Result<PathBuf, CliError> {
    create_dir(dir)?;
    let path = dir.join(CHECKPOINT_FILE);
    let f = File::create(&path).map_err(|e| CliError::io(path.display(), e))?;
    let mut w = BufWriter::new(f);
    write_checkpoint(m, temperature, &mut w)?;
    w.flush().map_err(|e| CliError::io(path.display(), e))?;
    Ok(path)
}
