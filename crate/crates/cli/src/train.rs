use serde::Serialize;

use planegen_contrastive::{train_contrastive, Model};

use crate::args::TrainMode;
use crate::config::{InitModelConfig, TrainConfig};
use crate::data::{load_model, load_pairs, load_shots, save_model, write_file, JsonlWriter};
use crate::error::CliError;

pub const LOSS_FILE: &str = "loss.jsonl";
pub const REPORT_FILE: &str = "report.json";

#[derive(Serialize)]
struct Report<'a> {
    mode: TrainMode,
    pairs: usize,
    domains: Vec<&'a str>,
    target_pairs_used: &'a [usize],
    initial_loss: f64,
    final_loss: f64,
    epoch_losses: &'a [f64],
    temperature: f64,
}

pub fn init_model(c: &InitModelConfig) -> Result<(), CliError> {
    save_model(&c.out, &Model::init(c.seed), c.temperature)?;
    Ok(())
}

pub fn train(c: &TrainConfig) -> Result<(), CliError> {
    let (model, stored_tau) = match &c.init {
        Some(p) => {
            let (m, t) = load_model(p)?;
            (m, Some(t))
        }
        None => (Model::init(c.contrastive.seed), None),
    };
    let mut cfg = c.contrastive.clone();
    cfg.temperature = c
        .temperature_override
        .or(stored_tau)
        .unwrap_or(cfg.temperature);

    let (_, data) = load_pairs(&c.pairs)?;
    let shots = match (&c.mode, &c.style_pairs) {
        (TrainMode::ClipDa, Some(dir)) => load_shots(dir, c.da_shots)?,
        _ => Vec::new(),
    };
    let names: Vec<&str> = shots.iter().map(|(d, _)| d.name()).collect();
    let sets: Vec<_> = shots.iter().map(|(_, s)| s.clone()).collect();

    let (trained, rep) = train_contrastive(&model, &data, &sets, &cfg)?;

    save_model(&c.out, &trained, cfg.temperature)?;
    let mut w = JsonlWriter::create(&c.out.join(LOSS_FILE))?;
    for s in &rep.steps {
        w.push(s)?;
    }
    w.finish()?;
    let report = Report {
        mode: c.mode,
        pairs: data.len(),
        domains: names.clone(),
        target_pairs_used: &rep.target_pairs_used,
        initial_loss: rep.initial_loss,
        final_loss: rep.final_loss,
        epoch_losses: &rep.epoch_losses,
        temperature: cfg.temperature,
    };
    let mut s = serde_json::to_string_pretty(&report)?;
    s.push('\n');
    write_file(&c.out.join(REPORT_FILE), s.as_bytes())?;
    eprintln!(
        "loss {:.4} -> {:.4} over {} steps",
        rep.initial_loss,
        rep.final_loss,
        rep.steps.len()
    );
    for (n, used) in names.iter().zip(&rep.target_pairs_used) {
        eprintln!("{n}: {used} target pairs used");
    }
    Ok(())
}
