use std::io::Write;

use serde::Serialize;

use planegen_contrastive::probe::Split as ProbeSplit;
use planegen_contrastive::{linear_probe, retrieval_metrics, Model};
use planegen_core::benchmark::{Split, TaskKind};

use crate::args::EvalMode;
use crate::config::EvalConfig;
use crate::data::{
    create_dir, domain_set, load_model, load_pairs, load_split, style_lines, JsonlWriter,
};
use crate::error::CliError;

pub const METRICS_FILE: &str = "metrics.jsonl";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub metric: &'static str,
    pub task: String,
    pub value: f64,
}

fn probe(c: &EvalConfig, model: &Model) -> Result<Vec<Metric>, CliError> {
    let bench = c
        .bench
        .as_ref()
        .ok_or_else(|| CliError::Usage("eval probe needs --bench".into()))?;
    let mut out = Vec::new();
    for name in &c.tasks {
        let task = TaskKind::from_name(name)
            .ok_or_else(|| CliError::Usage(format!("unknown task {name:?}")))?;
        let mut embeds = Vec::new();
        for split in Split::ALL {
            let (x, y) = load_split(bench, split, task)?;
            embeds.push((model.vision.encode_all(&x), y));
        }
        let s = |k: usize| ProbeSplit {
            x: &embeds[k].0,
            y: &embeds[k].1,
        };
        let r = linear_probe(s(0), s(1), s(2), task.num_classes(), &c.probe);
        out.push(Metric {
            metric: "probe_acc",
            task: task.name().to_string(),
            value: r.test_accuracy,
        });
    }
    Ok(out)
}

fn retrieval(c: &EvalConfig, model: &Model) -> Result<Vec<Metric>, CliError> {
    let (task, r) = if let Some(dir) = &c.pairs {
        let (lines, data) = load_pairs(dir)?;
        let q = model.vision.encode_all(&data.images);
        let g = model.text.encode(&data.tokens);
        (
            "pairs",
            retrieval_metrics(&q, &g, &(0..lines.len()).collect::<Vec<_>>()),
        )
    } else if let Some(dir) = &c.style_pairs {
        let lines = style_lines(dir)?;
        let set = domain_set(dir, &lines.iter().collect::<Vec<_>>())?;
        let q = model.vision.encode_all(&set.target);
        let g = model.vision.encode_all(&set.transferred);
        (
            "style_pairs",
            retrieval_metrics(&q, &g, &(0..lines.len()).collect::<Vec<_>>()),
        )
    } else {
        return Err(CliError::Usage(
            "eval retrieval needs --pairs or --style-pairs".into(),
        ));
    };
    Ok(vec![
        Metric {
            metric: "MR",
            task: task.into(),
            value: r.mean_rank,
        },
        Metric {
            metric: "mAP",
            task: task.into(),
            value: r.mean_ap,
        },
    ])
}

pub fn eval(c: &EvalConfig) -> Result<Vec<Metric>, CliError> {
    let (model, _) = load_model(&c.checkpoint)?;
    let metrics = match c.mode {
        EvalMode::Probe => probe(c, &model)?,
        EvalMode::Retrieval => retrieval(c, &model)?,
    };
    create_dir(&c.out)?;
    let mut w = JsonlWriter::create(&c.out.join(METRICS_FILE))?;
    let mut stdout = std::io::stdout().lock();
    for m in &metrics {
        w.push(m)?;
        // metrics.jsonl is the record; stdout is a convenience copy
        let _ = writeln!(stdout, "{}", serde_json::to_string(m)?);
    }
    w.finish()?;
    Ok(metrics)
}
