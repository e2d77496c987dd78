//! Resolved run configurations, `run.json` records and key=value config
//! files.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use planegen_contrastive::{ContrastiveConfig, ProbeConfig};
use planegen_core::benchmark::{TaskKind, DESK_COUNTS, GENERATOR_VERSION, PAPER_COUNTS};
use planegen_core::render::DomainTag;
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::error::CliError;

pub const SEED_ENV: &str = "PLANEGEN_SEED";
pub const RUN_FILE: &str = "run.json";

pub const CLIP_EPOCHS: usize = 50;
pub const CLIP_LR: f64 = 1e-3;
pub const DA_EPOCHS: usize = 5;
pub const DA_LR: f64 = 5e-4;
/// 2,000 desk pairs give about 31 steps per epoch at this size.
pub const DESK_BATCH: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenPairsConfig {
    pub count: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub svg: bool,
    pub chunk: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenStylePairsConfig {
    pub domains: Vec<String>,
    pub count: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub svg: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenBenchmarkConfig {
    pub tasks: Vec<String>,
    pub counts: [usize; 3],
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub svg: bool,
    pub manifest_only: bool,
    pub chunk: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitModelConfig {
    pub seed: u64,
    pub temperature: f64,
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: TrainMode,
    pub pairs: PathBuf,
    pub style_pairs: Option<PathBuf>,
    pub init: Option<PathBuf>,
    pub out: PathBuf,
    pub da_shots: usize,
    /// Temperature follows the initial checkpoint unless set.
    pub temperature_override: Option<f64>,
    pub contrastive: ContrastiveConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub mode: EvalMode,
    pub checkpoint: PathBuf,
    pub out: PathBuf,
    pub bench: Option<PathBuf>,
    pub tasks: Vec<String>,
    pub pairs: Option<PathBuf>,
    pub style_pairs: Option<PathBuf>,
    pub probe: ProbeConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resolved {
    GenPairs(GenPairsConfig),
    GenStylePairs(GenStylePairsConfig),
    GenBenchmark(GenBenchmarkConfig),
    InitModel(InitModelConfig),
    Train(TrainConfig),
    Eval(EvalConfig),
}

impl Resolved {
    pub fn out(&self) -> &Path {
        match self {
            Resolved::GenPairs(c) => &c.out,
            Resolved::GenStylePairs(c) => &c.out,
            Resolved::GenBenchmark(c) => &c.out,
            Resolved::InitModel(c) => &c.out,
            Resolved::Train(c) => &c.out,
            Resolved::Eval(c) => &c.out,
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            Resolved::GenPairs(c) => c.out = out,
            Resolved::GenStylePairs(c) => c.out = out,
            Resolved::GenBenchmark(c) => c.out = out,
            Resolved::InitModel(c) => c.out = out,
            Resolved::Train(c) => c.out = out,
            Resolved::Eval(c) => c.out = out,
        }
    }
}

/// Contents of `run.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub generator_version: String,
    pub threads: usize,
    pub command: Resolved,
}

impl RunRecord {
    pub fn new(command: Resolved, threads: usize) -> Self {
        Self {
            generator_version: GENERATOR_VERSION.to_string(),
            threads,
            command,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        let path = dir.join(RUN_FILE);
        fs::write(&path, s).map_err(|e| CliError::io(path.display(), e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn resolve_tasks(name: &str) -> Result<Vec<String>, CliError> {
    if name == "all" {
        return Ok(TaskKind::ALL.iter().map(|t| t.name().to_string()).collect());
    }
    TaskKind::from_name(name)
        .map(|t| vec![t.name().to_string()])
        .ok_or_else(|| {
            let known: Vec<&str> = TaskKind::ALL.iter().map(|t| t.name()).collect();
            CliError::Usage(format!(
                "unknown task {name:?}; expected all or one of {known:?}"
            ))
        })
}

fn parse_counts(s: &str) -> Result<[usize; 3], CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::Usage(format!("--counts expects train,val,test; got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut out = [0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| bad())?;
    }
    Ok(out)
}

pub fn resolve(cmd: Command) -> Result<Resolved, CliError> {
    Ok(match cmd {
        Command::GenPairs(a) => Resolved::GenPairs(GenPairsConfig {
            count: a.count,
            seed: resolve_seed(a.common.seed)?,
            out: a.common.out,
            format: a.image.format,
            svg: a.image.svg,
            chunk: a.chunk.max(1),
        }),
        Command::GenStylePairs(a) => {
            let domains = match a.domain.as_str() {
                "all" => vec![
                    DomainTag::TargetA.name().to_string(),
                    DomainTag::TargetB.name().to_string(),
                ],
                d => match DomainTag::from_name(d) {
                    Some(t) if t != DomainTag::Synthetic => vec![t.name().to_string()],
                    _ => {
                        return Err(CliError::Usage(format!(
                            "unknown target domain {d:?}; expected target_a, target_b or all"
                        )))
                    }
                },
            };
            Resolved::GenStylePairs(GenStylePairsConfig {
                domains,
                count: a.count,
                seed: resolve_seed(a.common.seed)?,
                out: a.common.out,
                format: a.image.format,
                svg: a.image.svg,
            })
        }
        Command::GenBenchmark(a) => Resolved::GenBenchmark(GenBenchmarkConfig {
            tasks: resolve_tasks(&a.task)?,
            counts: match (&a.counts, a.paper_scale) {
                (Some(c), _) => parse_counts(c)?,
                (None, true) => PAPER_COUNTS,
                (None, false) => DESK_COUNTS,
            },
            seed: resolve_seed(a.common.seed)?,
            out: a.common.out,
            format: a.image.format,
            svg: a.image.svg,
            manifest_only: a.manifest_only,
            chunk: a.chunk.max(1),
        }),
        Command::InitModel(a) => Resolved::InitModel(InitModelConfig {
            seed: resolve_seed(a.common.seed)?,
            temperature: a.temperature,
            out: a.common.out,
        }),
        Command::Train(a) => {
            let (epochs, lr) = match a.mode {
                TrainMode::Clip => (CLIP_EPOCHS, CLIP_LR),
                TrainMode::ClipDa => (DA_EPOCHS, DA_LR),
            };
            if a.mode == TrainMode::ClipDa && a.style_pairs.is_none() {
                return Err(CliError::Usage("train clip-da needs --style-pairs".into()));
            }
            let contrastive = ContrastiveConfig {
                temperature: a
                    .temperature
                    .unwrap_or(ContrastiveConfig::default().temperature),
                batch_size: a.batch_size.unwrap_or(DESK_BATCH),
                da_batch_size: a.da_batch_size,
                learning_rate: a.lr.unwrap_or(lr),
                epochs: a.epochs.unwrap_or(epochs),
                seed: resolve_seed(a.common.seed)?,
                symmetric: a.symmetric,
                weight_decay: a.weight_decay,
                ..Default::default()
            };
            contrastive.validate()?;
            Resolved::Train(TrainConfig {
                mode: a.mode,
                pairs: a.pairs,
                style_pairs: if a.mode == TrainMode::ClipDa {
                    a.style_pairs
                } else {
                    None
                },
                init: a.init,
                out: a.common.out,
                da_shots: a.da_shots,
                temperature_override: a.temperature,
                contrastive,
            })
        }
        Command::Eval(a) => {
            match a.mode {
                EvalMode::Probe if a.bench.is_none() => {
                    return Err(CliError::Usage("eval probe needs --bench".into()));
                }
                EvalMode::Retrieval if a.pairs.is_none() && a.style_pairs.is_none() => {
                    return Err(CliError::Usage(
                        "eval retrieval needs --pairs or --style-pairs".into(),
                    ));
                }
                _ => {}
            }
            Resolved::Eval(EvalConfig {
                mode: a.mode,
                checkpoint: a.checkpoint,
                out: a.out,
                tasks: if a.mode == EvalMode::Probe {
                    resolve_tasks(&a.task)?
                } else {
                    Vec::new()
                },
                bench: a.bench,
                pairs: a.pairs,
                style_pairs: a.style_pairs,
                probe: ProbeConfig {
                    epochs: a.probe_epochs,
                    batch_size: a.probe_batch_size.max(1),
                    learning_rate: a.probe_lr,
                    seed: resolve_seed(a.seed)?,
                    ..Default::default()
                },
            })
        }
    })
}

/// Turns `key=value` lines into `--key value` flags. `#` starts a comment;
/// `key=true` becomes a bare switch and `key=false` is dropped.
pub fn config_flags(text: &str) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key=value",
                n + 1
            )));
        };
        let key = k.trim().replace('_', "-");
        match v.trim() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            v => {
                out.push(format!("--{key}").into());
                out.push(v.into());
            }
        }
    }
    Ok(out)
}

/// Top-level flags that take a value; used to find where the subcommand
/// starts so config-file flags land inside it.
const TOP_LEVEL_VALUED: [&str; 4] = ["--threads", "--config", "--from-run", "--out"];

/// Splices flags from a `--config` file right after the subcommand name,
/// ahead of the user's own flags so those win.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut config = None;
    let mut sub = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(v));
        } else if a == "--config" {
            config = args.get(i + 1).map(PathBuf::from);
            i += 1;
        } else if TOP_LEVEL_VALUED.contains(&a.as_ref()) {
            i += 1;
        } else if !a.starts_with('-') {
            sub = Some(i);
            break;
        }
        i += 1;
    }
    let (Some(path), Some(sub)) = (config, sub) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(path.display(), e))?;
    let flags = config_flags(&text)?;
    // Positional mode arguments (train clip, eval probe) stay first.
    let takes_mode = matches!(args[sub].to_str(), Some("train" | "eval"));
    let at = if takes_mode {
        (sub + 2).min(args.len())
    } else {
        sub + 1
    };
    let mut out = args[..at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_lines() {
        let f = config_flags("epochs = 3 # short\n\nsymmetric=true\nsvg=false\nbatch_size=8\n")
            .unwrap();
        assert_eq!(
            f,
            os(&["--epochs", "3", "--symmetric", "--batch-size", "8"])
        );
        assert!(config_flags("nonsense").is_err());
    }

    #[test]
    fn counts_parse() {
        assert_eq!(parse_counts("26, 13,13").unwrap(), [26, 13, 13]);
        assert!(parse_counts("1,2").is_err());
        assert!(parse_counts("a,b,c").is_err());
    }

    #[test]
    fn config_goes_after_mode() {
        let dir = std::env::temp_dir().join(format!("planegen-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("c.cfg");
        fs::write(&cfg, "epochs=2\n").unwrap();
        let args = os(&[
            "planegen",
            "--threads",
            "1",
            "--config",
            cfg.to_str().unwrap(),
            "train",
            "clip",
            "--epochs",
            "7",
        ]);
        let got = expand_config(args).unwrap();
        let tail: Vec<_> = got[5..].to_vec();
        assert_eq!(
            tail,
            os(&["train", "clip", "--epochs", "2", "--epochs", "7"])
        );
        fs::remove_dir_all(&dir).unwrap();
    }
}
