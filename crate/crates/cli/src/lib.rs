//! `planegen` command-line front end.
//!
//! Every command resolves its flags (plus an optional key=value config file
//! and `$PLANEGEN_SEED`) into a concrete configuration, writes it to
//! `<out>/run.json`, then runs it. `--from-run` replays such a record.

pub mod args;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod gen;
pub mod train;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use args::Cli;
use config::{expand_config, resolve, Resolved, RunRecord};
use error::CliError;

/// Runs an already-resolved command inside a pool of `threads` workers.
pub fn execute(run: &RunRecord) -> Result<(), CliError> {
    run.write(run.command.out())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| match &run.command {
        Resolved::GenPairs(c) => {
            gen::gen_pairs(c).map(|n| eprintln!("{n} pairs written to {}", c.out.display()))
        }
        Resolved::GenStylePairs(c) => gen::gen_style_pairs(c)
            .map(|n| eprintln!("{n} style pairs written to {}", c.out.display())),
        Resolved::GenBenchmark(c) => gen::gen_benchmark(c)
            .map(|n| eprintln!("{n} manifest lines written under {}", c.out.display())),
        Resolved::InitModel(c) => train::init_model(c),
        Resolved::Train(c) => train::train(c),
        Resolved::Eval(c) => eval::eval(c).map(|_| ()),
    })
}

fn default_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> Result<(), CliError> {
    let args = expand_config(args.into_iter().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version; a closed pipe is not an error
            let _ = write!(std::io::stdout(), "{e}");
            return Ok(());
        }
        Err(e) => {
            let msg = e.render().to_string();
            let msg = msg.strip_prefix("error: ").unwrap_or(&msg).trim_end();
            return Err(CliError::Usage(msg.to_string()));
        }
    };
    let threads = cli.threads.unwrap_or_else(default_threads).max(1);
    let record = match (cli.from_run, cli.command) {
        (Some(path), None) => {
            let mut r = RunRecord::read(&path)?;
            if let Some(out) = cli.out {
                r.command.set_out(out);
            }
            if cli.threads.is_some() {
                r.threads = threads;
            }
            r
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "--from-run replays a recorded command; give no subcommand".into(),
            ))
        }
        (None, Some(cmd)) => RunRecord::new(resolve(cmd)?, threads),
        (None, None) => return Err(CliError::Usage("no command given; see --help".into())),
    };
    execute(&record)
}

/// Process entry: prints errors and maps them to exit codes.
pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    match run(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
