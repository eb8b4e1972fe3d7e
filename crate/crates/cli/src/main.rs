use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

mod args;
mod config;
mod merge;
mod run;

use args::Cli;
use config::{load_config, RunConfig};

/// Bad flags, configs or parameter values (exit code 1).
#[derive(Debug)]
pub struct UsageError(pub anyhow::Error);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn is_usage(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<UsageError>()
            || matches!(
                c.downcast_ref::<layered_spdc::Error>(),
                Some(layered_spdc::Error::InvalidParameter { .. })
            )
    })
}

fn resolve(cli: &Cli) -> anyhow::Result<RunConfig> {
    let base = cli.config.as_deref().map(load_config).transpose()?;
    let mut config = match (&cli.command, base) {
        (None, None) => {
            return Err(UsageError(anyhow::anyhow!("give a subcommand or --config; see --help")).into());
        }
        (None, Some(c)) => c,
        (Some(cmd), base) => {
            if let Some(b) = &base {
                if b.task.name() != cmd.name() {
                    return Err(UsageError(anyhow::anyhow!(
                        "config holds a `{}` task but the subcommand is `{}`",
                        b.task.name(),
                        cmd.name()
                    ))
                    .into());
                }
            }
            let (seed, workers, task) = match base {
                Some(b) => (b.master_seed, b.workers, Some(b.task)),
                None => (0, None, None),
            };
            RunConfig {
                master_seed: seed,
                workers,
                task: cmd.apply(task),
            }
        }
    };
    if let Some(s) = cli.seed {
        config.master_seed = s;
    }
    if let Some(w) = cli.workers {
        config.workers = Some(w as usize);
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = resolve(&cli).and_then(|config| {
        let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        layered_spdc::with_workers(config.workers, || run::run(&config, &out_dir))
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 1 } else { 2 })
        }
    }
}
