//! `forestlab`: runs one experiment and writes its artifacts plus a
//! manifest into the output directory.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid config, 3 budget
//! exceeded.

mod config;
mod experiments;
mod output;

use std::process::ExitCode;

use clap::Parser;

use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: field `{field}`: {msg}")]
    Config { field: &'static str, msg: String },
    #[error(transparent)]
    Core(#[from] forestlab_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(field: &'static str, msg: impl Into<String>) -> Self {
        CliError::Config {
            field,
            msg: msg.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(e) if e.is_resource() => 3,
            CliError::Core(forestlab_core::Error::Domain(_)) => 2,
            _ => 1,
        }
    }
}

fn run(flags: ExperimentConfig) -> Result<(), CliError> {
    let cfg = ExperimentConfig::resolve(flags)?;
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::config("threads", e.to_string()))?;
    }
    log::info!(
        "running {:?} with seed {}",
        cfg.experiment(),
        cfg.seed.unwrap_or(0)
    );
    experiments::run(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let flags = ExperimentConfig::parse();
    match run(flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("forestlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
