//! Experiment runner: tensor-rule node files, mesh statistics, Lebesgue
//! constant sweeps and a bundled verification suite.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

pub use config::{Cli, Command, ExperimentConfig, OutputFormat};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 check failure (and I/O), 2 usage, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) | CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<sphereproj::Error> for CliError {
    fn from(e: sphereproj::Error) -> Self {
        use sphereproj::Error as E;
        match e {
            E::Numerical(_) | E::RefinementCap { .. } | E::Degenerate(_) | E::NonFinite { .. } => {
                CliError::Numerical(e.to_string())
            }
            E::Io(io) => CliError::Io(io),
            E::Parse { .. } | E::Invariant(_) => CliError::Check(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = ExperimentConfig::from_cli(&cli)?;
    match &cli.command {
        Command::Nodes => commands::cmd_nodes(&config).map(|_| ()),
        Command::Meshstats => commands::cmd_meshstats(&config).map(|_| ()),
        Command::Lebesgue { operators } => commands::cmd_lebesgue(&config, operators).map(|_| ()),
        Command::Verify { rule } => {
            let report = commands::cmd_verify(&config, rule.as_deref())?;
            print!("{}", report.render());
            report.into_result()
        }
    }
}
