use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use sphereproj::projections::OperatorTag;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "sphereproj", version, about = "Projections onto spherical polynomials: Lebesgue constants and node diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Single degree (overrides the range flags)
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub n_start: Option<usize>,
    #[arg(long, global = true)]
    pub n_stop: Option<usize>,
    #[arg(long, global = true)]
    pub n_step: Option<usize>,

    /// Sphere dimension
    #[arg(long, global = true, default_value_t = 2)]
    pub q: usize,

    /// Evaluation points per node (default 4 for Lebesgue sweeps, 16 for mesh norms)
    #[arg(long, global = true)]
    pub eval_mult: Option<usize>,

    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    /// Largest degree for which the least-squares basis is factored
    #[arg(long, global = true, default_value_t = 40)]
    pub max_ls_degree: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the tensor Gauss-Legendre rule and a lat/lon plot file
    Nodes,
    /// Mesh norm, separation, mesh ratio and certificates of tensor nodes
    Meshstats,
    /// Lebesgue constants of the projection operators
    Lebesgue {
        /// Comma-separated subset of LS, hyper, fourier
        #[arg(long, value_delimiter = ',', default_value = "LS,hyper")]
        operators: Vec<OperatorTag>,
    },
    /// Run the invariant suite on a tensor rule or a rule file
    Verify {
        #[arg(long)]
        rule: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Resolved settings for one subcommand run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub subcommand: &'static str,
    pub degrees: Vec<usize>,
    /// Whether the degree came from `--n` rather than a default range.
    pub explicit_degree: bool,
    pub q: usize,
    pub eval_mult: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub format: OutputFormat,
    pub max_ls_degree: usize,
}

impl ExperimentConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let (subcommand, range, mult) = match cli.command {
            Command::Nodes => ("nodes", (15, 15, 1), 1),
            Command::Meshstats => ("meshstats", (5, 50, 5), 16),
            Command::Lebesgue { .. } => ("lebesgue", (10, 40, 10), 4),
            Command::Verify { .. } => ("verify", (10, 10, 1), 4),
        };
        let degrees = match cli.n {
            Some(n) => vec![n],
            None => {
                let start = cli.n_start.unwrap_or(range.0);
                let stop = cli.n_stop.unwrap_or(if cli.n_start.is_some() { start.max(range.1) } else { range.1 });
                let step = cli.n_step.unwrap_or(range.2);
                if step == 0 {
                    return Err(CliError::Usage("--n-step must be at least 1".into()));
                }
                if start > stop {
                    return Err(CliError::Usage(format!("empty degree range {start}..{stop}")));
                }
                (start..=stop).step_by(step).collect()
            }
        };
        let eval_mult = cli.eval_mult.unwrap_or(mult);
        if eval_mult == 0 {
            return Err(CliError::Usage("--eval-mult must be at least 1".into()));
        }
        if cli.q < 2 {
            return Err(CliError::Usage(format!("--q must be at least 2, got {}", cli.q)));
        }
        Ok(Self {
            subcommand,
            degrees,
            explicit_degree: cli.n.is_some(),
            q: cli.q,
            eval_mult,
            out: cli.out.clone(),
            seed: cli.seed,
            format: cli.format,
            max_ls_degree: cli.max_ls_degree,
        })
    }

    /// Settings for in-process use, with the subcommand's defaults.
    pub fn new(subcommand: &'static str, degrees: Vec<usize>, out: impl Into<PathBuf>) -> Self {
        let eval_mult = if subcommand == "meshstats" { 16 } else { 4 };
        Self {
            subcommand,
            degrees,
            explicit_degree: true,
            q: 2,
            eval_mult,
            out: out.into(),
            seed: 0,
            format: OutputFormat::Csv,
            max_ls_degree: 40,
        }
    }

    /// One-line provenance comment written at the top of every output file.
    pub fn comment(&self, extra: &str) -> String {
        let degrees = self.degrees.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        let mut line = format!(
            "# sphereproj {} cmd={} q={} n=[{}] eval_mult={} seed={} max_ls_degree={}",
            crate::VERSION,
            self.subcommand,
            self.q,
            degrees,
            self.eval_mult,
            self.seed,
            self.max_ls_degree
        );
        if !extra.is_empty() {
            line.push(' ');
            line.push_str(extra);
        }
        line
    }

    pub(crate) fn require_sphere(&self, what: &str) -> Result<(), CliError> {
        if self.q != 2 {
            return Err(CliError::Usage(format!("{what} is only available for q=2 (got q={})", self.q)));
        }
        Ok(())
    }
}
