mod config;
mod error;
mod output;
mod run;
mod sweep;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use cat_teleport::protocol::ProtocolPath;
use clap::{Parser, Subcommand};

use config::{ExperimentConfig, OutputFormat};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "cat-lab", version, about = "Coherent-state teleportation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment config; unknown keys are rejected.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Number-basis cutoff override.
    #[arg(long, global = true)]
    dims: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the built-in invariant checks.
    Validate {
        /// Also run with a corrupted truncation, which must be reported.
        #[arg(long)]
        self_test: bool,
    },
    /// Gram matrix of the quasi-Bell states against the closed forms.
    Bell,
    /// Eigen-residuals and decoded bits of the combined operators.
    Eigen,
    /// One protocol run on the configured path.
    Teleport,
    /// Parameter sweep over `sweep.amplitudes`.
    Sweep,
    /// One protocol run on the homodyne path.
    Homodyne,
}

impl Cli {
    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.display().to_string());
        }
        if let Some(format) = self.format {
            cfg.format = format;
        }
        if let Some(dims) = self.dims {
            cfg.truncation = Some(dims);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.config()?;
    match cli.command {
        Command::Validate { self_test } => validate::cmd_validate(&cfg, self_test),
        Command::Bell => run::cmd_bell(&cfg),
        Command::Eigen => run::cmd_eigen(&cfg),
        Command::Teleport => run::cmd_teleport(&cfg, cfg.path),
        Command::Homodyne => run::cmd_teleport(&cfg, ProtocolPath::Homodyne),
        Command::Sweep => sweep::cmd_sweep(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cat-lab: {e}");
            e.exit_code()
        }
    }
}
