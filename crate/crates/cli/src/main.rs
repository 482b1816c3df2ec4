use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use commands::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "figseek",
    version,
    about = "Find, classify and search maps in scholarly documents"
)]
struct Cli {
    #[arg(long, global = true, default_value = "figseek.toml")]
    config: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract figure metadata from the corpus
    Extract {
        #[arg(long)]
        out: PathBuf,
    },
    /// Select features, cross-validate and write the model
    Train {
        #[arg(long)]
        metadata: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Also write the feature ranking as TSV.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Label extracted figures as map or non-map
    Classify {
        #[arg(long)]
        metadata: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Index the figures classified as maps
    Index {
        #[arg(long)]
        classified: PathBuf,
    },
    /// Rank indexed maps for a query
    Query {
        query: String,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.inner());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = config::PipelineConfig::load(&cli.config).map_err(CliError::Input)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match cli.command {
        Command::Extract { out } => commands::extract(&config, &out),
        Command::Train {
            metadata,
            labels,
            scores,
        } => commands::train(&config, &metadata, &labels, scores.as_deref()),
        Command::Classify { metadata, out } => commands::classify(&config, &metadata, &out),
        Command::Index { classified } => commands::index(&config, &classified),
        Command::Query { query, mode, top_k } => {
            commands::query(&config, &query, mode.as_deref(), top_k)
        }
    }
}
