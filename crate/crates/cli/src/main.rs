use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graphsim_cli::{service, Overrides, Pipeline, RunConfig, StageReport};
use graphsim_measures::MeasureId;
use tracing_subscriber::EnvFilter;

/// Graph-similarity perception benchmark: stimuli, sessions, measures, model
/// judgments, the study service and the agreement report.
#[derive(Debug, Parser)]
#[command(name = "graphsim", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, short, global = true, default_value = "graphsim.toml")]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Recompute outputs that already exist.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the stimulus catalog and its edge lists.
    Generate,
    /// Draw every catalog stimulus.
    Render,
    /// Build one counterbalanced session per participant.
    Triplets,
    /// Rotate targets toward their queries and prepare model images.
    Align,
    /// Score every shown (query, target) pair.
    Measure {
        /// Restrict to these measures (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<MeasureId>,
    },
    /// Collect model judgments.
    Judge {
        /// Run only the provider with this model name.
        #[arg(long)]
        provider: Option<String>,
    },
    /// Run the study service.
    Serve {
        /// Overrides the configured port.
        #[arg(long)]
        port: Option<u16>,
    },
    /// Write the agreement report.
    Analyze,
    /// generate, render, triplets, align, measure, then judge and analyze when possible.
    All,
}

fn print(reports: &[StageReport]) {
    for r in reports {
        println!("{r}");
    }
}

async fn run(cli: Cli) -> Result<(), graphsim_cli::CliError> {
    let overrides = Overrides { seed: cli.seed, output_dir: cli.output };
    let mut cfg = RunConfig::load(&cli.config, &overrides)?;
    if let Command::Serve { port: Some(p) } = &cli.command {
        cfg.serve.port = *p;
    }
    let pipeline = Pipeline::new(cfg, cli.force);
    let report = match cli.command {
        Command::Generate => pipeline.generate()?,
        Command::Render => tokio::task::block_in_place(|| pipeline.render())?,
        Command::Triplets => pipeline.triplets()?,
        Command::Align => tokio::task::block_in_place(|| pipeline.align())?,
        Command::Measure { only } => tokio::task::block_in_place(|| pipeline.measure(&only))?,
        Command::Judge { provider } => pipeline.judge(provider.as_deref()).await?,
        Command::Analyze => pipeline.analyze()?,
        Command::Serve { .. } => return service::serve(pipeline.layout.clone(), &pipeline.cfg.serve).await,
        Command::All => {
            print(&pipeline.all().await?);
            return Ok(());
        }
    };
    print(&[report]);
    Ok(())
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
