use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use loggas_cli::pipeline::{self, with_threads, TOOL_VERSION};
use loggas_cli::{CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "loggas", version, about = "Sample, simulate and analyse planar log-gas ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Validate the config and print the plan without writing anything.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the configured point field.
    Sample(RunArgs),
    /// Integrate the dynamics from every sampled configuration.
    Simulate(RunArgs),
    /// Evaluate the requested observables and write a summary.
    Analyze(RunArgs),
    /// Write truncated Palm density-ratio curves.
    Palm(RunArgs),
    /// Print the tool version.
    Version,
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(o) = &args.output {
        cfg.output_dir = o.clone();
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<String, CliError> {
    let (args, name) = match &cli.command {
        Command::Version => return Ok(format!("loggas {TOOL_VERSION}")),
        Command::Sample(a) => (a, "sample"),
        Command::Simulate(a) => (a, "simulate"),
        Command::Analyze(a) => (a, "analyze"),
        Command::Palm(a) => (a, "palm"),
    };
    let cfg = load(args)?;
    if args.dry_run {
        return Ok(format!(
            "{name}: config valid; seed {}, {} replicas, output {}",
            cfg.seed,
            cfg.ensemble_size,
            cfg.output_dir.display()
        ));
    }
    with_threads(args.threads, || -> Result<String, CliError> {
        Ok(match &cli.command {
            Command::Sample(_) => {
                let m = pipeline::cmd_sample(&cfg)?;
                format!("sampled {} configurations", m.samples.len())
            }
            Command::Simulate(_) => {
                let m = pipeline::cmd_simulate(&cfg)?;
                format!("simulated {} replicas", m.runs.len())
            }
            Command::Analyze(_) => {
                let s = pipeline::cmd_analyze(&cfg)?;
                format!("wrote summary with {} analyses", s.analyses.len())
            }
            Command::Palm(_) => {
                let m = pipeline::cmd_palm(&cfg)?;
                format!("wrote {} Palm curves", m.curves.len())
            }
            Command::Version => unreachable!(),
        })
    })?
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("loggas: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
