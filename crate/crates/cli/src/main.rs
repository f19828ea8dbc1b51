use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ebeats_cli::commands::{cmd_beats, cmd_evolve, cmd_heatmap, cmd_validate, Options};
use ebeats_cli::config::{parse_route, RunConfig};
use ebeats_cli::CliError;

#[derive(Parser)]
#[command(
    name = "ebeats",
    version,
    about = "Entanglement beats of two atoms in a dispersive cavity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path (overrides [output].path; stdout when neither is set).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// exact | effective | closed (default: closed for identical atoms, else effective).
    #[arg(long, global = true)]
    route: Option<String>,

    /// Worker threads for parallel scans.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Concurrence time series at one intensity: tau,time,concurrence.
    Evolve,
    /// Concurrence over the intensity × tau grid: tau,mean_n,concurrence.
    Heatmap,
    /// Beat centers and widths, plus dead valleys in a second file.
    Beats,
    /// Cross-route oracle and invariant checks.
    Validate,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let opts = Options {
        output: cli.output.clone(),
        route: cli.route.as_deref().map(parse_route).transpose()?,
    };
    let go = || match cli.command {
        Command::Evolve => cmd_evolve(&cfg, &opts),
        Command::Heatmap => cmd_heatmap(&cfg, &opts),
        Command::Beats => cmd_beats(&cfg, &opts),
        Command::Validate => cmd_validate(&cfg, &opts),
    };
    match cli.threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?
            .install(go),
        None => go(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
