use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use wva_cli::{execute, parse_config, CliError, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "wva", version, about = "Fisher-information budget of post-selected weak measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config file, `-` for standard input
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (standard output when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweeps and replicas
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Full information budget at one configuration (JSON)
    Report,
    /// Fig. 1 curves over θ_i (CSV)
    SweepFig1,
    /// Fig. 2 curves over θ_f (CSV)
    SweepFig2,
    /// Series residuals against the exact kernels (CSV)
    SeriesCheck,
    /// Replicated MLE against the Cramér–Rao floor (JSON)
    Montecarlo,
}

impl From<Command> for Mode {
    fn from(c: Command) -> Self {
        match c {
            Command::Report => Mode::Report,
            Command::SweepFig1 => Mode::SweepFig1,
            Command::SweepFig2 => Mode::SweepFig2,
            Command::SeriesCheck => Mode::SeriesCheck,
            Command::Montecarlo => Mode::Montecarlo,
        }
    }
}

fn load(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    let text = match path {
        None => return Ok(RunConfig::default()),
        Some(p) if p.as_os_str() == "-" => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|source| CliError::ConfigRead {
                    path: "<stdin>".into(),
                    source,
                })?;
            s
        }
        Some(p) => std::fs::read_to_string(p).map_err(|source| CliError::ConfigRead {
            path: p.display().to_string(),
            source,
        })?,
    };
    parse_config(&text)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::invalid("threads", e.to_string()))?;
    }
    let mut config = load(cli.config.as_ref())?;
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    let out = cli
        .out
        .map(|p| p.display().to_string())
        .or_else(|| config.output.clone());
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let (_, text) = execute(cli.command.into(), config, now)?;
    wva_cli::output::emit(out.as_deref(), &text)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wva: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
