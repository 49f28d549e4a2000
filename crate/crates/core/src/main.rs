use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chernoff_lab::runner::{parse_config, run_experiment, ExperimentConfig, Workers};

#[derive(Parser)]
#[command(version, about = "Run Chernoff, LLN, CLT and quantization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        config: PathBuf,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads: a positive integer or "auto".
        #[arg(long)]
        workers: Option<Workers>,
        /// Suppress the summary on stdout.
        #[arg(long)]
        quiet: bool,
    },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
}

const EXIT_INVALID: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn load(path: &PathBuf) -> Result<ExperimentConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_INVALID)
    })?;
    parse_config(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_INVALID)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!("{}: ok ({} experiment)", config.display(), cfg.experiment.name());
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run {
            config,
            seed,
            out,
            workers,
            quiet,
        } => {
            let mut cfg = match load(&config) {
                Ok(cfg) => cfg,
                Err(code) => return code,
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            match run_experiment(&cfg) {
                Ok(m) => {
                    if !quiet {
                        println!(
                            "{} finished in {:.3}s (workers: {}); artifacts in {}",
                            m.experiment,
                            m.wall_time_seconds,
                            m.workers,
                            m.output_dir.display()
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
    }
}
