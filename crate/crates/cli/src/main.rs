use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use antifragility_core::{config, fixture, pipeline};

#[derive(Parser)]
#[command(
    name = "antifragility",
    version,
    about = "Batch antifragility measures for stock and crypto panels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; overrides the config value.
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory; overrides the config value.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the normalized panels under panels/.
        #[arg(long)]
        dump_panels: bool,
    },
    /// Check a config file without touching any data.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a small self-contained stock and crypto dataset.
    Fixture {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .init();

    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Run {
            config: path,
            workers,
            out,
            dump_panels,
        } => {
            let mut cfg = config::load_config(&path)?;
            if let Some(w) = workers {
                anyhow::ensure!(w > 0, "--workers must be positive");
                cfg.worker_count = w;
            }
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            cfg.dump_panels |= dump_panels;
            let summary = pipeline::run(&cfg)?;
            println!(
                "wrote {} files ({} results) to {}",
                summary.files.len(),
                summary.results,
                summary.output_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config: path } => {
            let diags = config::validate(&path);
            println!("{diags}");
            Ok(if diags.is_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Fixture { out } => {
            fixture::write_fixture(&out)
                .with_context(|| format!("writing fixture to {}", out.display()))?;
            println!("fixture written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
