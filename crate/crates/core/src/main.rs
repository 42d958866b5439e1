use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hormander::run::{compare, run, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "hormander", version, about = "Hörmander functional calculus experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites of a config and write reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the config's suite list; repeatable.
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Row-by-row differences between two runs.
    Compare { manifest_a: PathBuf, manifest_b: PathBuf },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> hormander::Result<ExitCode> {
    match cli.command {
        Command::Run { config, suites, seed, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if !suites.is_empty() {
                cfg.suites = suites.iter().map(|s| Suite::parse(s)).collect::<hormander::Result<_>>()?;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let manifest = run(&cfg)?;
            for s in &manifest.suites {
                match &s.error {
                    Some(e) => println!("{:<20} error  {e}", s.suite.name()),
                    None => println!(
                        "{:<20} {:>4} rows  {:>3} failed  {:.2}s",
                        s.suite.name(),
                        s.rows,
                        s.failures,
                        s.wall_seconds
                    ),
                }
            }
            println!("manifest: {}", cfg.output_dir.join("manifest.json").display());
            Ok(if manifest.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Compare { manifest_a, manifest_b } => {
            let diff = compare(&manifest_a, &manifest_b)?;
            println!("{}", serde_json::to_string_pretty(&diff)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
