use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ngrc::experiment::report::render_report;
use ngrc::experiment::{run_experiment, validate_config, RunError};

#[derive(Parser)]
#[command(name = "ngrc", version, about = "Next-generation reservoir computing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print nothing on success.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Check a config file and print it with defaults filled in.
    Validate { config: PathBuf },
    /// Summarize a finished run directory.
    Report { dir: PathBuf },
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    match &cli.command {
        Command::Validate { config } => {
            let mut cfg = validate_config(config)?;
            apply_overrides(&mut cfg, cli);
            if !cli.quiet {
                print!("{}", cfg.to_toml_string());
            }
        }
        Command::Run { config } => {
            let mut cfg = validate_config(config)?;
            apply_overrides(&mut cfg, cli);
            let report = run_experiment(&cfg)?;
            if !cli.quiet {
                println!("task {} -> {}", cfg.task, report.out_dir.display());
                for (k, v) in &report.headline {
                    println!("  {k:<28} {v}");
                }
                println!("  files: {}", report.files.join(", "));
            }
        }
        Command::Report { dir } => {
            let text = render_report(dir)?;
            if !cli.quiet {
                print!("{text}");
            }
        }
    }
    Ok(())
}

fn apply_overrides(cfg: &mut ngrc::ExperimentConfig, cli: &Cli) {
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.display().to_string();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
