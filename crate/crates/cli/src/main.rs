use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use subgauss_cli::{run, Command, ExperimentConfig};

/// Runs one experiment and writes summary.json plus CSV tables.
#[derive(Parser)]
#[command(name = "subgauss", version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set parameters.samples=1000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = ExperimentConfig::load(cli.config.as_deref(), &cli.set, cli.command).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(o) if o.pass => {
            println!("pass ({} files)", o.files.len());
            ExitCode::SUCCESS
        }
        Ok(o) => {
            eprintln!("check failed: {}", o.failed_check.unwrap_or_default());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
