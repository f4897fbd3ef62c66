use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use weylscat_cli::config::OutputFormat;
use weylscat_cli::{run, CliArgs};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Scattering-matrix sweeps, inverse-problem pipelines, and verification
/// suites driven by a JSON run configuration.
#[derive(Parser, Debug)]
#[command(name = "weylscat", version)]
struct Cli {
    /// Path to the JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Override the configured output path
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the configured output format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads for grid sweeps (rows stay in lambda order)
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Override the configured seed
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    let code = run(&CliArgs {
        config: cli.config,
        output: cli.output,
        format: cli.format.map(|f| match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }),
        threads: cli.threads.max(1),
        seed: cli.seed,
    });
    std::process::exit(code);
}
