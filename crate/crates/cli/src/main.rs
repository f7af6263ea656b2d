use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use zdlab_cli::{load_config, run, CliError};

/// Zero-determinant strategy experiments: one-shot analysis, matches,
/// tournaments and evolutionary dynamics.
#[derive(Debug, Parser)]
#[command(name = "zdlab", version)]
struct Args {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    // Usage errors exit with status 2.
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let record = serde_json::json!({ "error": err.record() });
            eprintln!("{record}");
            ExitCode::from(1)
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    let manifest = run(&config, args.threads.map(usize::from))?;
    if !args.quiet {
        println!(
            "{} files written to {}",
            manifest.outputs.len() + 1,
            config.output_dir.display()
        );
    }
    Ok(())
}
