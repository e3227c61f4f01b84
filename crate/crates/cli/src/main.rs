use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spinwave_cli::{execute, resolve_workers, CliError, Command, RunConfig};

/// Ground-state entanglement of spin-wave harmonic lattices.
#[derive(Debug, Parser)]
#[command(name = "spinwave", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Config file of `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set g1=1.5`. Repeatable.
    #[arg(short, long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads (0 = one per core). Falls back to SPINWAVE_WORKERS.
    #[arg(short, long)]
    workers: Option<usize>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Output file for single-table commands (`-` for stdout).
    #[arg(short, long)]
    output: Option<String>,
    /// Output directory for the reproduce commands.
    #[arg(long)]
    output_dir: Option<String>,
    /// Print the effective config and exit.
    #[arg(long)]
    print_config: bool,
}

fn run(args: Args) -> Result<i32, CliError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut overrides = args.set.clone();
    if let Some(f) = &args.format {
        overrides.push(format!("format = {f}"));
    }
    if let Some(o) = &args.output {
        overrides.push(format!("output = {o}"));
    }
    if let Some(d) = &args.output_dir {
        overrides.push(format!("output_dir = {d}"));
    }
    let config = RunConfig::parse_with_overrides(&text, &overrides)?;
    if args.print_config {
        print!("{}", config.to_text());
        return Ok(0);
    }
    let workers = resolve_workers(args.workers, &config)?;
    execute(args.command, &config, workers)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
