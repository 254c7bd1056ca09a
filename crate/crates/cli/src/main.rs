use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dressq_cli::{execute, ExperimentConfig, RunOptions, Task};

/// Spectra of Hamiltonians under static classical noise.
#[derive(Parser)]
#[command(name = "dressq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Noiseless and per-channel dressed spectra with their deviation.
    Spectrum(Common),
    /// Channel-averaged free-induction decay and its peak/gap match.
    Fid(Common),
    /// Generalized phase estimation histogram.
    Qpe(Common),
    /// Run every invariant check; exits 1 on any failure.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, args) = match cli.command {
        Command::Spectrum(a) => (Task::Spectrum, a),
        Command::Fid(a) => (Task::Fid, a),
        Command::Qpe(a) => (Task::Qpe, a),
        Command::Validate(a) => (Task::Validate, a),
    };
    let opts = RunOptions {
        seed: args.seed,
        threads: args.threads,
        out: args.out,
    };
    let result = ExperimentConfig::load(&args.config).and_then(|(cfg, bytes)| execute(task, &cfg, &bytes, &opts));
    match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            println!("outputs in {}", outcome.dir.display());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
