use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use singular_toda::cli::{run_file, validate, Command, RunOptions};

#[derive(Parser)]
#[command(version, about = "Singular SU(3) Toda numerics: solve, classify, scan, bubble sweeps and diagnostics")]
struct Args {
    #[command(subcommand)]
    action: Action,
    /// Directory for the artifact files.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed overriding the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Action {
    /// Run a command on a config file.
    Run {
        #[arg(value_enum)]
        command: Command,
        config: PathBuf,
    },
    /// Check a config file without running anything.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match args.action {
        Action::Validate { config } => {
            let diagnostics = validate(&config);
            for d in &diagnostics {
                eprintln!("{d}");
            }
            if diagnostics.is_empty() {
                println!("{}: ok", config.display());
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Action::Run { command, config } => {
            let opts = RunOptions { output_dir: args.output_dir, seed: args.seed };
            match run_file(command, &config, &opts) {
                Ok(summary) => {
                    println!("{}", summary.message);
                    for f in &summary.files {
                        println!("wrote {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
