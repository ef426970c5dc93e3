use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use hamdistill::Error;
use hamdistill::checks;
use hamdistill::config::{Experiment, ExperimentConfig, schema_help};
use hamdistill::experiment::{default_output, run_experiment, validate, write_outputs};

#[derive(Parser)]
#[command(name = "hamdistill", version, about = "Entanglement distillation by Hamiltonian twirling", after_help = schema_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a `key = value` config file.
    Run {
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// CSV output path; the manifest is written beside it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks.
    Check {
        /// Skip the Haar-sampling convergence check.
        #[arg(long)]
        skip_slow: bool,
    },
    /// List experiment names.
    ListExperiments,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn exit_for(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) => ExitCode::from(EXIT_VALIDATION),
        _ => ExitCode::from(EXIT_RUNTIME),
    }
}

fn run(config: PathBuf, seed: Option<u64>, threads: Option<usize>, out: Option<PathBuf>) -> ExitCode {
    if let Some(k) = threads {
        if k == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_VALIDATION);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    let text = match std::fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let mut cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", config.display());
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(p) = out {
        cfg.output_path = Some(p);
    }
    if let Err(e) = validate(&cfg) {
        eprintln!("{}: {e}", config.display());
        return exit_for(&e);
    }
    let start = Instant::now();
    let table = match run_experiment(&cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let path = default_output(&cfg);
    match write_outputs(&cfg, &table, &path, start.elapsed()) {
        Ok(manifest) => {
            println!("wrote {} ({} rows) and {}", path.display(), table.rows.len(), manifest.display());
            for note in &table.notes {
                println!("note: {note}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn check(skip_slow: bool) -> ExitCode {
    let results = checks::run_all(skip_slow);
    let mut failed = 0;
    for r in &results {
        println!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.detail);
        failed += usize::from(!r.pass);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VALIDATION) }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, seed, threads, out } => run(config, seed, threads, out),
        Command::Check { skip_slow } => check(skip_slow),
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<26} {}", e.name(), e.description());
            }
            ExitCode::SUCCESS
        }
    }
}
