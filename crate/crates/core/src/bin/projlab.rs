use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use projlab::experiments::{self, RunError, NAMES};

/// Run a named experiment and write summary.json, tables/*.csv and plots/*.svg.
#[derive(Parser, Debug)]
#[command(name = "projlab", version)]
struct Args {
    /// Experiment name.
    experiment: String,
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Root seed; overrides the config's "seed".
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for Monte Carlo loops.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if !NAMES.contains(&args.experiment.as_str()) {
        eprintln!("error: unknown experiment '{}' (known: {})", args.experiment, NAMES.join(", "));
        return ExitCode::from(2);
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let config: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: invalid config: {e}");
            return ExitCode::from(2);
        }
    };
    let run = || experiments::run(&args.experiment, config, args.seed);
    let result = match args.threads {
        Some(0) => {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: cannot start thread pool: {e}");
                return ExitCode::from(2);
            }
        },
        None => run(),
    };
    let report = match result {
        Ok(r) => r,
        Err(e @ (RunError::UnknownExperiment(_) | RunError::InvalidConfig(_))) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(RunError::Lab(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = report.write(&args.out) {
        eprintln!("error: writing {}: {e}", args.out.display());
        return ExitCode::from(1);
    }
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        let failed: Vec<&str> = report.failed_checks().map(|c| c.name.as_str()).collect();
        eprintln!("{}: failed: {}", report.experiment, failed.join(", "));
        ExitCode::from(1)
    }
}
