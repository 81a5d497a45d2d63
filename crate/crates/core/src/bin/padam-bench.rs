use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use padam::harness::{parse_config, presets, run_experiment, ConfigOverrides};
use padam::Error;

/// Exit status when at least one seed diverged.
const EXIT_DIVERGED: u8 = 3;
const EXIT_USAGE: u8 = 2;
const EXIT_FAILURE: u8 = 1;

#[derive(Parser)]
#[command(
    name = "padam-bench",
    version,
    about = "PADAM optimizer benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run one problem/optimizer experiment over several seeds.
    Run {
        /// JSON config file; flags given on the command line take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: ConfigOverrides,
    },
    /// List the built-in presets.
    ListPresets,
    /// Run the fast invariant checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, overrides } => run(config, overrides),
        Command::ListPresets => {
            for p in presets() {
                println!(
                    "{:<20} {:<14} steps={:<7} seeds={:<3} {}",
                    p.name,
                    p.problem.id(),
                    p.steps,
                    p.seeds,
                    p.description
                );
            }
            ExitCode::SUCCESS
        }
        Command::Selftest => {
            let outcomes = padam::selftest::run_all();
            let mut ok = true;
            for c in &outcomes {
                println!(
                    "[{}] {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                ok &= c.passed;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILURE)
            }
        }
    }
}

fn run(config_file: Option<PathBuf>, overrides: ConfigOverrides) -> ExitCode {
    let config = match parse_config(config_file.as_deref(), overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("padam-bench: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if config.out.is_none() {
        eprintln!("padam-bench: usage error: --out is required");
        return ExitCode::from(EXIT_USAGE);
    }
    match run_experiment(&config) {
        Ok(result) => {
            let agg = &result.aggregate;
            match agg.final_mean_error {
                Some(v) => println!(
                    "{} on {}: final mean error {v:.6e} over {} seed(s)",
                    config.optimizer,
                    config.problem.kind,
                    config.seeds as usize - agg.diverged_seed_count
                ),
                None => println!(
                    "{} on {}: every seed diverged",
                    config.optimizer, config.problem.kind
                ),
            }
            if result.any_diverged() {
                eprintln!(
                    "padam-bench: {} of {} seed(s) diverged",
                    agg.diverged_seed_count, config.seeds
                );
                ExitCode::from(EXIT_DIVERGED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e @ Error::Usage(_)) => {
            eprintln!("padam-bench: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("padam-bench: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
