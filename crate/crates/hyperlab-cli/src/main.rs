//! `hyperlab` command line: run scenario experiments, validate scenario
//! files, and render result summaries.
//!
//! Exit codes: 0 success, 1 scenario validation error, 2 runtime error,
//! 3 assertion failure under `--assert`.

mod report;
mod runner;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "hyperlab", version, about = "hyperspace dynamics laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a scenario file.
    Run {
        scenario: PathBuf,
        /// Evaluate the experiment's assertions and exit 3 on failure.
        #[arg(long = "assert")]
        assert_mode: bool,
        /// Worker threads (overrides HYPERLAB_THREADS).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (overrides the scenario's [output] dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a human-readable summary of a results.jsonl file.
    Report { results: PathBuf },
    /// Parse and validate a scenario file without running it.
    Check { scenario: PathBuf },
}

fn configure_threads(cli_threads: Option<usize>) {
    let n = cli_threads.or_else(|| {
        std::env::var("HYPERLAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn load_scenario(path: &PathBuf) -> Result<scenario::Scenario, ExitCode> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(ExitCode::from(2));
        }
    };
    match scenario::parse_scenario(&text) {
        Ok(s) => Ok(s),
        Err(errors) => {
            eprintln!("scenario {} is invalid:", path.display());
            for e in errors {
                eprintln!("  {e}");
            }
            Err(ExitCode::from(1))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario: path,
            assert_mode,
            threads,
            out,
        } => {
            configure_threads(threads);
            let sc = match load_scenario(&path) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let out_dir = out
                .or_else(|| sc.output_dir.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let cfg = runner::RunConfig {
                assert_mode,
                out_dir,
            };
            match runner::run_scenario(&sc, &cfg) {
                Ok(outcome) => {
                    println!(
                        "wrote {} records to {} (csv mirror: {})",
                        outcome.records_written,
                        outcome.results_path.display(),
                        outcome.csv_path.display()
                    );
                    if assert_mode {
                        if outcome.assertion_failures.is_empty() {
                            println!("assertions: all passed");
                        } else {
                            eprintln!("assertion failures:");
                            for f in &outcome.assertion_failures {
                                eprintln!("  {f}");
                            }
                            return ExitCode::from(3);
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("runtime error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Report { results } => {
            let text = match std::fs::read_to_string(&results) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", results.display());
                    return ExitCode::from(2);
                }
            };
            match report::render_report(&text) {
                Ok(rendered) => {
                    print!("{rendered}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("runtime error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Check { scenario: path } => match load_scenario(&path) {
            Ok(sc) => {
                println!(
                    "ok: {} on {:?}/{:?} (hash {})",
                    sc.experiment.kind(),
                    sc.space,
                    sc.map,
                    &runner::scenario_hash(&sc)[..12]
                );
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
    }
}
