use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crosl::benchmark::Benchmark;
use crosl::harness::{export_traces, run_experiment, ExperimentConfig, Variant};
use crosl::windfarm::{wind_farm_objective, Scenario};
use crosl::Result;

#[derive(Parser)]
#[command(name = "crosl", version, about = "Coral reef ensemble optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Base seed; repetition r uses seed + r.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Variants to run; may be repeated. Defaults to the config's variant.
        #[arg(long)]
        variant: Vec<Variant>,
    },
    /// List the available objectives.
    ListObjectives,
    /// Evaluate one point.
    Eval {
        /// F1..F15 or windfarm.
        #[arg(long)]
        objective: String,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Scenario file for the windfarm objective.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| crosl::Error::Argument(format!("bad coordinate `{}`: {e}", s.trim())))
        })
        .collect()
}

fn run(cli: Cli) -> Result<String> {
    let mut text = String::new();
    match cli.command {
        Command::Run { config, seed, reps, out, variant } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = reps {
                cfg.repetitions = r;
            }
            let variants = if variant.is_empty() { vec![cfg.variant] } else { variant };
            let mut results = Vec::new();
            for v in variants {
                cfg.variant = v;
                results.push(run_experiment(&cfg)?);
            }
            export_traces(&results, &out)?;
            text.push_str("function,variant,best,mean,std\n");
            for r in &results {
                let s = r.summary;
                let _ = writeln!(text, "{},{},{},{},{}", r.function, r.variant, s.best, s.mean, s.std);
            }
        }
        Command::ListObjectives => {
            for b in Benchmark::ALL {
                let _ = writeln!(text, "{}\t{}", b, b.title());
            }
            text.push_str("windfarm\twind-farm layout, -AEP plus constraint penalty\n");
        }
        Command::Eval { objective, point, scenario } => {
            let x = parse_point(&point)?;
            let value = if objective.eq_ignore_ascii_case("windfarm") {
                let s = match scenario {
                    Some(p) => Scenario::load(p)?,
                    None => Scenario::default(),
                };
                wind_farm_objective(&s)?.try_evaluate(&x)?
            } else {
                objective.parse::<Benchmark>()?.evaluate(&x)?
            };
            let _ = writeln!(text, "{value}");
        }
    }
    Ok(text)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            // A closed pipe (e.g. `| head`) is not an error.
            match std::io::stdout().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
