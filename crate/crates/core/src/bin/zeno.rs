use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zeno::harness::checks::{run_suite, Suite};
use zeno::harness::emit::{self, Format};
use zeno::harness::{resolve_scenario, run_sweep, scenario_spectrum};
use zeno::zeno_static::NormKind;
use zeno::Error;

#[derive(Parser)]
#[command(name = "zeno", version, about = "Quantum Zeno convergence sweeps and self-checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence sweep and emit the error table
    Run {
        /// Builtin scenario name or path to a scenario JSON file
        #[arg(long)]
        scenario: String,
        /// Comma-separated interception counts, overriding the scenario sweep
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
        /// Error norm: proxy | rank1 | state_trace
        #[arg(long)]
        norm: Option<String>,
        /// CSV output (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Seed for randomized estimators
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run self-check suites
    Check {
        /// chernoff | lemma4 | projectors | telescoping | all
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Print the spectral report of a scenario's measurement
    Spectrum {
        #[arg(long)]
        scenario: String,
    },
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(e: &Error) -> ExitCode {
    ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_VALIDATION })
}

fn run(
    scenario: &str,
    ns: Option<Vec<usize>>,
    norm: Option<String>,
    out: Option<PathBuf>,
    json: Option<PathBuf>,
    plot: Option<PathBuf>,
    seed: Option<u64>,
) -> zeno::Result<()> {
    let mut cfg = resolve_scenario(scenario)?;
    if let Some(ns) = ns {
        cfg = cfg.with_sweep(ns)?;
    }
    if let Some(norm) = norm {
        cfg = cfg.with_norm_kind(norm.parse::<NormKind>()?)?;
    }
    if let Some(seed) = seed {
        cfg = cfg.with_seed(seed);
    }
    let result = run_sweep(&cfg)?;
    match out {
        Some(path) => emit::emit(&result, Format::Csv, path)?,
        None => std::io::stdout().write_all(emit::to_csv(&result).as_bytes())?,
    }
    if let Some(path) = json {
        emit::emit(&result, Format::Json, path)?;
    }
    if let Some(path) = plot {
        emit::emit(&result, Format::Svg, path)?;
    }
    eprintln!(
        "{}: {} points, final error {}, slope {}, {:.2}s",
        result.scenario,
        result.records.len(),
        result.final_error.map_or("n/a".to_string(), |e| format!("{e:.3e}")),
        result.slope.map_or("n/a".to_string(), |s| format!("{s:.3}")),
        result.metadata.wall_time_secs
    );
    Ok(())
}

fn check(suite: &str) -> zeno::Result<bool> {
    let mut all_passed = true;
    for s in Suite::parse_list(suite)? {
        let outcomes = run_suite(s)?;
        let failed = outcomes.iter().filter(|o| !o.passed).count();
        for o in &outcomes {
            println!("{o}");
        }
        println!("{}: {} cases, {} failed", s.name(), outcomes.len(), failed);
        all_passed &= failed == 0;
    }
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { scenario, ns, norm, out, json, plot, seed } => {
            run(&scenario, ns, norm, out, json, plot, seed).map(|_| true)
        }
        Command::Check { suite } => check(&suite),
        Command::Spectrum { scenario } => resolve_scenario(&scenario).and_then(|cfg| {
            let report = scenario_spectrum(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(true)
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VALIDATION),
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
