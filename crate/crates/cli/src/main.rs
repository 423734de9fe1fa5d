use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gridplan::assembly::{DualSelection, ScenarioOptions, ScenarioSpec};
use gridplan::policy::SOCIAL_CARBON_PRICE;
use gridplan::runner::{self, Inputs, MatrixOptions, MatrixRun, RunError};

const EXIT_VALIDATION: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "plan", version, about = "Capacity-expansion scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a set of scenarios and write their results.
    Run {
        #[arg(long)]
        inputs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated labels such as LE,ZO, or `all`.
        #[arg(long, default_value = "all", value_parser = parse_scenarios)]
        scenarios: Scenarios,
        /// $/tCO2 for the S regime.
        #[arg(long, default_value_t = SOCIAL_CARBON_PRICE)]
        carbon_price: f64,
        /// Concurrent scenario solves; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Which optimal dual to report when it is not unique.
        #[arg(long, default_value = "minmax", value_parser = parse_duals)]
        duals: DualSelection,
    },
    /// Load and cross-check an input directory without solving.
    Validate {
        #[arg(long)]
        inputs: PathBuf,
    },
    /// Recompute analytics from the solutions stored in a run directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone)]
struct Scenarios(Vec<ScenarioSpec>);

fn parse_scenarios(s: &str) -> Result<Scenarios, String> {
    ScenarioSpec::parse_list(s).map(Scenarios).map_err(|e| e.to_string())
}

fn parse_duals(s: &str) -> Result<DualSelection, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { inputs, out, scenarios, carbon_price, jobs, duals } => {
            if !(carbon_price >= 0.0 && carbon_price.is_finite()) {
                eprintln!("error: --carbon-price must be a non-negative number");
                return ExitCode::from(EXIT_VALIDATION);
            }
            let inputs = match Inputs::load(&inputs) {
                Ok(i) => i,
                Err(e) => return fail(e),
            };
            let options = MatrixOptions {
                scenario: ScenarioOptions { carbon_price, duals, ..ScenarioOptions::default() },
                jobs,
            };
            match runner::run_matrix(&inputs, &scenarios.0, &out, &options) {
                Ok(run) => finish(&run),
                Err(e) => fail(e),
            }
        }
        Command::Validate { inputs } => match Inputs::load(&inputs) {
            Ok(i) => {
                let b = &i.bundle;
                println!(
                    "ok: {} zones, {} timepoints, {} generators, {} storage, {} corridors; digest {}",
                    b.network.zones().len(),
                    b.calendar.len(),
                    b.generators.len(),
                    b.storage.len(),
                    b.network.corridors().len(),
                    i.digest
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Report { out } => match runner::report(&out) {
            Ok(run) => finish(&run),
            Err(e) => fail(e),
        },
    }
}

fn finish(run: &MatrixRun) -> ExitCode {
    for r in &run.manifest.records {
        match r.objective {
            Some(obj) => println!("{} {} objective {} $/yr", r.label, r.status, runner::fmt_num(obj)),
            None => println!("{} {}: {}", r.label, r.status, r.message.as_deref().unwrap_or("")),
        }
    }
    if run.manifest.all_optimal() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INFEASIBLE)
    }
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        RunError::Input(_) => ExitCode::from(EXIT_VALIDATION),
        _ => ExitCode::FAILURE,
    }
}
