use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use grassmannian::GeomError;
use grassmannian_cli::report::SuiteReport;
use grassmannian_cli::scenario::{Experiment, Scenario, Suite};
use grassmannian_cli::{default_scenario, default_suite, run_scenario, verify_suite};

/// Verification harness for discrete curve spaces: tubular charts, the
/// embedding bundle, and isotopy transport, checked at explicit tolerances.
#[derive(Parser)]
#[command(name = "grassmannian", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config (TOML); defaults to the shipped scenario for the
    /// chosen experiment. `verify-all` expects a suite file instead.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the JSON report and CSV artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the sample resolution m.
    #[arg(long)]
    resolution: Option<usize>,
    /// Print the report JSON to stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Chart transitions between overlapping tubular charts
    ChartTransition(RunArgs),
    /// Differential of the projection against chart-coordinate differences
    ProjectionDiff(RunArgs),
    /// Local trivialization identities of the embedding bundle
    Trivialize(RunArgs),
    /// Lift a path of curves to a path of embeddings
    LiftPath(RunArgs),
    /// Extend families to ambient flows; geodesic integrator order
    ExtendIsotopy(RunArgs),
    /// Transport one curve onto another by an ambient flow
    Transport(RunArgs),
    /// Run the whole scenario suite
    VerifyAll(RunArgs),
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::ChartTransition(_) => Experiment::ChartTransition,
            Command::ProjectionDiff(_) => Experiment::ProjectionDiff,
            Command::Trivialize(_) => Experiment::Trivialize,
            Command::LiftPath(_) => Experiment::LiftPath,
            Command::ExtendIsotopy(_) => Experiment::ExtendIsotopy,
            Command::Transport(_) => Experiment::Transport,
            Command::VerifyAll(_) => Experiment::VerifyAll,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::ChartTransition(a)
            | Command::ProjectionDiff(a)
            | Command::Trivialize(a)
            | Command::LiftPath(a)
            | Command::ExtendIsotopy(a)
            | Command::Transport(a)
            | Command::VerifyAll(a) => a,
        }
    }
}

fn apply_overrides(scenario: &mut Scenario, args: &RunArgs) {
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(m) = args.resolution {
        scenario.resolution = m;
    }
}

fn load_scenario(experiment: Experiment, args: &RunArgs) -> Result<Scenario, GeomError> {
    let mut scenario = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                GeomError::config("config", format!("{}: {e}", path.display()))
            })?;
            let s = Scenario::from_toml(&text)?;
            if s.experiment != experiment {
                return Err(GeomError::config(
                    "experiment",
                    format!(
                        "config is tagged `{}` but the subcommand is `{}`",
                        s.experiment.tag(),
                        experiment.tag()
                    ),
                ));
            }
            s
        }
        None => default_scenario(experiment, args.seed.unwrap_or(42))
            .ok_or_else(|| GeomError::config("experiment", "no default scenario"))?,
    };
    apply_overrides(&mut scenario, args);
    scenario.validate()?;
    Ok(scenario)
}

fn load_suite(args: &RunArgs) -> Result<Vec<Scenario>, GeomError> {
    let mut scenarios = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                GeomError::config("config", format!("{}: {e}", path.display()))
            })?;
            Suite::from_toml(&text)?.scenarios
        }
        None => default_suite(args.seed.unwrap_or(42)),
    };
    for s in &mut scenarios {
        apply_overrides(s, args);
        s.validate()?;
    }
    Ok(scenarios)
}

fn emit(report: &SuiteReport, args: &RunArgs) -> anyhow::Result<()> {
    let json = report.to_json();
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        let path = dir.join("report.json");
        std::fs::write(&path, &json)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if args.json {
        println!("{json}");
    } else {
        for scenario in &report.scenarios {
            for check in &scenario.checks {
                let status = if check.passed { "pass" } else { "FAIL" };
                match (check.value, check.tolerance) {
                    (Some(v), Some(t)) => println!(
                        "{status} {} :: {} = {v:.3e} ({} {t:.3e})",
                        scenario.id, check.name, check.comparison
                    ),
                    _ => println!("{status} {} :: {}", scenario.id, check.name),
                }
            }
        }
        println!("suite: {}", if report.pass { "pass" } else { "FAIL" });
    }
    Ok(())
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let experiment = cli.command.experiment();
    let args = cli.command.args();
    let out_dir = args.out.as_deref();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
    }
    let report = if experiment == Experiment::VerifyAll {
        match load_suite(args) {
            Ok(scenarios) => verify_suite(&scenarios, out_dir),
            Err(e) => return config_failure(e),
        }
    } else {
        match load_scenario(experiment, args) {
            Ok(scenario) => SuiteReport::new("single", vec![run_scenario(&scenario, out_dir)]),
            Err(e) => return config_failure(e),
        }
    };
    emit(&report, args)?;
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn config_failure(e: GeomError) -> anyhow::Result<ExitCode> {
    eprintln!("configuration error: {e}");
    Ok(ExitCode::from(2))
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
