//! The shipped default suite and the suite runner.

use std::path::Path;

use crate::experiments::run_scenario;
use crate::report::SuiteReport;
use crate::scenario::{
    AmbientSpec, CurveGenerator, CurveSpec, Experiment, Scenario,
};
use grassmannian::Tolerances;

fn base(id: &str, experiment: Experiment, seed: u64, resolution: usize) -> Scenario {
    Scenario {
        id: id.into(),
        experiment,
        seed,
        resolution,
        ambient: AmbientSpec::Flat { dim: 2 },
        curves: Vec::new(),
        trials: 20,
        section_amplitude: 0.3,
        tolerances: Tolerances::default(),
    }
}

fn curve(role: &str, generator: CurveGenerator) -> CurveSpec {
    CurveSpec {
        role: role.into(),
        generator,
    }
}

/// The scenarios `verify-all` runs by default, and the per-experiment
/// defaults of the single-experiment subcommands.
pub fn default_suite(seed: u64) -> Vec<Scenario> {
    let mut chart = base("chart-transition-offset-circles", Experiment::ChartTransition, seed, 256);
    chart.curves = vec![
        curve(
            "primary",
            CurveGenerator::Circle {
                radius: 1.0,
                center: [0.0, 0.0],
            },
        ),
        curve(
            "secondary",
            CurveGenerator::Circle {
                radius: 1.0,
                center: [0.1, 0.0],
            },
        ),
    ];
    chart.trials = 100; // covers the separation sweep

    let diff = base("projection-diff-circle-families", Experiment::ProjectionDiff, seed, 128);

    let mut triv = base("trivialize-unit-circle", Experiment::Trivialize, seed, 256);
    triv.trials = 20;

    let mut lift = base("lift-circle-to-ellipse", Experiment::LiftPath, seed, 256);
    lift.curves = vec![
        curve(
            "primary",
            CurveGenerator::Circle {
                radius: 1.0,
                center: [0.0, 0.0],
            },
        ),
        curve(
            "target",
            CurveGenerator::Ellipse {
                a: 1.2,
                b: 0.9,
                center: [0.0, 0.0],
            },
        ),
    ];

    let extend = base("extend-isotopy-circle-flows", Experiment::ExtendIsotopy, seed, 128);

    let mut trans = base("transport-circle-to-offset-ellipse", Experiment::Transport, seed, 256);
    trans.curves = vec![
        curve(
            "primary",
            CurveGenerator::Circle {
                radius: 1.0,
                center: [0.0, 0.0],
            },
        ),
        curve(
            "target",
            CurveGenerator::Ellipse {
                a: 1.2,
                b: 0.9,
                center: [0.3, 0.1],
            },
        ),
    ];

    vec![chart, diff, triv, lift, extend, trans]
}

/// Default scenario for a single-experiment subcommand.
pub fn default_scenario(experiment: Experiment, seed: u64) -> Option<Scenario> {
    default_suite(seed)
        .into_iter()
        .find(|s| s.experiment == experiment)
}

/// Run all scenarios and aggregate; deterministic given the seeds.
pub fn verify_suite(scenarios: &[Scenario], out: Option<&Path>) -> SuiteReport {
    let reports = scenarios
        .iter()
        .map(|s| {
            let started = std::time::Instant::now();
            let report = run_scenario(s, out);
            eprintln!(
                "{}: {} in {:.2?}",
                s.id,
                if report.pass { "pass" } else { "FAIL" },
                started.elapsed()
            );
            report
        })
        .collect();
    SuiteReport::new("default", reports)
}
