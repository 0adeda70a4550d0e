//! Experiment implementations. Each runner builds its cast from the
//! scenario, exercises the corresponding machinery, and reports one check
//! row per verified claim; module errors become failed checks, never
//! crashes. Artifacts (CSV dumps, certificate JSON) go to the output
//! directory when one is given.

use std::path::Path;

use grassmannian::ambient::{AmbientManifold, LevelSetField, TangentVector};
use grassmannian::atlas;
use grassmannian::circle_map::CircleMap;
use grassmannian::embedding::{
    act, local_section, project_p, project_p_differential, trivialization_gauge, trivialize,
    trivialize_inverse, DiscreteEmbedding,
};
use grassmannian::error::Result;
use grassmannian::generators;
use grassmannian::isotopy::{lift_path, transport, AmbientFlow, GrassmannPath};
use grassmannian::submanifold::{hausdorff_distance, NormalSection, OrientedSubmanifold};
use grassmannian::tubular::TubularChart;
use grassmannian::{point, Point};

use crate::report::{Check, ScenarioReport};
use crate::scenario::{CurveGenerator, CurveSpec, Experiment, Scenario};

/// Run one scenario; errors inside checks are captured into the report.
pub fn run_scenario(scenario: &Scenario, out: Option<&Path>) -> ScenarioReport {
    let checks = match scenario.experiment {
        Experiment::ChartTransition => chart_transition(scenario, out),
        Experiment::ProjectionDiff => projection_diff(scenario),
        Experiment::Trivialize => trivialize_experiment(scenario, out),
        Experiment::LiftPath => lift_path_experiment(scenario),
        Experiment::ExtendIsotopy => extend_isotopy(scenario, out),
        Experiment::Transport => transport_experiment(scenario, out),
        Experiment::VerifyAll => Ok(vec![Check::failure(
            "experiment",
            "verify-all is a suite tag, not a single scenario",
        )]),
    };
    let checks = match checks {
        Ok(c) => c,
        Err(e) => vec![Check::failure("scenario", e)],
    };
    ScenarioReport::new(
        scenario.id.clone(),
        scenario.experiment.tag(),
        scenario.seed,
        scenario.resolution,
        checks,
    )
}

fn write_artifact(out: Option<&Path>, name: &str, content: &str) {
    if let Some(dir) = out {
        let path = dir.join(name);
        if let Err(e) = std::fs::write(&path, content) {
            eprintln!("warning: could not write artifact {}: {e}", path.display());
        }
    }
}

fn default_pair(scenario: &Scenario) -> (CurveSpec, CurveSpec) {
    let primary = scenario.curve("primary").cloned().unwrap_or(CurveSpec {
        role: "primary".into(),
        generator: CurveGenerator::Circle {
            radius: 1.0,
            center: [0.0, 0.0],
        },
    });
    let secondary = scenario.curve("secondary").cloned().unwrap_or(CurveSpec {
        role: "secondary".into(),
        generator: CurveGenerator::Circle {
            radius: 1.0,
            center: [0.1, 0.0],
        },
    });
    (primary, secondary)
}

/// Atlas checks: set-consistency of the transition between two charts,
/// recovery of sections by membership, separation of orientation-reversed
/// images, and invariance of chart images under constant metric rescaling.
fn chart_transition(scenario: &Scenario, out: Option<&Path>) -> Result<Vec<Check>> {
    let tol = &scenario.tolerances;
    let manifold = scenario.ambient.build()?;
    let m = scenario.resolution;
    let (primary, secondary) = default_pair(scenario);
    let sigma1 = primary.generator.build(&manifold, m, tol)?;
    let sigma2 = secondary.generator.build(&manifold, m, tol)?;
    let chart1 = TubularChart::new(sigma1, tol)?;
    let chart2 = TubularChart::new(sigma2, tol)?;
    let mut rng = generators::seeded_rng(scenario.seed);
    let amp = scenario.section_amplitude * chart1.radius();

    let mut checks = Vec::new();
    let mut worst_set = 0.0_f64;
    let mut worst_recovery = 0.0_f64;
    let mut orientation_ok = true;
    let mut separation_ok = true;
    let mut last_transition: Option<(NormalSection, Vec<f64>)> = None;
    for trial in 0..scenario.trials {
        let s = generators::random_fourier_section(chart1.sigma(), &mut rng, amp, 6)?;
        let w1 = atlas::chart_apply(&chart1, &s, tol)?;
        // membership recovery and orientation separation on the first chart
        match atlas::chart_contains(&chart1, &w1, tol) {
            Some(rec) => worst_recovery = worst_recovery.max(rec.max_difference(&s)),
            None => {
                checks.push(Check::failure(
                    format!("membership_recovery_trial_{trial}"),
                    "chart lost its own image",
                ));
                continue;
            }
        }
        if atlas::chart_contains(&chart1, &w1.reverse_orientation(), tol).is_some() {
            separation_ok = false;
        }
        // transition into the second chart
        let corr = atlas::correspondence(&chart1, &s, &chart2, tol)?;
        let cp2 = atlas::transition(&chart1, &s, &chart2, tol)?;
        let w2 = atlas::chart_apply(&chart2, &cp2.section, tol)?;
        worst_set = worst_set.max(hausdorff_distance(&w1, &w2));
        orientation_ok &= w1.orientation() == w2.orientation();
        last_transition = Some((cp2.section, corr.derivative));
    }
    checks.push(Check::below(
        "transition_set_consistency_hausdorff",
        worst_set,
        1e-6,
    ));
    checks.push(Check::boolean("transition_orientation_agrees", orientation_ok));
    checks.push(Check::below(
        "membership_recovers_sections",
        worst_recovery,
        1e-8,
    ));
    checks.push(
        Check::boolean("reversed_images_separated", separation_ok).with_detail(format!(
            "{} random trials, orientation-reversed images never contained",
            scenario.trials
        )),
    );

    // metric independence: the same sections under g and 4g induce the
    // same point sets
    let scaled = manifold.clone().with_metric_scale(4.0);
    let sigma1s = primary.generator.build(&scaled, m, tol)?;
    let chart1s = TubularChart::new(sigma1s, tol)?;
    let mut worst_metric = 0.0_f64;
    for _ in 0..10 {
        let s = generators::random_fourier_section(chart1.sigma(), &mut rng, amp, 6)?;
        let w = atlas::chart_apply(&chart1, &s, tol)?;
        let s_scaled = NormalSection::new(chart1s.sigma(), s.vectors().to_vec())?;
        let w_scaled = atlas::chart_apply(&chart1s, &s_scaled, tol)?;
        worst_metric = worst_metric.max(hausdorff_distance(&w, &w_scaled));
    }
    checks.push(Check::below(
        "metric_rescaling_preserves_images",
        worst_metric,
        1e-9,
    ));
    checks.push(Check::below(
        "scaled_chart_radius_ratio_error",
        (chart1s.radius() - 2.0 * chart1.radius()).abs(),
        1e-9,
    ));

    // artifact: per-sample transition report for the last trial
    if let Some((section, derivative)) = last_transition {
        let mut csv = String::from("theta2,s_components,correspondence_derivative\n");
        for (i, &theta) in chart2.sigma().params().iter().enumerate() {
            let v = &section.vectors()[i];
            let comps: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            csv.push_str(&format!(
                "{theta},{},{}\n",
                comps.join(";"),
                derivative[i]
            ));
        }
        write_artifact(out, &format!("{}_transition.csv", scenario.id), &csv);
        let summary = serde_json::json!({
            "scenario": scenario.id,
            "certificate": {
                "monotone": true,
                "set_consistency_max_hausdorff": worst_set,
                "membership_max_error": worst_recovery,
            },
        });
        write_artifact(
            out,
            &format!("{}_transition_summary.json", scenario.id),
            &serde_json::to_string_pretty(&summary).unwrap(),
        );
    }
    Ok(checks)
}

/// Chart-coordinate finite differences of the projection against the
/// orthogonal projection of the velocity, for the three named families.
fn projection_diff(scenario: &Scenario) -> Result<Vec<Check>> {
    let tol = &scenario.tolerances;
    let manifold = scenario.ambient.build()?;
    let m = scenario.resolution;
    let sigma = generators::circle(&manifold, m, 1.0, &[0.0, 0.0], tol)?;
    let mut checks = Vec::new();

    type Motion = Box<dyn Fn(f64, f64) -> Point>;
    type Velocity = Box<dyn Fn(f64, f64) -> Point>;
    let families: Vec<(&str, f64, Motion, Velocity)> = vec![
        (
            "radial",
            0.0,
            Box::new(|t, th| point(&[(1.0 + 0.3 * t) * th.cos(), (1.0 + 0.3 * t) * th.sin()])),
            Box::new(|_, th| point(&[0.3 * th.cos(), 0.3 * th.sin()])),
        ),
        (
            "rotational",
            0.0,
            Box::new(|t, th| point(&[(th + t).cos(), (th + t).sin()])),
            Box::new(|t, th| point(&[-(th + t).sin(), (th + t).cos()])),
        ),
        (
            "translational",
            0.5,
            Box::new(|t, th| point(&[th.cos() + t, th.sin()])),
            Box::new(|_, _| point(&[1.0, 0.0])),
        ),
    ];

    for (name, t0, motion, velocity) in families {
        let family = generators::family_from_functions(
            &sigma,
            9,
            |t, th| motion(t0 - 0.5 + t, th),
            |t, th| velocity(t0 - 0.5 + t, th),
            tol,
        )?;
        let (w, analytic) = project_p_differential(&family, 0.5, tol)?;
        if name == "rotational" {
            let sup = analytic.sup_norm(&manifold);
            checks.push(Check::below("rotational_zero_section", sup, 1e-9));
        }
        let chart = TubularChart::new(w, tol)?;
        let analytic_flat: Vec<f64> = analytic
            .vectors()
            .iter()
            .flat_map(|v| v.iter().copied().collect::<Vec<_>>())
            .collect();
        let frame_at = |time: f64| -> Result<DiscreteEmbedding> {
            let images: Vec<Point> = sigma.params().iter().map(|&th| motion(time, th)).collect();
            DiscreteEmbedding::new(sigma.clone(), images, tol)
        };
        let mut errors = Vec::new();
        for h in [1e-2, 5e-3, 2.5e-3] {
            let sections = |time: f64| -> Result<Vec<f64>> {
                let w = project_p(&frame_at(time)?, tol)?;
                let s = atlas::membership(&chart, &w, tol)?;
                Ok(s.vectors()
                    .iter()
                    .flat_map(|v| v.iter().copied().collect::<Vec<_>>())
                    .collect())
            };
            let plus = sections(t0 + h)?;
            let minus = sections(t0 - h)?;
            let err = plus
                .iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .zip(&analytic_flat)
                .map(|(fd, an)| (fd - an).abs())
                .fold(0.0_f64, f64::max);
            errors.push(err);
        }
        // converged to the noise floor counts as converged; otherwise the
        // successive errors must shrink at least quadratically
        let floor = 1e-9;
        let mut min_order = f64::INFINITY;
        for w in errors.windows(2) {
            if w[0] < floor && w[1] < floor {
                continue;
            }
            min_order = min_order.min((w[0] / w[1]).log2());
        }
        if min_order.is_infinite() {
            checks.push(
                Check::below(
                    format!("{name}_fd_error_at_floor"),
                    errors[2],
                    floor,
                )
                .with_detail(format!("errors {errors:?}")),
            );
        } else {
            checks.push(
                Check::at_least(format!("{name}_fd_convergence_order"), min_order, 1.9)
                    .with_detail(format!("errors {errors:?}")),
            );
        }
        checks.push(Check::below(
            format!("{name}_fd_matches_projection"),
            errors[2],
            1e-4,
        ));
    }
    Ok(checks)
}

/// Principal-bundle identities over random pairs: reconstruction, roundtrip
/// and equivariance of the local trivialization.
fn trivialize_experiment(scenario: &Scenario, out: Option<&Path>) -> Result<Vec<Check>> {
    let tol = &scenario.tolerances;
    let manifold = scenario.ambient.build()?;
    let m = scenario.resolution;
    let sigma = generators::circle(&manifold, m, 1.0, &[0.0, 0.0], tol)?;
    let chart = TubularChart::new(sigma.clone(), tol)?;
    let f = DiscreteEmbedding::identity_inclusion(&sigma, tol)?;
    let mut rng = generators::seeded_rng(scenario.seed);

    let mut worst_reconstruction = 0.0_f64;
    let mut worst_roundtrip_section = 0.0_f64;
    let mut worst_roundtrip_gauge = 0.0_f64;
    let mut worst_equivariance = 0.0_f64;
    let circ_dev = |a: &CircleMap, b: &CircleMap| -> f64 {
        a.lift()
            .iter()
            .zip(b.lift())
            .map(|(x, y)| {
                let mut d = (x - y).rem_euclid(std::f64::consts::TAU);
                if d > std::f64::consts::PI {
                    d = std::f64::consts::TAU - d;
                }
                d
            })
            .fold(0.0_f64, f64::max)
    };
    let mut last_gauge: Option<(CircleMap, f64)> = None;
    for _ in 0..scenario.trials {
        let s = generators::random_fourier_section(
            chart.sigma(),
            &mut rng,
            0.25 * chart.radius(),
            5,
        )?;
        let phi = generators::random_fourier_diffeo(m, &mut rng, 0.4);
        let g = trivialize_inverse(&chart, &s, &phi, &f, tol)?;

        // reconstruction identity
        let gauge = trivialization_gauge(&g, &f, &chart, tol)?;
        let wg = project_p(&g, tol)?;
        let s_rec = atlas::membership(&chart, &wg, tol)?;
        let rebuilt = act(&local_section(&chart, &s_rec, &f, tol)?, &gauge, tol)?;
        let rec_err = rebuilt.max_image_distance(&g);
        worst_reconstruction = worst_reconstruction.max(rec_err);

        // trivialization roundtrip
        let (cp, gauge2) = trivialize(&g, &f, &chart, tol)?;
        worst_roundtrip_section = worst_roundtrip_section.max(cp.section.max_difference(&s));
        worst_roundtrip_gauge = worst_roundtrip_gauge.max(circ_dev(&gauge2, &phi));

        // equivariance under a further reparametrization
        let psi = generators::random_fourier_diffeo(m, &mut rng, 0.3);
        let g_psi = act(&g, &psi, tol)?;
        let (cp2, gauge3) = trivialize(&g_psi, &f, &chart, tol)?;
        let composed = gauge2.compose(&psi)?;
        worst_equivariance = worst_equivariance
            .max(circ_dev(&gauge3, &composed))
            .max(cp2.section.max_difference(&cp.section));
        last_gauge = Some((gauge, rec_err));
    }
    if let Some((gauge, rec_err)) = last_gauge {
        let artifact = serde_json::json!({
            "scenario": scenario.id,
            "chart": "unit-circle",
            "gauge_samples": gauge.values(),
            "reconstruction_error": rec_err,
        });
        write_artifact(
            out,
            &format!("{}_trivialization.json", scenario.id),
            &serde_json::to_string_pretty(&artifact).unwrap(),
        );
        write_artifact(out, &format!("{}_gauge.csv", scenario.id), &gauge.to_csv());
    }
    Ok(vec![
        Check::below("reconstruction_identity", worst_reconstruction, 1e-8),
        Check::below("trivialize_roundtrip_section", worst_roundtrip_section, 1e-8),
        Check::below("trivialize_roundtrip_gauge", worst_roundtrip_gauge, 1e-8),
        Check::below("trivialize_equivariance", worst_equivariance, 1e-9),
    ])
}

/// Lift a two-node path of curves to a path of embeddings and check the
/// endpoint contract.
fn lift_path_experiment(scenario: &Scenario) -> Result<Vec<Check>> {
    let tol = &scenario.tolerances;
    let manifold = scenario.ambient.build()?;
    let m = scenario.resolution;
    let sigma0 = match scenario.curve("primary") {
        Ok(spec) => spec.generator.build(&manifold, m, tol)?,
        Err(_) => generators::circle(&manifold, m, 1.0, &[0.0, 0.0], tol)?,
    };
    let sigma1 = match scenario.curve("target") {
        Ok(spec) => spec.generator.build(&manifold, m, tol)?,
        Err(_) => generators::ellipse(&manifold, m, 1.2, 0.9, &[0.0, 0.0], tol)?,
    };
    let mid = generators::circle(&manifold, m, 1.1, &[0.0, 0.0], tol)?;
    let path = GrassmannPath::with_auto_witnesses(
        vec![sigma0.clone(), mid, sigma1.clone()],
        tol,
    )?;
    let gamma = lift_path(&path, tol)?;
    let start = project_p(&gamma.family.frames()[0], tol)?;
    let end = project_p(gamma.family.frames().last().unwrap(), tol)?;
    let chart1 = TubularChart::new(sigma1.clone(), tol)?;
    let start_err = hausdorff_distance(&start, &sigma0);
    let end_err = hausdorff_distance(&end, &sigma1);
    Ok(vec![
        Check::below("lift_start_matches_source", start_err, tol.lift_tol),
        Check::below("lift_end_matches_target", end_err, tol.lift_tol),
        Check::boolean(
            "lift_end_orientation_matches",
            atlas::chart_contains(&chart1, &end, tol).is_some(),
        ),
        Check::boolean(
            "lift_frames_all_embeddings",
            gamma
                .family
                .frames()
                .iter()
                .all(|f| grassmannian::embedding::is_embedding(f, tol).ok),
        ),
    ])
}

/// Geodesic-integrator order certificate plus two closed-form flows.
fn extend_isotopy(scenario: &Scenario, out: Option<&Path>) -> Result<Vec<Check>> {
    let tol = &scenario.tolerances;
    let mut checks = Vec::new();

    // integrator order on the level-set sphere against great circles
    let level = AmbientManifold::level_set(LevelSetField::Sphere { radius: 1.0 });
    let x = point(&[1.0, 0.0, 0.0]);
    let dir = point(&[0.0, 1.1, 0.9]).normalize() * 1.3;
    let v = TangentVector {
        base: x.clone(),
        components: dir.clone(),
    };
    let r = dir.norm();
    let exact = r.cos() * &x + r.sin() * dir.normalize();
    let default_exp = level.exp(&v, tol)?;
    checks.push(Check::below(
        "geodesic_exp_error_at_default_steps",
        (&default_exp - &exact).norm(),
        1e-8,
    ));
    let mut errors = Vec::new();
    for steps in [16, 32, 64, 128] {
        let p = level.exp_fixed_steps(&v, steps, tol)?;
        errors.push((p - &exact).norm());
    }
    let mut min_order = f64::INFINITY;
    for w in errors.windows(2) {
        min_order = min_order.min((w[0] / w[1]).log2());
    }
    checks.push(
        Check::at_least("geodesic_integrator_order", min_order, 3.7)
            .with_detail(format!("errors {errors:?}")),
    );

    // translation flow: endpoint and exact support
    let manifold = scenario.ambient.build()?;
    let m = scenario.resolution;
    let sigma = generators::circle(&manifold, m, 1.0, &[0.0, 0.0], tol)?;
    let family = generators::translation_family(&sigma, &[0.5, 0.0], 33, tol)?;
    let flow = AmbientFlow::extend(family, tol)?;
    let flowed = flow.carrier_trajectory().last().unwrap().clone();
    let target = generators::circle(&manifold, m, 1.0, &[0.5, 0.0], tol)?;
    let moved = OrientedSubmanifold::build(&manifold, flowed, 1, tol)?;
    checks.push(Check::below(
        "translation_flow_endpoint",
        hausdorff_distance(&moved, &target),
        1e-6,
    ));
    let far: Vec<Point> = vec![point(&[3.0, 0.0]), point(&[0.0, -3.0]), point(&[-2.5, 2.5])];
    let far_out = flow.flow_points(&far, 0.0, 1.0)?;
    checks.push(Check::boolean(
        "far_points_exactly_fixed",
        far.iter().zip(&far_out).all(|(a, b)| a == b),
    ));
    checks.push(Check::below(
        "translation_flow_tracking",
        flow.certificate().max_tracking_error,
        tol.track_tol,
    ));

    // radial flow: closed-form endpoint and positive jacobian probes
    let family = generators::radial_growth_family(&sigma, 0.3, 33, tol)?;
    let flow = AmbientFlow::extend(family, tol)?;
    let flowed = flow.carrier_trajectory().last().unwrap();
    let worst_radius = flowed
        .iter()
        .map(|p| (p.norm() - 1.3).abs())
        .fold(0.0_f64, f64::max);
    checks.push(Check::below("radial_flow_endpoint", worst_radius, 1e-5));
    let probes = vec![point(&[1.0, 0.0]), point(&[0.0, 1.1]), point(&[-0.95, 0.1])];
    let mut min_det = f64::INFINITY;
    for dets in flow.jacobian_dets_batch(&probes, 1e-5)? {
        for det in dets {
            min_det = min_det.min(det);
        }
    }
    checks.push(Check::at_least("radial_flow_jacobian_probes", min_det, 0.0));

    // flow certificate artifact
    let cert = serde_json::json!({
        "scenario": scenario.id,
        "tolerances": { "flow_tol": tol.flow_tol, "track_tol": tol.track_tol },
        "max_tracking_error": flow.certificate().max_tracking_error,
        "jacobian_probe_min": min_det,
        "rho_min_seen": flow.certificate().rho_min_seen,
    });
    write_artifact(
        out,
        &format!("{}_flow_certificate.json", scenario.id),
        &serde_json::to_string_pretty(&cert).unwrap(),
    );
    // optional trajectory dump of the carrier samples
    if out.is_some() {
        let mut csv = String::from("time,sample,x0,x1\n");
        for (k, snapshot) in flow.carrier_trajectory().iter().enumerate() {
            let t = flow.family().times()[k];
            for (i, p) in snapshot.iter().enumerate().step_by(16) {
                csv.push_str(&format!("{t},{i},{},{}\n", p[0], p[1]));
            }
        }
        write_artifact(out, &format!("{}_trajectories.csv", scenario.id), &csv);
    }
    Ok(checks)
}

/// Full homogeneity run: transport the primary curve onto the target.
fn transport_experiment(scenario: &Scenario, out: Option<&Path>) -> Result<Vec<Check>> {
    let tol = &scenario.tolerances;
    let manifold = scenario.ambient.build()?;
    let m = scenario.resolution;
    let sigma0 = match scenario.curve("primary") {
        Ok(spec) => spec.generator.build(&manifold, m, tol)?,
        Err(_) => generators::circle(&manifold, m, 1.0, &[0.0, 0.0], tol)?,
    };
    let sigma1 = match scenario.curve("target") {
        Ok(spec) => spec.generator.build(&manifold, m, tol)?,
        Err(_) => generators::ellipse(&manifold, m, 1.2, 0.9, &[0.3, 0.1], tol)?,
    };
    let result = transport(&sigma0, &sigma1, None, tol)?;
    let cert = &result.certificate;
    let mut checks = vec![
        Check::below(
            "transport_endpoint_hausdorff",
            cert.endpoint_hausdorff,
            tol.transport_tol,
        ),
        Check::boolean("transport_orientation_matched", cert.orientation_matched),
        Check::below(
            "transport_tracking_error",
            cert.max_tracking_error,
            tol.track_tol,
        ),
        Check::at_least("transport_jacobian_probes", cert.min_jacobian_det, 0.0),
    ];
    // points beyond the bump support never move
    let far: Vec<Point> = vec![point(&[4.0, 0.0]), point(&[0.0, 4.0]), point(&[-4.0, -4.0])];
    let far_out = result.flow.flow_points(&far, 0.0, 1.0)?;
    checks.push(Check::boolean(
        "transport_far_points_exactly_fixed",
        far.iter().zip(&far_out).all(|(a, b)| a == b),
    ));
    let cert_json = serde_json::json!({
        "scenario": scenario.id,
        "tolerances": {
            "transport_tol": tol.transport_tol,
            "track_tol": tol.track_tol,
            "flow_tol": tol.flow_tol,
        },
        "endpoint_hausdorff": cert.endpoint_hausdorff,
        "max_tracking_error": cert.max_tracking_error,
        "min_jacobian_det": cert.min_jacobian_det,
        "segments": cert.segments,
    });
    write_artifact(
        out,
        &format!("{}_transport_certificate.json", scenario.id),
        &serde_json::to_string_pretty(&cert_json).unwrap(),
    );
    Ok(checks)
}
