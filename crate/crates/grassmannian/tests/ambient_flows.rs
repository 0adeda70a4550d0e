//! Ambient-flow extension of isotopies: support, identity at time zero,
//! tracking, group property, orientation transport, and the transport
//! certificate on closed-form targets.

use grassmannian::ambient::AmbientManifold;
use grassmannian::generators;
use grassmannian::isotopy::{
    lift_path, smooth_family_from_path, transport, AmbientFlow, EmbeddingPath, GrassmannPath,
};
use grassmannian::submanifold::{hausdorff_distance, OrientedSubmanifold};
use grassmannian::{atlas, point, Point, Tolerances, TubularChart};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn unit_circle(m: usize) -> OrientedSubmanifold {
    let amb = AmbientManifold::flat(2);
    generators::circle(&amb, m, 1.0, &[0.0, 0.0], &tol()).unwrap()
}

#[test]
fn constant_family_extends_to_the_identity_flow() {
    let t = tol();
    let sigma = unit_circle(64);
    let family = generators::family_from_functions(
        &sigma,
        5,
        |_, th| point(&[th.cos(), th.sin()]),
        |_, _| point(&[0.0, 0.0]),
        &t,
    )
    .unwrap();
    let flow = AmbientFlow::extend(family, &t).unwrap();
    assert_eq!(flow.certificate().max_tracking_error, 0.0);
    let probes = vec![point(&[1.1, 0.2]), point(&[0.3, 0.0]), point(&[5.0, 5.0])];
    let out = flow.flow_points(&probes, 0.0, 1.0).unwrap();
    for (a, b) in probes.iter().zip(&out) {
        assert_eq!(a, b, "identity flow must fix every point exactly");
    }
}

#[test]
fn translation_flow_carries_the_circle_and_fixes_far_points() {
    let t = tol();
    let sigma = unit_circle(128);
    let family = generators::translation_family(&sigma, &[0.5, 0.0], 33, &t).unwrap();
    let flow = AmbientFlow::extend(family, &t).unwrap();
    let flowed = flow.carrier_trajectory().last().unwrap();
    let amb = AmbientManifold::flat(2);
    let target = generators::circle(&amb, 128, 1.0, &[0.5, 0.0], &t).unwrap();
    let moved = OrientedSubmanifold::build(&amb, flowed.clone(), 1, &t).unwrap();
    let d = hausdorff_distance(&moved, &target);
    assert!(d < 1e-6, "endpoint error {d}");
    // points beyond the bump's outer radius never move, exactly
    let far = vec![point(&[3.0, 0.0]), point(&[0.0, -3.0]), point(&[-2.5, 2.5])];
    let out = flow.flow_points(&far, 0.0, 1.0).unwrap();
    for (a, b) in far.iter().zip(&out) {
        assert_eq!(a, b);
    }
}

#[test]
fn radial_flow_matches_the_closed_form_and_has_positive_jacobians() {
    let t = tol();
    let sigma = unit_circle(128);
    let family = generators::radial_growth_family(&sigma, 0.3, 33, &t).unwrap();
    let flow = AmbientFlow::extend(family, &t).unwrap();
    // oracle: radial transport sends the unit circle to radius 1.3
    let flowed = flow.carrier_trajectory().last().unwrap();
    for p in flowed {
        assert!((p.norm() - 1.3).abs() < 1e-5, "radius {}", p.norm());
    }
    for base in [point(&[1.0, 0.0]), point(&[0.0, 1.1]), point(&[-0.95, 0.1])] {
        let dets = flow.jacobian_dets(&base, 1e-5).unwrap();
        for det in dets {
            assert!(det > 0.0, "jacobian probe at {base:?} gave {det}");
        }
    }
}

#[test]
fn flow_satisfies_the_group_property_at_tolerance() {
    let t = tol();
    let sigma = unit_circle(64);
    let family = generators::translation_family(&sigma, &[0.4, 0.1], 33, &t).unwrap();
    let flow = AmbientFlow::extend(family, &t).unwrap();
    let probes: Vec<Point> = vec![
        point(&[1.05, 0.0]),
        point(&[0.0, 1.02]),
        point(&[0.7, 0.7]),
        point(&[1.3, -0.4]),
    ];
    let direct = flow.flow_points(&probes, 0.0, 1.0).unwrap();
    let half = flow.flow_points(&probes, 0.0, 0.5).unwrap();
    let rest = flow.flow_points(&half, 0.5, 1.0).unwrap();
    for (a, b) in direct.iter().zip(&rest) {
        assert!((a - b).norm() < 2.0 * t.flow_tol, "group property violated");
    }
}

#[test]
fn tracking_stays_within_tolerance_along_lifted_paths() {
    let t = tol();
    let amb = AmbientManifold::flat(2);
    let sigma0 = unit_circle(128);
    let sigma1 = generators::circle(&amb, 128, 1.25, &[0.05, 0.0], &t).unwrap();
    let path = GrassmannPath::with_auto_witnesses(vec![sigma0, sigma1], &t).unwrap();
    let gamma = lift_path(&path, &t).unwrap();
    let family = smooth_family_from_path(&gamma, 33, &t).unwrap();
    let flow = AmbientFlow::extend(family, &t).unwrap();
    assert!(flow.certificate().max_tracking_error < t.track_tol);
}

#[test]
fn transport_to_itself_is_the_identity_flow() {
    let t = tol();
    let sigma = unit_circle(64);
    let result = transport(&sigma, &sigma, None, &t).unwrap();
    assert!(result.certificate.endpoint_hausdorff < 1e-12);
    assert!(result.certificate.orientation_matched);
    assert_eq!(result.certificate.segments, 0);
}

#[test]
fn transport_circle_to_larger_circle() {
    let mut t = tol();
    t.transport_tol = 1e-4;
    let amb = AmbientManifold::flat(2);
    let sigma0 = unit_circle(128);
    let sigma1 = generators::circle(&amb, 128, 1.3, &[0.0, 0.0], &t).unwrap();
    let result = transport(&sigma0, &sigma1, None, &t).unwrap();
    assert!(
        result.certificate.endpoint_hausdorff < 1e-4,
        "endpoint {}",
        result.certificate.endpoint_hausdorff
    );
    assert!(result.certificate.orientation_matched);
    assert!(result.certificate.max_tracking_error < t.track_tol);
    assert!(result.certificate.min_jacobian_det > 0.0);
}

#[test]
fn transport_circle_to_offset_ellipse() {
    let t = tol();
    let amb = AmbientManifold::flat(2);
    let sigma0 = unit_circle(128);
    let sigma1 = generators::ellipse(&amb, 128, 1.2, 0.9, &[0.3, 0.1], &t).unwrap();
    let result = transport(&sigma0, &sigma1, None, &t).unwrap();
    assert!(
        result.certificate.endpoint_hausdorff < 1e-3,
        "endpoint {}",
        result.certificate.endpoint_hausdorff
    );
    assert!(result.certificate.orientation_matched);
    assert!(result.certificate.max_tracking_error < 1e-5);
    assert!(result.certificate.min_jacobian_det > 0.0);
    assert!(result.certificate.segments >= 2);
}

#[test]
fn transported_orientation_is_preserved() {
    let t = tol();
    let amb = AmbientManifold::flat(2);
    let sigma0 = unit_circle(128);
    let sigma1 = generators::circle(&amb, 128, 1.2, &[0.1, 0.0], &t).unwrap();
    let result = transport(&sigma0, &sigma1, None, &t).unwrap();
    // the flowed curve is an oriented chart member of the target
    let chart1 = TubularChart::new(sigma1, &t).unwrap();
    assert!(atlas::chart_contains(&chart1, &result.transported, &t).is_some());
    assert!(
        atlas::chart_contains(&chart1, &result.transported.reverse_orientation(), &t).is_none()
    );
}

#[test]
fn velocity_field_is_zero_outside_the_support() {
    let t = tol();
    let sigma = unit_circle(64);
    let family = generators::translation_family(&sigma, &[0.5, 0.0], 17, &t).unwrap();
    let flow = AmbientFlow::extend(family, &t).unwrap();
    for time in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let v = flow.velocity(time, &point(&[4.0, 4.0])).unwrap();
        assert_eq!(v.norm(), 0.0);
        // inside the tube core the field is the carrier velocity
        let on_carrier = point(&[1.0 + 0.5 * time, 0.0]);
        let v2 = flow.velocity(time, &on_carrier).unwrap();
        assert!((v2 - point(&[0.5, 0.0])).norm() < 1e-8);
    }
}

#[test]
fn lift_endpoint_contract_holds_on_the_ellipse_scenario() {
    let t = tol();
    let amb = AmbientManifold::flat(2);
    let sigma0 = unit_circle(256);
    let sigma1 = generators::ellipse(&amb, 256, 1.2, 0.9, &[0.0, 0.0], &t).unwrap();
    let path = GrassmannPath::with_auto_witnesses(vec![sigma0.clone(), sigma1.clone()], &t)
        .unwrap_or_else(|_| {
            let mid = generators::circle(&amb, 256, 1.05, &[0.0, 0.0], &t).unwrap();
            GrassmannPath::with_auto_witnesses(vec![sigma0.clone(), mid, sigma1.clone()], &t)
                .unwrap()
        });
    let gamma: EmbeddingPath = lift_path(&path, &t).unwrap();
    let start = grassmannian::embedding::project_p(&gamma.family.frames()[0], &t).unwrap();
    let end =
        grassmannian::embedding::project_p(gamma.family.frames().last().unwrap(), &t).unwrap();
    assert!(hausdorff_distance(&start, &sigma0) < t.lift_tol);
    assert!(hausdorff_distance(&end, &sigma1) < t.lift_tol);
    let chart1 = TubularChart::new(sigma1, &t).unwrap();
    assert!(atlas::chart_contains(&chart1, &end, &t).is_some());
}
