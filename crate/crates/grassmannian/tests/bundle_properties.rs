//! Bundle-level invariants: the projection is invariant under the right
//! action, fibers are exactly the orbits over an oriented image, the
//! differential of the projection matches chart-coordinate differences at
//! second order, embeddings stay embeddings under small perturbations, and
//! the trivialization identities hold at tolerance.

use grassmannian::ambient::AmbientManifold;
use grassmannian::atlas;
use grassmannian::circle_map::CircleMap;
use grassmannian::embedding::{
    act, is_embedding, local_section, project_p, project_p_differential, trivialization_gauge,
    trivialize, trivialize_inverse, DiscreteEmbedding,
};
use grassmannian::generators;
use grassmannian::submanifold::{hausdorff_distance, OrientedSubmanifold};
use grassmannian::tubular::TubularChart;
use grassmannian::{GeomError, Point, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn unit_circle(m: usize) -> OrientedSubmanifold {
    let amb = AmbientManifold::flat(2);
    generators::circle(&amb, m, 1.0, &[0.0, 0.0], &tol()).unwrap()
}

/// Largest circular deviation between two sampled circle maps.
fn circ_dev(a: &CircleMap, b: &CircleMap) -> f64 {
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
}

#[test]
fn projection_is_invariant_under_the_action() {
    let t = tol();
    let sigma = unit_circle(128);
    let f = DiscreteEmbedding::identity_inclusion(&sigma, &t).unwrap();
    let pf = project_p(&f, &t).unwrap();
    // grid-aligned rotations permute the samples: the image is identical
    let m = sigma.sample_count();
    for k in [1usize, 7, 32] {
        let phi = CircleMap::rotation(m, std::f64::consts::TAU * k as f64 / m as f64);
        let g = act(&f, &phi, &t).unwrap();
        let pg = project_p(&g, &t).unwrap();
        assert!(hausdorff_distance(&pf, &pg) < 1e-9);
        assert_eq!(pf.orientation(), pg.orientation());
    }
    // generic smooth reparametrizations resample the same curve
    let mut rng = generators::seeded_rng(42);
    for _ in 0..10 {
        let phi = generators::random_fourier_diffeo(m, &mut rng, 0.5);
        let g = act(&f, &phi, &t).unwrap();
        let pg = project_p(&g, &t).unwrap();
        assert!(hausdorff_distance(&pf, &pg) < 1e-9);
        assert_eq!(pf.orientation(), pg.orientation());
    }
}

#[test]
fn fibers_are_orbits_and_reversed_images_are_rejected() {
    let t = tol();
    let sigma = unit_circle(128);
    let chart = TubularChart::new(sigma.clone(), &t).unwrap();
    let f = DiscreteEmbedding::identity_inclusion(&sigma, &t).unwrap();
    let mut rng = generators::seeded_rng(17);
    for _ in 0..10 {
        // g in the fiber over the center: gauge succeeds and reconstructs
        let phi = generators::random_fourier_diffeo(128, &mut rng, 0.5);
        let g = act(&f, &phi, &t).unwrap();
        let gauge = trivialization_gauge(&g, &f, &chart, &t).unwrap();
        let wg = project_p(&g, &t).unwrap();
        let s = atlas::membership(&chart, &wg, &t).unwrap();
        let rebuilt = act(&local_section(&chart, &s, &f, &t).unwrap(), &gauge, &t).unwrap();
        assert!(rebuilt.max_image_distance(&g) < 1e-8);
    }
    // reversed traversal of the same circle is not in the fiber
    let images: Vec<Point> = sigma
        .params()
        .iter()
        .map(|&th| grassmannian::point(&[(-th).cos(), (-th).sin()]))
        .collect();
    let g_rev = DiscreteEmbedding::new(sigma.clone(), images, &t).unwrap();
    assert!(matches!(
        trivialization_gauge(&g_rev, &f, &chart, &t),
        Err(GeomError::OrientationMismatch)
    ));
}

/// Chart-coordinate central differences of the projection along a family.
fn chart_fd_sections(
    frame_at: &dyn Fn(f64) -> DiscreteEmbedding,
    chart: &TubularChart,
    t0: f64,
    h: f64,
    t: &Tolerances,
) -> Vec<f64> {
    let coeffs = |time: f64| -> Vec<f64> {
        let w = project_p(&frame_at(time), t).unwrap();
        let s = atlas::membership(chart, &w, t).unwrap();
        s.vectors()
            .iter()
            .flat_map(|v| v.iter().copied().collect::<Vec<_>>())
            .collect()
    };
    let p = coeffs(t0 + h);
    let m = coeffs(t0 - h);
    p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

#[test]
fn projection_differential_matches_chart_differences() {
    // growth plus drift: the section coordinate of the moving image has a
    // genuine cubic time term, so the central differences converge at
    // second order instead of cancelling to noise
    let t = tol();
    let sigma = unit_circle(128);
    let source = sigma.clone();
    let motion = |time: f64, th: f64| -> Point {
        grassmannian::point(&[
            (1.0 + 0.3 * time) * th.cos() + 0.4 * time,
            (1.0 + 0.3 * time) * th.sin(),
        ])
    };
    let t0 = 0.0;
    let frame_at = move |time: f64| -> DiscreteEmbedding {
        let images: Vec<Point> = source.params().iter().map(|&th| motion(time, th)).collect();
        DiscreteEmbedding::new(source.clone(), images, &Tolerances::default()).unwrap()
    };
    let w0 = project_p(&frame_at(t0), &t).unwrap();
    let chart = TubularChart::new(w0.clone(), &t).unwrap();
    // analytic: orthogonal projection of the velocity onto the normal bundle
    let family = generators::family_from_functions(
        &sigma,
        9,
        |time, th| {
            grassmannian::point(&[
                (1.0 + 0.3 * time) * th.cos() + 0.4 * time,
                (1.0 + 0.3 * time) * th.sin(),
            ])
        },
        |_, th| grassmannian::point(&[0.3 * th.cos() + 0.4, 0.3 * th.sin()]),
        &t,
    )
    .unwrap();
    let (_, analytic) = project_p_differential(&family, t0, &t).unwrap();
    let analytic_flat: Vec<f64> = analytic
        .vectors()
        .iter()
        .flat_map(|v| v.iter().copied().collect::<Vec<_>>())
        .collect();
    let mut errors = Vec::new();
    for h in [1e-2, 5e-3, 2.5e-3] {
        let fd = chart_fd_sections(&frame_at, &chart, t0, h, &t);
        let err = fd
            .iter()
            .zip(&analytic_flat)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        errors.push(err);
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(
            order >= 1.9,
            "observed differential order {order}, errors {errors:?}"
        );
    }
}

#[test]
fn embeddings_survive_small_perturbations() {
    let t = tol();
    let sigma = unit_circle(128);
    let f = DiscreteEmbedding::identity_inclusion(&sigma, &t).unwrap();
    assert!(is_embedding(&f, &t).ok);
    let sep = sigma.embed_sep(&t);
    let mut rng = generators::seeded_rng(5);
    use rand::Rng;
    for trial in 0..50 {
        let images: Vec<Point> = f
            .images()
            .iter()
            .map(|p| {
                let dx = (rng.gen::<f64>() * 2.0 - 1.0) * 0.01 * sep;
                let dy = (rng.gen::<f64>() * 2.0 - 1.0) * 0.01 * sep;
                grassmannian::point(&[p[0] + dx, p[1] + dy])
            })
            .collect();
        let g = DiscreteEmbedding::new(sigma.clone(), images, &t).unwrap();
        assert!(is_embedding(&g, &t).ok, "trial {trial} broke the embedding");
    }
}

#[test]
fn local_sections_project_back_to_their_chart_points() {
    // oracle: applying the chart directly
    let t = tol();
    let sigma = unit_circle(128);
    let chart = TubularChart::new(sigma.clone(), &t).unwrap();
    let f = DiscreteEmbedding::identity_inclusion(&sigma, &t).unwrap();
    let mut rng = generators::seeded_rng(23);
    for trial in 0..20 {
        let s = generators::random_fourier_section(
            chart.sigma(),
            &mut rng,
            0.25 * chart.radius(),
            5,
        )
        .unwrap();
        let lifted = local_section(&chart, &s, &f, &t).unwrap();
        let projected = project_p(&lifted, &t).unwrap();
        let applied = atlas::chart_apply(&chart, &s, &t).unwrap();
        let d = hausdorff_distance(&projected, &applied);
        assert!(d < 1e-8, "trial {trial}: p . sigma identity off by {d}");
    }
}

#[test]
fn trivialization_identities_hold_over_random_pairs() {
    let t = tol();
    let sigma = unit_circle(256);
    let chart = TubularChart::new(sigma.clone(), &t).unwrap();
    let f = DiscreteEmbedding::identity_inclusion(&sigma, &t).unwrap();
    let mut rng = generators::seeded_rng(42);
    for trial in 0..20 {
        let s = generators::random_fourier_section(
            chart.sigma(),
            &mut rng,
            0.25 * chart.radius(),
            5,
        )
        .unwrap();
        let phi = generators::random_fourier_diffeo(256, &mut rng, 0.4);
        let g = trivialize_inverse(&chart, &s, &phi, &f, &t).unwrap();

        // reconstruction: sigma(p(g)) . gauge(g) = g
        let gauge = trivialization_gauge(&g, &f, &chart, &t).unwrap();
        let wg = project_p(&g, &t).unwrap();
        let s_rec = atlas::membership(&chart, &wg, &t).unwrap();
        let rebuilt = act(&local_section(&chart, &s_rec, &f, &t).unwrap(), &gauge, &t).unwrap();
        assert!(
            rebuilt.max_image_distance(&g) < 1e-8,
            "trial {trial}: reconstruction identity"
        );

        // roundtrip: trivialize . trivialize_inverse = identity on pairs
        let (cp, gauge2) = trivialize(&g, &f, &chart, &t).unwrap();
        assert!(
            cp.section.max_difference(&s) < 1e-8,
            "trial {trial}: section roundtrip"
        );
        let gauge_dev = circ_dev(&gauge2, &phi);
        assert!(gauge_dev < 1e-8, "trial {trial}: gauge roundtrip {gauge_dev}");

        // equivariance: trivialize(g . psi) = (p(g), gauge(g) . psi)
        let psi = generators::random_fourier_diffeo(256, &mut rng, 0.3);
        let g_psi = act(&g, &psi, &t).unwrap();
        let (cp2, gauge3) = trivialize(&g_psi, &f, &chart, &t).unwrap();
        assert!(
            cp2.section.max_difference(&cp.section) < 1e-9,
            "trial {trial}: equivariance fixes the chart point"
        );
        let composed = gauge2.compose(&psi).unwrap();
        let equi_dev = circ_dev(&gauge3, &composed);
        assert!(equi_dev < 1e-9, "trial {trial}: equivariance {equi_dev}");
    }
}
