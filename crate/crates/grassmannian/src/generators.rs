//! Parametric generators for curves, sections, circle maps and embedding
//! families, plus the seeded RNG used by every randomized trial.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ambient::{point, AmbientKind, AmbientManifold, LevelSetField, Point, Vector};
use crate::circle_map::CircleMap;
use crate::config::Tolerances;
use crate::embedding::{DiscreteEmbedding, EmbeddingFamily};
use crate::error::{GeomError, Result};
use crate::submanifold::{NormalSection, OrientedSubmanifold};

/// Counter-based deterministic generator; same seed, same stream, on every
/// platform.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn grid(m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |i| TAU * i as f64 / m as f64)
}

/// Circle of the given radius and center in flat 2-space.
pub fn circle(
    manifold: &AmbientManifold,
    m: usize,
    radius: f64,
    center: &[f64],
    tol: &Tolerances,
) -> Result<OrientedSubmanifold> {
    let samples: Vec<Point> = grid(m)
        .map(|t| point(&[center[0] + radius * t.cos(), center[1] + radius * t.sin()]))
        .collect();
    OrientedSubmanifold::build(manifold, samples, 1, tol)
}

/// Axis-aligned ellipse with half-axes `a`, `b`.
pub fn ellipse(
    manifold: &AmbientManifold,
    m: usize,
    a: f64,
    b: f64,
    center: &[f64],
    tol: &Tolerances,
) -> Result<OrientedSubmanifold> {
    let samples: Vec<Point> = grid(m)
        .map(|t| point(&[center[0] + a * t.cos(), center[1] + b * t.sin()]))
        .collect();
    OrientedSubmanifold::build(manifold, samples, 1, tol)
}

/// Equator of the unit sphere in 3-space (round or level-set kind).
pub fn equator(
    manifold: &AmbientManifold,
    m: usize,
    tol: &Tolerances,
) -> Result<OrientedSubmanifold> {
    let samples: Vec<Point> = grid(m).map(|t| point(&[t.cos(), t.sin(), 0.0])).collect();
    OrientedSubmanifold::build(manifold, samples, 1, tol)
}

/// Latitude circle of the unit sphere at height `sin(alt)`.
pub fn latitude(
    manifold: &AmbientManifold,
    m: usize,
    alt: f64,
    tol: &Tolerances,
) -> Result<OrientedSubmanifold> {
    let (c, s) = (alt.cos(), alt.sin());
    let samples: Vec<Point> = grid(m)
        .map(|t| point(&[c * t.cos(), c * t.sin(), s]))
        .collect();
    OrientedSubmanifold::build(manifold, samples, 1, tol)
}

/// `(p, q)` torus knot on a level-set torus; exact on `{F = 0}`.
pub fn torus_knot(
    manifold: &AmbientManifold,
    m: usize,
    p: u32,
    q: u32,
    tol: &Tolerances,
) -> Result<OrientedSubmanifold> {
    let (major, minor) = match manifold.kind() {
        AmbientKind::LevelSet(LevelSetField::Torus { major, minor }) => (*major, *minor),
        _ => {
            return Err(GeomError::config(
                "generator.torus_knot",
                "requires a level-set torus ambient",
            ))
        }
    };
    let samples: Vec<Point> = grid(m)
        .map(|t| {
            let rho = major + minor * (q as f64 * t).cos();
            point(&[
                rho * (p as f64 * t).cos(),
                rho * (p as f64 * t).sin(),
                minor * (q as f64 * t).sin(),
            ])
        })
        .collect();
    OrientedSubmanifold::build(manifold, samples, 1, tol)
}

/// Section `amplitude * nu_1` along the first normal frame vector.
pub fn constant_normal_section(
    sigma: &OrientedSubmanifold,
    amplitude: f64,
) -> Result<NormalSection> {
    let vectors: Vec<Vector> = (0..sigma.sample_count())
        .map(|i| amplitude * &sigma.normal_frame(i)[0])
        .collect();
    NormalSection::new(sigma, vectors)
}

/// Section `amplitude * cos(freq * theta) * nu_1`.
pub fn cosine_normal_section(
    sigma: &OrientedSubmanifold,
    amplitude: f64,
    freq: u32,
) -> Result<NormalSection> {
    let vectors: Vec<Vector> = sigma
        .params()
        .iter()
        .enumerate()
        .map(|(i, &t)| amplitude * (freq as f64 * t).cos() * &sigma.normal_frame(i)[0])
        .collect();
    NormalSection::new(sigma, vectors)
}

/// Random band-limited section with sup-norm exactly `amplitude`.
///
/// Coefficients decay like `1/(1 + k^2)` so the section is smooth at any
/// resolution; band-limited data is reproduced exactly by the curve engine.
pub fn random_fourier_section(
    sigma: &OrientedSubmanifold,
    rng: &mut ChaCha8Rng,
    amplitude: f64,
    max_mode: u32,
) -> Result<NormalSection> {
    let m = sigma.sample_count();
    let mut coeff = Vec::new();
    for k in 0..=max_mode {
        let w = 1.0 / (1.0 + (k * k) as f64);
        coeff.push((
            w * (rng.gen::<f64>() * 2.0 - 1.0),
            w * (rng.gen::<f64>() * 2.0 - 1.0),
        ));
    }
    let scalar: Vec<f64> = sigma
        .params()
        .iter()
        .map(|&t| {
            coeff
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| a * (k as f64 * t).cos() + b * (k as f64 * t).sin())
                .sum()
        })
        .collect();
    let sup = scalar.iter().map(|s: &f64| s.abs()).fold(0.0, f64::max);
    let scale = if sup > 1e-12 { amplitude / sup } else { 0.0 };
    let vectors: Vec<Vector> = (0..m)
        .map(|i| scale * scalar[i] * &sigma.normal_frame(i)[0])
        .collect();
    NormalSection::new(sigma, vectors)
}

/// Random orientation-preserving circle diffeomorphism
/// `theta + sum a_k sin(k theta + phase_k)` with `sum k |a_k| <= strength < 1`.
pub fn random_fourier_diffeo(m: usize, rng: &mut ChaCha8Rng, strength: f64) -> CircleMap {
    assert!(strength < 1.0);
    let modes = 4;
    let mut amps = Vec::new();
    let mut total = 0.0;
    for k in 1..=modes {
        let a = rng.gen::<f64>() / (k * k) as f64;
        total += k as f64 * a;
        amps.push((a, rng.gen::<f64>() * TAU));
    }
    let scale = if total > 1e-12 { strength / total } else { 0.0 };
    let values: Vec<f64> = grid(m)
        .map(|t| {
            t + amps
                .iter()
                .enumerate()
                .map(|(i, &(a, ph))| scale * a * ((i + 1) as f64 * t + ph).sin())
                .sum::<f64>()
        })
        .collect();
    CircleMap::new(&values).expect("bounded derivative keeps the map monotone")
}

/// Random smooth star-shaped curve `r(theta) * (cos, sin) + center`.
pub fn random_star_curve(
    manifold: &AmbientManifold,
    m: usize,
    rng: &mut ChaCha8Rng,
    base_radius: f64,
    wobble: f64,
    center: &[f64],
    tol: &Tolerances,
) -> Result<OrientedSubmanifold> {
    let modes = 4;
    let coeff: Vec<(f64, f64)> = (1..=modes)
        .map(|k| {
            let w = wobble / (k * k) as f64;
            (
                w * (rng.gen::<f64>() * 2.0 - 1.0),
                w * (rng.gen::<f64>() * 2.0 - 1.0),
            )
        })
        .collect();
    let samples: Vec<Point> = grid(m)
        .map(|t| {
            let r = base_radius
                + coeff
                    .iter()
                    .enumerate()
                    .map(|(i, &(a, b))| {
                        let k = (i + 1) as f64;
                        a * (k * t).cos() + b * (k * t).sin()
                    })
                    .sum::<f64>();
            point(&[center[0] + r * t.cos(), center[1] + r * t.sin()])
        })
        .collect();
    OrientedSubmanifold::build(manifold, samples, 1, tol)
}

// ---- embedding families -------------------------------------------------

fn uniform_times(count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64 / (count - 1) as f64).collect()
}

/// Family from an analytic generator `f(t, theta)` with analytic velocity.
pub fn family_from_functions(
    source: &OrientedSubmanifold,
    time_count: usize,
    f: impl Fn(f64, f64) -> Point,
    velocity: impl Fn(f64, f64) -> Vector,
    tol: &Tolerances,
) -> Result<EmbeddingFamily> {
    let times = uniform_times(time_count);
    let mut frames = Vec::with_capacity(time_count);
    let mut velocities = Vec::with_capacity(time_count);
    for &t in &times {
        let images: Vec<Point> = source.params().iter().map(|&th| f(t, th)).collect();
        frames.push(DiscreteEmbedding::new(source.clone(), images, tol)?);
        velocities.push(source.params().iter().map(|&th| velocity(t, th)).collect());
    }
    EmbeddingFamily::new(times, frames, velocities, tol)
}

/// Radial growth of the unit circle: `f_t(theta) = (1 + rate*t) * e(theta)`.
pub fn radial_growth_family(
    source: &OrientedSubmanifold,
    rate: f64,
    time_count: usize,
    tol: &Tolerances,
) -> Result<EmbeddingFamily> {
    family_from_functions(
        source,
        time_count,
        |t, th| point(&[(1.0 + rate * t) * th.cos(), (1.0 + rate * t) * th.sin()]),
        |_, th| point(&[rate * th.cos(), rate * th.sin()]),
        tol,
    )
}

/// Rigid rotation: `f_t(theta) = e(theta + rate*t)`.
pub fn rotation_family(
    source: &OrientedSubmanifold,
    rate: f64,
    time_count: usize,
    tol: &Tolerances,
) -> Result<EmbeddingFamily> {
    family_from_functions(
        source,
        time_count,
        move |t, th| point(&[(th + rate * t).cos(), (th + rate * t).sin()]),
        move |t, th| {
            point(&[
                -rate * (th + rate * t).sin(),
                rate * (th + rate * t).cos(),
            ])
        },
        tol,
    )
}

/// Rigid translation of the unit circle by `t * shift`.
pub fn translation_family(
    source: &OrientedSubmanifold,
    shift: &[f64],
    time_count: usize,
    tol: &Tolerances,
) -> Result<EmbeddingFamily> {
    let (sx, sy) = (shift[0], shift[1]);
    family_from_functions(
        source,
        time_count,
        move |t, th| point(&[th.cos() + t * sx, th.sin() + t * sy]),
        move |_, _| point(&[sx, sy]),
        tol,
    )
}
