//! The space of embeddings of a reference curve, fibered over the curve
//! space: embedding certificates, the projection onto oriented images and
//! its differential, reparametrization of families into sections, local
//! sections of the projection, the gauge map, the local trivialization, and
//! the right action of orientation-preserving circle diffeomorphisms.

use crate::ambient::{Point, TangentVector, Vector};
use crate::atlas;
use crate::circle_map::CircleMap;
use crate::config::Tolerances;
use crate::error::{GeomError, Result};
use crate::fourier::VectorInterp;
use crate::submanifold::{NormalSection, OrientedSubmanifold};
use crate::tubular::TubularChart;

/// An embedding of the reference curve: one on-manifold image point per
/// reference sample, interpolated off-grid by the same engine as curves.
#[derive(Debug, Clone)]
pub struct DiscreteEmbedding {
    source: OrientedSubmanifold,
    images: Vec<Point>,
    interp: VectorInterp,
}

/// Why a sampled map fails to be an embedding.
#[derive(Debug, Clone)]
pub enum EmbeddingViolation {
    /// Non-adjacent images too close (sampled injectivity).
    Separation { i: usize, j: usize, dist: f64 },
    /// Grid derivative too small (sampled immersion).
    Immersion { i: usize, deriv_norm: f64 },
}

/// Boolean certificate with the violating pair or sample on failure.
#[derive(Debug, Clone)]
pub struct EmbeddingCheck {
    pub ok: bool,
    pub violation: Option<EmbeddingViolation>,
}

impl DiscreteEmbedding {
    pub fn new(source: OrientedSubmanifold, images: Vec<Point>, tol: &Tolerances) -> Result<Self> {
        if images.len() != source.sample_count() {
            return Err(GeomError::config(
                "embedding",
                format!(
                    "expected {} image points, got {}",
                    source.sample_count(),
                    images.len()
                ),
            ));
        }
        for p in &images {
            source.manifold().check_on_manifold(p, tol)?;
        }
        let interp = VectorInterp::new(&images);
        Ok(DiscreteEmbedding {
            source,
            images,
            interp,
        })
    }

    /// The inclusion of a curve into the ambient space.
    pub fn identity_inclusion(sigma: &OrientedSubmanifold, tol: &Tolerances) -> Result<Self> {
        DiscreteEmbedding::new(sigma.clone(), sigma.samples().to_vec(), tol)
    }

    pub fn source(&self) -> &OrientedSubmanifold {
        &self.source
    }

    pub fn images(&self) -> &[Point] {
        &self.images
    }

    /// Interpolated image point at a source parameter.
    pub fn image_at(&self, theta: f64) -> Point {
        self.interp.eval(theta)
    }

    pub fn image_derivs_at(&self, theta: f64) -> (Point, Vector, Vector) {
        self.interp.eval_derivs(theta)
    }

    pub fn max_image_distance(&self, other: &DiscreteEmbedding) -> f64 {
        self.images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// CSV block with the source parameter and the image coordinates.
    pub fn to_csv(&self) -> String {
        let dim = self.source.manifold().dim_ambient();
        let mut out = String::from("parameter");
        for c in 0..dim {
            out.push_str(&format!(",x{c}"));
        }
        out.push('\n');
        for (theta, p) in self.source.params().iter().zip(&self.images) {
            out.push_str(&format!("{theta}"));
            for c in 0..dim {
                out.push_str(&format!(",{}", p[c]));
            }
            out.push('\n');
        }
        out
    }
}

/// Sampled injectivity and immersion check.
pub fn is_embedding(f: &DiscreteEmbedding, tol: &Tolerances) -> EmbeddingCheck {
    let m = f.images.len();
    let min_adjacent = (0..m)
        .map(|i| (&f.images[(i + 1) % m] - &f.images[i]).norm())
        .fold(f64::INFINITY, f64::min);
    let sep = tol.embed_sep_factor * min_adjacent;
    for i in 0..m {
        for j in (i + 2)..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            let d = (&f.images[i] - &f.images[j]).norm();
            if d <= sep {
                return EmbeddingCheck {
                    ok: false,
                    violation: Some(EmbeddingViolation::Separation { i, j, dist: d }),
                };
            }
        }
    }
    let h = std::f64::consts::TAU / m as f64;
    for i in 0..m {
        let ip1 = &f.images[(i + 1) % m];
        let ip2 = &f.images[(i + 2) % m];
        let im1 = &f.images[(i + m - 1) % m];
        let im2 = &f.images[(i + m - 2) % m];
        let deriv = (-ip2 + 8.0 * ip1 - 8.0 * im1 + im2) / (12.0 * h);
        let n = deriv.norm();
        if n <= tol.imm_floor {
            return EmbeddingCheck {
                ok: false,
                violation: Some(EmbeddingViolation::Immersion { i, deriv_norm: n }),
            };
        }
    }
    EmbeddingCheck {
        ok: true,
        violation: None,
    }
}

fn require_embedding(f: &DiscreteEmbedding, tol: &Tolerances) -> Result<()> {
    let check = is_embedding(f, tol);
    if check.ok {
        Ok(())
    } else {
        Err(GeomError::NotEmbedding {
            reason: format!("{:?}", check.violation),
        })
    }
}

/// Bundle projection: the oriented image curve, forgetting parametrization.
pub fn project_p(f: &DiscreteEmbedding, tol: &Tolerances) -> Result<OrientedSubmanifold> {
    require_embedding(f, tol)?;
    let built = OrientedSubmanifold::build(
        f.source.manifold(),
        f.images.clone(),
        f.source.dim_k(),
        tol,
    )?;
    // the embedding itself is the correspondence witness: sample-wise it is
    // the identity reindexing, so the image inherits the source sign
    Ok(built.with_orientation(f.source.orientation()))
}

/// A time-indexed family of embeddings with per-time velocities, cubic
/// Hermite interpolated between time nodes.
#[derive(Debug, Clone)]
pub struct EmbeddingFamily {
    times: Vec<f64>,
    frames: Vec<DiscreteEmbedding>,
    velocities: Vec<Vec<Vector>>,
}

impl EmbeddingFamily {
    pub fn new(
        times: Vec<f64>,
        frames: Vec<DiscreteEmbedding>,
        velocities: Vec<Vec<Vector>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if times.len() != frames.len() || times.len() != velocities.len() || times.len() < 2 {
            return Err(GeomError::config("family", "times, frames, velocities must align"));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(GeomError::config("family.times", "must increase strictly"));
            }
        }
        for f in &frames {
            require_embedding(f, tol)?;
        }
        Ok(EmbeddingFamily {
            times,
            frames,
            velocities,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[DiscreteEmbedding] {
        &self.frames
    }

    pub fn velocities(&self) -> &[Vec<Vector>] {
        &self.velocities
    }

    pub fn source(&self) -> &OrientedSubmanifold {
        self.frames[0].source()
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn interval_of(&self, t: f64) -> usize {
        match self
            .times
            .binary_search_by(|probe| probe.total_cmp(&t))
        {
            Ok(k) => k.min(self.times.len() - 2),
            Err(k) => k.saturating_sub(1).min(self.times.len() - 2),
        }
    }

    /// Hermite position and velocity of every sample at time `t`.
    pub fn eval(&self, t: f64) -> (Vec<Point>, Vec<Vector>) {
        let k = self.interval_of(t);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let dt = t1 - t0;
        let s = ((t - t0) / dt).clamp(0.0, 1.0);
        if s == 0.0 {
            return (self.frames[k].images.clone(), self.velocities[k].clone());
        }
        if s == 1.0 {
            return (
                self.frames[k + 1].images.clone(),
                self.velocities[k + 1].clone(),
            );
        }
        let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
        let h10 = s * s * s - 2.0 * s * s + s;
        let h01 = -2.0 * s * s * s + 3.0 * s * s;
        let h11 = s * s * s - s * s;
        let g00 = (6.0 * s * s - 6.0 * s) / dt;
        let g10 = 3.0 * s * s - 4.0 * s + 1.0;
        let g01 = (-6.0 * s * s + 6.0 * s) / dt;
        let g11 = 3.0 * s * s - 2.0 * s;
        let m = self.source().sample_count();
        let mut pos = Vec::with_capacity(m);
        let mut vel = Vec::with_capacity(m);
        for i in 0..m {
            let p0 = &self.frames[k].images[i];
            let p1 = &self.frames[k + 1].images[i];
            let v0 = &self.velocities[k][i];
            let v1 = &self.velocities[k + 1][i];
            pos.push(h00 * p0 + h10 * dt * v0 + h01 * p1 + h11 * dt * v1);
            vel.push(g00 * p0 + g10 * v0 + g01 * p1 + g11 * v1);
        }
        (pos, vel)
    }

    /// The embedding at time `t` (positions Hermite-interpolated).
    pub fn frame_at(&self, t: f64, tol: &Tolerances) -> Result<DiscreteEmbedding> {
        let (pos, _) = self.eval(t);
        DiscreteEmbedding::new(self.source().clone(), pos, tol)
    }
}

/// Differential of the projection along a family: the orthogonal projection
/// of the velocity onto the normal bundle of the image, indexed over the
/// image curve.
pub fn project_p_differential(
    family: &EmbeddingFamily,
    t0: f64,
    tol: &Tolerances,
) -> Result<(OrientedSubmanifold, NormalSection)> {
    if t0 < family.t_start() - 1e-12 || t0 > family.t_end() + 1e-12 {
        return Err(GeomError::config("t0", "outside the family time range"));
    }
    let (pos, vel) = family.eval(t0);
    let frame = DiscreteEmbedding::new(family.source().clone(), pos, tol)?;
    let w = project_p(&frame, tol)?;
    let manifold = w.manifold().clone();
    let mut vectors = Vec::with_capacity(w.sample_count());
    for i in 0..w.sample_count() {
        let u = manifold
            .project_tangent(&w.samples()[i], &vel[i], tol)?
            .components;
        let mut v = Vector::zeros(manifold.dim_ambient());
        for nu in w.normal_frame(i) {
            v += nu.dot(&u) * nu;
        }
        vectors.push(v);
    }
    let section = NormalSection::new(&w, vectors)?;
    Ok((w, section))
}

/// Reparametrize a family of embeddings into sections over a fixed chart:
/// per time, the circle map undoing the base motion and the section the
/// reparametrized embedding traces in the chart.
pub fn reparametrize_to_section(
    family: &EmbeddingFamily,
    chart: &TubularChart,
    tol: &Tolerances,
) -> Result<Vec<(CircleMap, NormalSection)>> {
    let mut out = Vec::with_capacity(family.times.len());
    for frame in &family.frames {
        // base motion of the samples inside the chart
        let mut raw = Vec::with_capacity(frame.images.len());
        for p in &frame.images {
            let coords = chart.invert(p, None, 0.95, false, tol)?;
            raw.push(coords.theta);
        }
        let psi = CircleMap::new(&raw).map_err(|_| GeomError::NotDiffeomorphism {
            reason: "base projection of the frame is not monotone".into(),
        })?;
        let phi = psi.inverse(tol.root_tol, tol.max_newton_iters)?;
        let image = project_p(frame, tol)?;
        let section = atlas::membership(chart, &image, tol)?;
        out.push((phi, section));
    }
    Ok(out)
}

fn require_over_center(
    f: &DiscreteEmbedding,
    chart: &TubularChart,
    tol: &Tolerances,
) -> Result<()> {
    let wf = project_p(f, tol)?;
    let s0 = atlas::membership(chart, &wf, tol)?;
    let sup = s0.sup_norm(chart.manifold());
    if sup > tol.contain_tol {
        return Err(GeomError::SourceMismatch { dist: sup });
    }
    Ok(())
}

/// Local section of the projection through a fixed parametrization `f` of
/// the chart center: move every image point along the chart fiber to the
/// section value at its base.
pub fn local_section(
    chart: &TubularChart,
    section: &NormalSection,
    f: &DiscreteEmbedding,
    tol: &Tolerances,
) -> Result<DiscreteEmbedding> {
    require_over_center(f, chart, tol)?;
    let manifold = chart.manifold();
    let section_interp = VectorInterp::new(section.vectors());
    let mut images = Vec::with_capacity(f.images.len());
    for y in &f.images {
        let coords = chart.invert(y, None, 1.0, false, tol)?;
        let u = coords.theta;
        let raw = section_interp.eval(u);
        let frame = chart.sigma().normal_frame_at(u);
        let mut v = Vector::zeros(manifold.dim_ambient());
        for nu in &frame {
            v += nu.dot(&raw) * nu;
        }
        let v = manifold.project_tangent(y, &v, tol)?;
        images.push(manifold.exp(
            &TangentVector {
                base: y.clone(),
                components: v.components,
            },
            tol,
        )?);
    }
    let out = DiscreteEmbedding::new(f.source.clone(), images, tol)?;
    require_embedding(&out, tol)?;
    Ok(out)
}

/// Source parameter of the nearest point of an embedding's image curve.
fn param_on_embedding(
    f: &DiscreteEmbedding,
    q: &Point,
    tol: &Tolerances,
) -> Result<f64> {
    let m = f.images.len();
    let init = f
        .images
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (*a - q).norm_squared().total_cmp(&(*b - q).norm_squared()))
        .map(|(i, _)| std::f64::consts::TAU * i as f64 / m as f64)
        .unwrap();
    let mut alpha = init;
    for _ in 0..tol.max_newton_iters {
        let (p, d1, d2) = f.image_derivs_at(alpha);
        let diff = q - &p;
        let g = diff.dot(&d1);
        let dg = -d1.norm_squared() + diff.dot(&d2);
        if g.abs() < tol.root_tol * d1.norm().max(1.0) {
            break;
        }
        if dg.abs() < 1e-14 {
            break;
        }
        alpha -= (g / dg).clamp(-0.5, 0.5);
    }
    let (p, _, _) = f.image_derivs_at(alpha);
    let dist = (q - &p).norm();
    if dist > tol.contain_tol * 10.0 {
        return Err(GeomError::NotDiffeomorphism {
            reason: format!("point is {dist:.3e} away from the fixed parametrization"),
        });
    }
    Ok(alpha)
}

/// Gauge map of the trivialization: the circle map `f^{-1} . base . g`
/// recovering the fiber coordinate of `g` relative to the fixed
/// parametrization `f` of the chart center.
pub fn trivialization_gauge(
    g: &DiscreteEmbedding,
    f: &DiscreteEmbedding,
    chart: &TubularChart,
    tol: &Tolerances,
) -> Result<CircleMap> {
    require_over_center(f, chart, tol)?;
    let wg = project_p(g, tol)?;
    atlas::membership(chart, &wg, tol)?;
    let mut raw = Vec::with_capacity(g.images.len());
    for z in &g.images {
        let coords = chart.invert(z, None, 1.0, false, tol)?;
        let q = coords.base_point;
        raw.push(param_on_embedding(f, &q, tol)?);
    }
    let map = CircleMap::new(&raw).map_err(|_| GeomError::NotDiffeomorphism {
        reason: "gauge parameters are not circularly monotone".into(),
    })?;
    if map.winding() != 1 {
        return Err(GeomError::OrientationMismatch);
    }
    Ok(map)
}

/// Right action of an orientation-preserving circle diffeomorphism:
/// sample-wise composition with periodic interpolation.
pub fn act(
    f: &DiscreteEmbedding,
    phi: &CircleMap,
    tol: &Tolerances,
) -> Result<DiscreteEmbedding> {
    if phi.winding() != 1 {
        return Err(GeomError::OrientationMismatch);
    }
    let manifold = f.source.manifold();
    let mut images = Vec::with_capacity(f.images.len());
    for &u in phi.lift() {
        let p = f.image_at(u);
        images.push(manifold.project_to_surface(&p, tol)?);
    }
    DiscreteEmbedding::new(f.source.clone(), images, tol)
}

/// Local trivialization: chart coordinates of the image plus the gauge.
pub fn trivialize(
    g: &DiscreteEmbedding,
    f: &DiscreteEmbedding,
    chart: &TubularChart,
    tol: &Tolerances,
) -> Result<(atlas::ChartPoint, CircleMap)> {
    let wg = project_p(g, tol)?;
    let section = atlas::membership(chart, &wg, tol)?;
    let gauge = trivialization_gauge(g, f, chart, tol)?;
    Ok((atlas::ChartPoint::new(chart.clone(), section)?, gauge))
}

/// Inverse trivialization: rebuild the embedding from chart coordinates and
/// a gauge.
pub fn trivialize_inverse(
    chart: &TubularChart,
    section: &NormalSection,
    phi: &CircleMap,
    f: &DiscreteEmbedding,
    tol: &Tolerances,
) -> Result<DiscreteEmbedding> {
    let sigma = local_section(chart, section, f, tol)?;
    act(&sigma, phi, tol)
}
