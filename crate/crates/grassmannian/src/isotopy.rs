//! Paths in the curve space and in the embedding space: concatenation,
//! lifting a path of curves to a path of embeddings, smoothing a piecewise
//! path into a family with eased velocities, extending an isotopy to a
//! compactly supported ambient flow, and transporting one curve onto
//! another by such a flow.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::ambient::{AmbientManifold, Point, Vector};
use crate::atlas;
use crate::circle_map::CircleMap;
use crate::config::Tolerances;
use crate::embedding::{project_p, DiscreteEmbedding, EmbeddingFamily};
use crate::error::{GeomError, Result};
use crate::fourier::VectorInterp;
use crate::submanifold::{hausdorff_distance, NormalSection, OrientedSubmanifold};
use crate::tubular::TubularChart;

/// Witness that one tubular chart contains both endpoints of a path
/// segment, with the membership sections recorded.
#[derive(Debug, Clone)]
pub struct SegmentWitness {
    pub chart: TubularChart,
    pub s_start: NormalSection,
    pub s_end: NormalSection,
}

/// A discrete path in the curve space: nodes plus per-segment witnesses.
#[derive(Debug, Clone)]
pub struct GrassmannPath {
    nodes: Vec<OrientedSubmanifold>,
    witnesses: Vec<SegmentWitness>,
}

impl GrassmannPath {
    pub fn new(
        nodes: Vec<OrientedSubmanifold>,
        witnesses: Vec<SegmentWitness>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(GeomError::config("path.nodes", "must be nonempty"));
        }
        if witnesses.len() + 1 != nodes.len() {
            return Err(GeomError::config(
                "path.witnesses",
                "need one witness per consecutive pair",
            ));
        }
        for (i, w) in witnesses.iter().enumerate() {
            let start = atlas::chart_apply(&w.chart, &w.s_start, tol)?;
            let end = atlas::chart_apply(&w.chart, &w.s_end, tol)?;
            let d0 = hausdorff_distance(&start, &nodes[i]);
            let d1 = hausdorff_distance(&end, &nodes[i + 1]);
            if d0 > 10.0 * tol.contain_tol || d1 > 10.0 * tol.contain_tol {
                return Err(GeomError::config(
                    "path.witnesses",
                    format!("segment {i} sections do not reproduce the nodes ({d0:.2e}, {d1:.2e})"),
                ));
            }
        }
        Ok(GrassmannPath { nodes, witnesses })
    }

    pub fn single_node(node: OrientedSubmanifold) -> Self {
        GrassmannPath {
            nodes: vec![node],
            witnesses: Vec::new(),
        }
    }

    /// Witness each consecutive pair with the chart at the earlier node, or
    /// the chart at the later node (retraction form) if that fails.
    pub fn with_auto_witnesses(
        nodes: Vec<OrientedSubmanifold>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let mut witnesses = Vec::with_capacity(nodes.len().saturating_sub(1));
        for pair in nodes.windows(2) {
            witnesses.push(witness_for(&pair[0], &pair[1], tol)?);
        }
        Ok(GrassmannPath { nodes, witnesses })
    }

    pub fn nodes(&self) -> &[OrientedSubmanifold] {
        &self.nodes
    }

    pub fn witnesses(&self) -> &[SegmentWitness] {
        &self.witnesses
    }

    pub fn segments(&self) -> usize {
        self.witnesses.len()
    }
}

fn witness_for(
    a: &OrientedSubmanifold,
    b: &OrientedSubmanifold,
    tol: &Tolerances,
) -> Result<SegmentWitness> {
    let chart_a = TubularChart::new(a.clone(), tol)?;
    if let Ok(s_end) = atlas::membership(&chart_a, b, tol) {
        let s_start = NormalSection::zero(a);
        return Ok(SegmentWitness {
            chart: chart_a,
            s_start,
            s_end,
        });
    }
    let chart_b = TubularChart::new(b.clone(), tol)?;
    let s_start = atlas::membership(&chart_b, a, tol)?;
    let s_end = NormalSection::zero(b);
    Ok(SegmentWitness {
        chart: chart_b,
        s_start,
        s_end,
    })
}

/// A path of embeddings of a fixed reference curve: a sampled family plus
/// the junction times of its segments.
#[derive(Debug, Clone)]
pub struct EmbeddingPath {
    pub family: EmbeddingFamily,
    pub markers: Vec<f64>,
}

/// Frames per path segment when sampling analytic segment motions.
const SEGMENT_FRAMES: usize = 32;

fn fd_velocities(times: &[f64], frames: &[DiscreteEmbedding]) -> Vec<Vec<Vector>> {
    // 4th-order differences on a uniform grid, one-sided at the ends
    let n = times.len();
    let m = frames[0].images().len();
    let h = (times[n - 1] - times[0]) / (n - 1) as f64;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut vel = Vec::with_capacity(m);
        for i in 0..m {
            let f = |j: usize| &frames[j].images()[i];
            let v = if k >= 2 && k + 2 < n {
                (-f(k + 2) + 8.0 * f(k + 1) - 8.0 * f(k - 1) + f(k - 2)) / (12.0 * h)
            } else if k == 0 {
                (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / (12.0 * h)
            } else if k == 1 {
                (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / (12.0 * h)
            } else if k == n - 2 {
                (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4)
                    - f(n - 5))
                    / (12.0 * h)
            } else {
                (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4)
                    + 3.0 * f(n - 5))
                    / (12.0 * h)
            };
            vel.push(v);
        }
        out.push(vel);
    }
    out
}

fn path_from_segment_frames(
    segments: Vec<(Vec<f64>, Vec<DiscreteEmbedding>)>,
    tol: &Tolerances,
) -> Result<EmbeddingPath> {
    let mut times = Vec::new();
    let mut frames = Vec::new();
    let mut velocities = Vec::new();
    let mut markers = Vec::new();
    for (seg_times, seg_frames) in segments {
        let seg_vel = fd_velocities(&seg_times, &seg_frames);
        let skip = usize::from(!times.is_empty());
        if skip == 1 {
            markers.push(seg_times[0]);
        }
        for k in skip..seg_times.len() {
            times.push(seg_times[k]);
            frames.push(seg_frames[k].clone());
            velocities.push(seg_vel[k].clone());
        }
    }
    let family = EmbeddingFamily::new(times, frames, velocities, tol)?;
    Ok(EmbeddingPath { family, markers })
}

/// Concatenate two embedding paths: the second, a path of embeddings of the
/// image of the first's endpoint, is composed with that endpoint and the
/// whole path is reparametrized to `[0, 1]`.
pub fn concat_paths(
    beta: &EmbeddingPath,
    beta_tilde: &EmbeddingPath,
    tol: &Tolerances,
) -> Result<EmbeddingPath> {
    let e = beta.family.frames().last().unwrap().clone();
    let w = project_p(&e, tol)?;
    let src = beta_tilde.family.source();
    let d = hausdorff_distance(src, &w);
    if d > tol.contain_tol {
        return Err(GeomError::SourceMismatch { dist: d });
    }
    if src.orientation() != w.orientation() {
        return Err(GeomError::SourceMismatch { dist: f64::NAN });
    }
    // parameter of each endpoint image on the second path's source curve
    let node_aligned = e
        .images()
        .iter()
        .zip(src.samples())
        .all(|(a, b)| (a - b).norm() < tol.junction_tol);
    let mut params = Vec::with_capacity(e.images().len());
    if node_aligned {
        params.extend(src.params().iter().copied());
    } else {
        for p in e.images() {
            let (theta, dist) = src.closest_param(p, tol)?;
            if dist > tol.contain_tol {
                return Err(GeomError::SourceMismatch { dist });
            }
            params.push(theta);
        }
    }
    let mut times = Vec::new();
    let mut frames = Vec::new();
    // first half
    let t0 = beta.family.t_start();
    let span0 = beta.family.t_end() - t0;
    for (k, f) in beta.family.frames().iter().enumerate() {
        times.push(0.5 * (beta.family.times()[k] - t0) / span0);
        frames.push(f.clone());
    }
    // second half: compose each frame with the endpoint
    let t1 = beta_tilde.family.t_start();
    let span1 = beta_tilde.family.t_end() - t1;
    for (k, f) in beta_tilde.family.frames().iter().enumerate() {
        if k == 0 {
            continue; // junction frame already present as beta's endpoint
        }
        let images: Vec<Point> = params.iter().map(|&th| f.image_at(th)).collect();
        let composed = DiscreteEmbedding::new(e.source().clone(), images, tol)?;
        // junction continuity guard on the first composed frame
        if k == 1 {
            let jump = composed.max_image_distance(frames.last().unwrap());
            let step_budget =
                (beta_tilde.family.times()[1] - beta_tilde.family.times()[0]) / span1;
            if jump > tol.junction_tol + 4.0 * step_budget {
                return Err(GeomError::SourceMismatch { dist: jump });
            }
        }
        times.push(0.5 + 0.5 * (beta_tilde.family.times()[k] - t1) / span1);
        frames.push(composed);
    }
    let seg: Vec<(Vec<f64>, Vec<DiscreteEmbedding>)> = {
        // rebuild velocities per original segment boundary (the junction)
        let split = beta.family.frames().len();
        vec![
            (times[..split].to_vec(), frames[..split].to_vec()),
            (times[split - 1..].to_vec(), frames[split - 1..].to_vec()),
        ]
    };
    path_from_segment_frames(seg, tol)
}

/// Lift a path of curves to a path of embeddings of the first node.
///
/// Within each witness chart the lift moves every carried point along its
/// normal fiber from its recovered section value to the segment's target
/// section. A final in-fiber leg slides the parametrization so the endpoint
/// samples the last node at its own grid; the projection of the path is
/// unchanged by that leg.
pub fn lift_path(path: &GrassmannPath, tol: &Tolerances) -> Result<EmbeddingPath> {
    let source = path.nodes()[0].clone();
    let start = DiscreteEmbedding::identity_inclusion(&source, tol)?;
    if path.segments() == 0 {
        let times = vec![0.0, 1.0];
        let frames = vec![start.clone(), start];
        let m = source.sample_count();
        let velocities = vec![vec![Vector::zeros(source.manifold().dim_ambient()); m]; 2];
        let family = EmbeddingFamily::new(times, frames, velocities, tol)?;
        return Ok(EmbeddingPath {
            family,
            markers: Vec::new(),
        });
    }
    let nseg = path.segments() + 1; // fiber segments plus the sliding leg
    let mut segments: Vec<(Vec<f64>, Vec<DiscreteEmbedding>)> = Vec::with_capacity(nseg);
    let mut current = start;
    for (j, witness) in path.witnesses().iter().enumerate() {
        let chart = &witness.chart;
        let m = current.images().len();
        let s_end_interp = VectorInterp::new(witness.s_end.vectors());
        // recover each carried point's fiber coordinates once per segment
        let mut bases = Vec::with_capacity(m);
        let mut v_start = Vec::with_capacity(m);
        let mut v_end = Vec::with_capacity(m);
        for p in current.images() {
            let coords = chart.invert(p, None, 1.0, false, tol)?;
            let frame = chart.sigma().normal_frame_at(coords.theta);
            let raw = s_end_interp.eval(coords.theta);
            let mut b = Vector::zeros(p.len());
            for nu in &frame {
                b += nu.dot(&raw) * nu;
            }
            bases.push((coords.theta, coords.base_point));
            v_start.push(coords.normal);
            v_end.push(b);
        }
        let t0 = j as f64 / nseg as f64;
        let t1 = (j + 1) as f64 / nseg as f64;
        let mut seg_times = Vec::with_capacity(SEGMENT_FRAMES + 1);
        let mut seg_frames = Vec::with_capacity(SEGMENT_FRAMES + 1);
        for k in 0..=SEGMENT_FRAMES {
            let tau = k as f64 / SEGMENT_FRAMES as f64;
            seg_times.push(t0 + tau * (t1 - t0));
            if k == 0 {
                seg_frames.push(current.clone());
                continue;
            }
            let mut images = Vec::with_capacity(m);
            for i in 0..m {
                let v = (1.0 - tau) * &v_start[i] + tau * &v_end[i];
                let base = &bases[i].1;
                let base = chart.manifold().project_to_surface(base, tol)?;
                let v = match chart.manifold().surface_normal(&base) {
                    None => v,
                    Some(n) => &v - n.dot(&v) * &n,
                };
                images.push(chart.manifold().exp(
                    &crate::ambient::TangentVector {
                        base,
                        components: v,
                    },
                    tol,
                )?);
            }
            seg_frames.push(DiscreteEmbedding::new(source.clone(), images, tol)?);
        }
        current = seg_frames.last().unwrap().clone();
        segments.push((seg_times, seg_frames));
    }
    // sliding leg: normalize the parametrization onto the last node's grid
    let target = path.nodes().last().unwrap();
    let m = current.images().len();
    let mut raw_params = Vec::with_capacity(m);
    for p in current.images() {
        let (theta, dist) = target.closest_param(p, tol)?;
        if dist > 10.0 * tol.contain_tol {
            return Err(GeomError::SourceMismatch { dist });
        }
        raw_params.push(theta);
    }
    let u_map = CircleMap::new(&raw_params).map_err(|_| GeomError::NotDiffeomorphism {
        reason: "endpoint parametrization is not monotone".into(),
    })?;
    let t0 = (nseg - 1) as f64 / nseg as f64;
    let mut seg_times = Vec::with_capacity(SEGMENT_FRAMES + 1);
    let mut seg_frames = Vec::with_capacity(SEGMENT_FRAMES + 1);
    for k in 0..=SEGMENT_FRAMES {
        let tau = k as f64 / SEGMENT_FRAMES as f64;
        seg_times.push(t0 + tau * (1.0 - t0));
        if k == 0 {
            seg_frames.push(current.clone());
            continue;
        }
        let mut images = Vec::with_capacity(m);
        for i in 0..m {
            let grid = TAU * i as f64 / m as f64;
            let theta = (1.0 - tau) * u_map.lift()[i] + tau * grid;
            if k == SEGMENT_FRAMES {
                // land exactly on the node samples
                images.push(target.samples()[i].clone());
            } else {
                images.push(target.point_at(theta));
            }
        }
        seg_frames.push(DiscreteEmbedding::new(source.clone(), images, tol)?);
    }
    segments.push((seg_times, seg_frames));
    path_from_segment_frames(segments, tol)
}

/// Quintic easing `10 s^3 - 15 s^4 + 6 s^5` with vanishing first and second
/// derivatives at both ends.
fn quintic_ease(s: f64) -> (f64, f64) {
    let u = 10.0 * s.powi(3) - 15.0 * s.powi(4) + 6.0 * s.powi(5);
    let du = 30.0 * s.powi(2) - 60.0 * s.powi(3) + 30.0 * s.powi(4);
    (u, du)
}

/// Resample a piecewise path into a family that is twice differentiable in
/// time across the junctions, with chain-rule velocities that vanish there.
pub fn smooth_family_from_path(
    gamma: &EmbeddingPath,
    nodes_per_segment: usize,
    tol: &Tolerances,
) -> Result<EmbeddingFamily> {
    assert!(nodes_per_segment >= 5);
    let mut cuts = vec![gamma.family.t_start()];
    cuts.extend(gamma.markers.iter().copied());
    cuts.push(gamma.family.t_end());
    let source = gamma.family.source().clone();
    let mut times = Vec::new();
    let mut frames = Vec::new();
    let mut velocities = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let span = b - a;
        let start = usize::from(!times.is_empty());
        for k in start..nodes_per_segment {
            let s = k as f64 / (nodes_per_segment - 1) as f64;
            let (u, du) = quintic_ease(s);
            let t_old = a + span * u;
            let (pos, vel) = gamma.family.eval(t_old);
            let eased_vel: Vec<Vector> = vel.iter().map(|v| v * du).collect();
            times.push(a + span * s);
            frames.push(DiscreteEmbedding::new(source.clone(), pos, tol)?);
            velocities.push(eased_vel);
        }
    }
    EmbeddingFamily::new(times, frames, velocities, tol)
}

/// C^2 bump: 1 on `[0, inner]`, 0 beyond `outer`, quintic step between.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BumpProfile {
    pub inner: f64,
    pub outer: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile {
            inner: 1.0 / 3.0,
            outer: 2.0 / 3.0,
        }
    }
}

impl BumpProfile {
    /// Evaluate at the normalized tube coordinate `|v| / rho`.
    pub fn eval(&self, raw: f64) -> f64 {
        let r = (raw - self.inner) / (self.outer - self.inner);
        if r <= 0.0 {
            1.0
        } else if r >= 1.0 {
            0.0
        } else {
            1.0 - (10.0 * r.powi(3) - 15.0 * r.powi(4) + 6.0 * r.powi(5))
        }
    }
}

/// Certificate data recorded while constructing an ambient flow.
#[derive(Debug, Clone, Serialize)]
pub struct FlowCertificate {
    pub max_tracking_error: f64,
    pub steps_per_interval: usize,
    pub halvings: usize,
    pub rho_min_seen: f64,
}

/// The extension of an isotopy to an ambient diffeotopy: the flow of a
/// time-dependent velocity field supported in a tube around the moving
/// carrier, starting at the identity.
pub struct AmbientFlow {
    manifold: AmbientManifold,
    family: EmbeddingFamily,
    bump: BumpProfile,
    tol: Tolerances,
    certificate: FlowCertificate,
    /// Trajectories of the carrier samples at the family node times.
    carrier_trajectory: Vec<Vec<Point>>,
    cache: CarrierCache,
}

struct Carrier {
    chart: TubularChart,
    velocity: VectorInterp,
}

/// Write-once cache of carriers keyed by the exact bits of the time stamp;
/// dyadic refinement reproduces coarse stage times bit for bit, so halving
/// passes reuse everything they already built.
#[derive(Default)]
struct CarrierCache {
    map: std::sync::Mutex<std::collections::HashMap<u64, std::sync::Arc<Carrier>>>,
}

fn carrier_at(
    family: &EmbeddingFamily,
    t: f64,
    tol: &Tolerances,
) -> Result<Carrier> {
    let (pos, vel) = family.eval(t);
    let source = family.source();
    let w = OrientedSubmanifold::build_for_carrier(source.manifold(), pos, source.dim_k())?
        .with_orientation(source.orientation());
    let chart = TubularChart::without_certificate(w, tol)?;
    if chart.radius() < tol.rho_min {
        return Err(GeomError::TubeCollapse {
            rho: chart.radius(),
            t,
        });
    }
    Ok(Carrier {
        chart,
        velocity: VectorInterp::new(&vel),
    })
}

fn carrier_cached(
    cache: &CarrierCache,
    family: &EmbeddingFamily,
    t: f64,
    tol: &Tolerances,
) -> Result<std::sync::Arc<Carrier>> {
    let key = t.to_bits();
    if let Some(c) = cache.map.lock().unwrap().get(&key) {
        return Ok(c.clone());
    }
    let built = std::sync::Arc::new(carrier_at(family, t, tol)?);
    cache
        .map
        .lock()
        .unwrap()
        .entry(key)
        .or_insert_with(|| built.clone());
    Ok(built)
}

fn field_eval(
    manifold: &AmbientManifold,
    carrier: &Carrier,
    bump: &BumpProfile,
    y: &Point,
    hint: Option<f64>,
    tol: &Tolerances,
) -> Result<(Vector, Option<f64>)> {
    let zero = Vector::zeros(manifold.dim_ambient());
    let coords = match carrier.chart.invert(y, hint, 0.95, false, tol) {
        Ok(c) => c,
        Err(GeomError::OutsideTube { .. }) => return Ok((zero, None)),
        Err(GeomError::NoConvergence { .. }) => return Ok((zero, None)),
        Err(e) => return Err(e),
    };
    let scale = manifold.metric_scale().sqrt();
    let raw = scale * coords.normal.norm() / carrier.chart.radius();
    let chi = bump.eval(raw);
    if chi == 0.0 {
        return Ok((zero, Some(coords.theta)));
    }
    let u = carrier.velocity.eval(coords.theta);
    let yp = manifold.project_to_surface(y, tol)?;
    let tangent = manifold.project_tangent(&yp, &u, tol)?;
    Ok((chi * tangent.components, Some(coords.theta)))
}

impl AmbientFlow {
    /// Integrate the extension of a smooth family, with step halving until
    /// the tracked endpoints settle, and verify it tracks the isotopy.
    pub fn extend(family: EmbeddingFamily, tol: &Tolerances) -> Result<AmbientFlow> {
        let manifold = family.source().manifold().clone();
        let bump = BumpProfile::default();
        let cache = CarrierCache::default();
        let seeds: Vec<Point> = family.frames()[0].images().to_vec();
        // step control runs on a representative subset of the seeds; the
        // accepted resolution is then verified on all of them
        let stride = (seeds.len() / 16).max(1);
        let control: Vec<Point> = seeds.iter().step_by(stride).cloned().collect();
        let node_times: Vec<f64> = family.times().to_vec();
        let mut steps = 1usize;
        let mut halvings = 0usize;
        let mut prev: Option<Vec<Point>> = None;
        let mut accepted: Option<usize> = None;
        while halvings <= tol.flow_halvings_max {
            let (recorded, _) = integrate(
                &manifold,
                &family,
                &bump,
                &cache,
                &control,
                None,
                steps,
                &[*node_times.last().unwrap()],
                tol,
            )?;
            let finals = recorded.last().unwrap().clone();
            if let Some(p) = &prev {
                let change = finals
                    .iter()
                    .zip(p)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                if change < tol.flow_tol {
                    accepted = Some(steps);
                    break;
                }
            }
            prev = Some(finals);
            steps *= 2;
            halvings += 1;
        }
        let steps = accepted.ok_or(GeomError::NoConvergence {
            what: "flow step control",
            last_change: f64::INFINITY,
        })?;
        // full-seed pass for the tracking certificate; the ladder already
        // bounds the integration error two halvings below this resolution
        // at a small multiple of flow_tol, far under track_tol
        let tracking_steps = (steps / 4).max(1);
        let (recorded, rho_min) = integrate(
            &manifold,
            &family,
            &bump,
            &cache,
            &seeds,
            None,
            tracking_steps,
            &node_times,
            tol,
        )?;
        let mut max_dev = 0.0_f64;
        for (k, frame) in family.frames().iter().enumerate() {
            for (a, b) in recorded[k].iter().zip(frame.images()) {
                max_dev = max_dev.max((a - b).norm());
            }
        }
        if max_dev > tol.track_tol {
            return Err(GeomError::TrackingFailure {
                max_dev,
                tol: tol.track_tol,
            });
        }
        let certificate = FlowCertificate {
            max_tracking_error: max_dev,
            steps_per_interval: steps,
            halvings,
            rho_min_seen: rho_min,
        };
        Ok(AmbientFlow {
            manifold,
            family,
            bump,
            tol: tol.clone(),
            certificate,
            carrier_trajectory: recorded,
            cache,
        })
    }

    pub fn certificate(&self) -> &FlowCertificate {
        &self.certificate
    }

    pub fn family(&self) -> &EmbeddingFamily {
        &self.family
    }

    pub fn bump(&self) -> &BumpProfile {
        &self.bump
    }

    /// Carrier-sample trajectories recorded at the family node times.
    pub fn carrier_trajectory(&self) -> &[Vec<Point>] {
        &self.carrier_trajectory
    }

    /// The extending velocity field at `(t, y)`.
    pub fn velocity(&self, t: f64, y: &Point) -> Result<Vector> {
        let carrier = carrier_cached(&self.cache, &self.family, t, &self.tol)?;
        Ok(field_eval(&self.manifold, &carrier, &self.bump, y, None, &self.tol)?.0)
    }

    /// Flow arbitrary points from `t0` to `t1` with the accepted step size.
    pub fn flow_points(&self, seeds: &[Point], t0: f64, t1: f64) -> Result<Vec<Point>> {
        if t1 < t0 {
            return Err(GeomError::config("t1", "flows run forward in time"));
        }
        if (t1 - t0).abs() < 1e-15 {
            return Ok(seeds.to_vec());
        }
        let steps = self.certificate.steps_per_interval;
        let node_times: Vec<f64> = self
            .family
            .times()
            .iter()
            .copied()
            .filter(|&t| t > t0 + 1e-15 && t < t1 - 1e-15)
            .collect();
        let mut grid = vec![t0];
        grid.extend(node_times);
        grid.push(t1);
        let (recorded, _) = integrate(
            &self.manifold,
            &self.family,
            &self.bump,
            &self.cache,
            seeds,
            Some(&grid),
            steps,
            &[t1],
            &self.tol,
        )?;
        Ok(recorded.last().unwrap().clone())
    }

    /// Jacobian determinant estimates of the flow map at a probe point,
    /// recorded at every family node time.
    pub fn jacobian_dets(&self, probe: &Point, eps: f64) -> Result<Vec<f64>> {
        Ok(self.jacobian_dets_batch(std::slice::from_ref(probe), eps)?.remove(0))
    }

    /// Same, for many probes in one integration pass.
    pub fn jacobian_dets_batch(&self, probes: &[Point], eps: f64) -> Result<Vec<Vec<f64>>> {
        let dim = self.manifold.dim_ambient();
        let mut satellites = Vec::with_capacity(2 * dim * probes.len());
        for probe in probes {
            for c in 0..dim {
                let mut plus = probe.clone();
                let mut minus = probe.clone();
                plus[c] += eps;
                minus[c] -= eps;
                satellites.push(plus);
                satellites.push(minus);
            }
        }
        let node_times: Vec<f64> = self.family.times().to_vec();
        let (recorded, _) = integrate(
            &self.manifold,
            &self.family,
            &self.bump,
            &self.cache,
            &satellites,
            None,
            self.certificate.steps_per_interval,
            &node_times,
            &self.tol,
        )?;
        let mut out = Vec::with_capacity(probes.len());
        for q in 0..probes.len() {
            let base = 2 * dim * q;
            let mut dets = Vec::with_capacity(recorded.len());
            for snapshot in &recorded {
                let mut jac = nalgebra::DMatrix::zeros(dim, dim);
                for c in 0..dim {
                    let col =
                        (&snapshot[base + 2 * c] - &snapshot[base + 2 * c + 1]) / (2.0 * eps);
                    jac.set_column(c, &col);
                }
                dets.push(jac.determinant());
            }
            out.push(dets);
        }
        Ok(out)
    }
}

/// RK4 in lockstep over all tracked points.
///
/// Steps subdivide the family intervals (or the supplied grid) so that the
/// field's time kinks at family nodes always fall on step boundaries;
/// positions are recorded whenever a boundary is one of `record_at`.
#[allow(clippy::too_many_arguments)]
fn integrate(
    manifold: &AmbientManifold,
    family: &EmbeddingFamily,
    bump: &BumpProfile,
    cache: &CarrierCache,
    seeds: &[Point],
    grid_override: Option<&[f64]>,
    steps_per_interval: usize,
    record_at: &[f64],
    tol: &Tolerances,
) -> Result<(Vec<Vec<Point>>, f64)> {
    let default_grid: Vec<f64>;
    let grid: &[f64] = match grid_override {
        Some(g) => g,
        None => {
            default_grid = family.times().to_vec();
            &default_grid
        }
    };
    let mut points: Vec<Point> = seeds.to_vec();
    let mut hints: Vec<Option<f64>> = vec![None; seeds.len()];
    let mut recorded: Vec<Vec<Point>> = Vec::with_capacity(record_at.len());
    let mut record_idx = 0;
    let mut rho_min = f64::INFINITY;
    // record at the start if requested
    while record_idx < record_at.len() && record_at[record_idx] <= grid[0] + 1e-15 {
        recorded.push(points.clone());
        record_idx += 1;
    }
    for w in grid.windows(2) {
        let (ia, ib) = (w[0], w[1]);
        let span = ib - ia;
        let h = span / steps_per_interval as f64;
        // stage times written so that dyadic refinements reproduce the
        // coarse stamps bit for bit (cache hits across halving passes)
        let stamp = |num: usize, den: usize| ia + span * (num as f64 / den as f64);
        for s in 0..steps_per_interval {
            let t = stamp(s, steps_per_interval);
            let t_mid = stamp(2 * s + 1, 2 * steps_per_interval);
            let t_end = stamp(s + 1, steps_per_interval);
            let c_start = carrier_cached(cache, family, t, tol)?;
            let c_mid = carrier_cached(cache, family, t_mid, tol)?;
            let c_end = carrier_cached(cache, family, t_end, tol)?;
            rho_min = rho_min
                .min(c_start.chart.radius())
                .min(c_mid.chart.radius())
                .min(c_end.chart.radius());
            for (i, y) in points.iter_mut().enumerate() {
                let (k1, hint1) = field_eval(manifold, &c_start, bump, y, hints[i], tol)?;
                let y2 = &*y + 0.5 * h * &k1;
                let (k2, _) = field_eval(manifold, &c_mid, bump, &y2, hint1, tol)?;
                let y3 = &*y + 0.5 * h * &k2;
                let (k3, _) = field_eval(manifold, &c_mid, bump, &y3, hint1, tol)?;
                let y4 = &*y + h * &k3;
                let (k4, hint4) = field_eval(manifold, &c_end, bump, &y4, hint1, tol)?;
                let incr = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if incr.norm() > 0.0 {
                    *y += incr;
                    *y = manifold.project_to_surface(y, tol)?;
                }
                hints[i] = hint4.or(hint1);
            }
        }
        while record_idx < record_at.len() && record_at[record_idx] <= ib + 1e-12 {
            recorded.push(points.clone());
            record_idx += 1;
        }
    }
    while record_idx < record_at.len() {
        recorded.push(points.clone());
        record_idx += 1;
    }
    Ok((recorded, rho_min))
}

/// Certificate produced by a transport run.
#[derive(Debug, Clone, Serialize)]
pub struct TransportCertificate {
    pub endpoint_hausdorff: f64,
    pub orientation_matched: bool,
    pub max_tracking_error: f64,
    pub min_jacobian_det: f64,
    pub segments: usize,
}

pub struct TransportResult {
    pub flow: AmbientFlow,
    pub path: GrassmannPath,
    pub certificate: TransportCertificate,
    pub transported: OrientedSubmanifold,
}

/// Pointwise convex blend of two index-aligned curves, projected back to
/// the surface. The bisection heuristic for chart hopping.
fn blend(
    a: &OrientedSubmanifold,
    b: &OrientedSubmanifold,
    lambda: f64,
    tol: &Tolerances,
) -> Result<OrientedSubmanifold> {
    if a.sample_count() != b.sample_count() {
        return Err(GeomError::config("blend", "curves must share the grid size"));
    }
    let manifold = a.manifold();
    let samples: Result<Vec<Point>> = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(p, q)| manifold.project_to_surface(&((1.0 - lambda) * p + lambda * q), tol))
        .collect();
    OrientedSubmanifold::build(manifold, samples?, a.dim_k(), tol)
}

fn connect(
    a: &OrientedSubmanifold,
    b: &OrientedSubmanifold,
    depth: usize,
    attempts: &mut usize,
    tol: &Tolerances,
) -> Result<Vec<OrientedSubmanifold>> {
    if *attempts >= 32 {
        return Err(GeomError::NoPathFound { attempts: *attempts });
    }
    *attempts += 1;
    if witness_for(a, b, tol).is_ok() {
        return Ok(Vec::new());
    }
    if depth == 0 {
        return Err(GeomError::NoPathFound { attempts: *attempts });
    }
    let mid = blend(a, b, 0.5, tol)?;
    let mut left = connect(a, &mid, depth - 1, attempts, tol)?;
    let right = connect(&mid, b, depth - 1, attempts, tol)?;
    left.push(mid);
    left.extend(right);
    Ok(left)
}

/// Find a chart path by greedy bisection (heuristic; failure is reported,
/// not a disproof of connectivity).
pub fn discover_path(
    sigma0: &OrientedSubmanifold,
    sigma1: &OrientedSubmanifold,
    tol: &Tolerances,
) -> Result<GrassmannPath> {
    let mut attempts = 0usize;
    let between = connect(sigma0, sigma1, 5, &mut attempts, tol)?;
    let mut nodes = vec![sigma0.clone()];
    nodes.extend(between);
    nodes.push(sigma1.clone());
    GrassmannPath::with_auto_witnesses(nodes, tol)
}

/// Transport one curve onto another in the same component: lift a chart
/// path, smooth it, extend it to an ambient flow, and certify the endpoint.
pub fn transport(
    sigma0: &OrientedSubmanifold,
    sigma1: &OrientedSubmanifold,
    path: Option<GrassmannPath>,
    tol: &Tolerances,
) -> Result<TransportResult> {
    let path = match path {
        Some(p) => p,
        None => {
            if hausdorff_distance(sigma0, sigma1) < tol.contain_tol
                && sigma0.orientation() == sigma1.orientation()
            {
                GrassmannPath::single_node(sigma0.clone())
            } else {
                discover_path(sigma0, sigma1, tol)?
            }
        }
    };
    let gamma = lift_path(&path, tol)?;
    let family = smooth_family_from_path(&gamma, 33, tol)?;
    let flow = AmbientFlow::extend(family, tol)?;
    let flowed = flow.carrier_trajectory().last().unwrap().clone();
    let transported = OrientedSubmanifold::build(
        sigma0.manifold(),
        flowed,
        sigma0.dim_k(),
        tol,
    )?
    .with_orientation(sigma0.orientation());
    let endpoint = hausdorff_distance(&transported, sigma1);
    let chart1 = TubularChart::new(sigma1.clone(), tol)?;
    let orientation_matched = atlas::membership(&chart1, &transported, tol).is_ok();
    // probe points at mid-tube around the start curve
    let chart0 = TubularChart::new(sigma0.clone(), tol)?;
    let mut probes = Vec::new();
    let stride = (sigma0.sample_count() / 4).max(1);
    for i in (0..sigma0.sample_count()).step_by(stride) {
        for frac in [0.0, 0.5] {
            probes.push(
                sigma0.samples()[i].clone()
                    + frac * chart0.radius() * &sigma0.normal_frame(i)[0],
            );
        }
    }
    let mut min_det = f64::INFINITY;
    for dets in flow.jacobian_dets_batch(&probes, 1e-5)? {
        for det in dets {
            min_det = min_det.min(det);
        }
    }
    let certificate = TransportCertificate {
        endpoint_hausdorff: endpoint,
        orientation_matched,
        max_tracking_error: flow.certificate().max_tracking_error,
        min_jacobian_det: min_det,
        segments: path.segments(),
    };
    if endpoint > tol.transport_tol {
        return Err(GeomError::TrackingFailure {
            max_dev: endpoint,
            tol: tol.transport_tol,
        });
    }
    Ok(TransportResult {
        flow,
        path,
        certificate,
        transported,
    })
}
