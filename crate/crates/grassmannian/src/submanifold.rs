//! Discrete oriented compact connected submanifolds: closed curves sampled
//! on a uniform periodic parameter grid, with orthonormal tangent/normal
//! frames, an orientation sign, and set-distance between curves.

use std::f64::consts::TAU;

use crate::ambient::{AmbientManifold, Point, Vector};
use crate::circle_map::CircleMap;
use crate::config::Tolerances;
use crate::error::{GeomError, Result};
use crate::fourier::VectorInterp;

/// Orthonormality threshold for stored frames (type invariant, not tunable).
pub const FRAME_ORTHO_TOL: f64 = 1e-9;

/// A discrete closed curve `Sigma` in the ambient space: `m` on-manifold
/// samples over the uniform grid `theta_i = 2*pi*i/m`, an orientation sign
/// relative to grid order, and per-sample orthonormal frames of the curve
/// tangent and of its normal fiber inside the ambient tangent space.
///
/// Off-grid geometry (positions, frames) comes from trigonometric
/// interpolation of the node data; the interpolant is the curve the discrete
/// object denotes, and every solver in the crate is consistent with it.
#[derive(Debug, Clone)]
pub struct OrientedSubmanifold {
    manifold: AmbientManifold,
    dim_k: usize,
    params: Vec<f64>,
    samples: Vec<Point>,
    orientation: i8,
    tangent_frames: Vec<Vec<Vector>>,
    normal_frames: Vec<Vec<Vector>>,
    pos_interp: VectorInterp,
    tangent_interp: Vec<VectorInterp>,
    // built on first use; flow carriers never query the normal field
    normal_interp: once_cell::sync::OnceCell<Vec<VectorInterp>>,
}

/// A section of the normal bundle: one ambient vector per sample, each lying
/// in the normal fiber at its sample. Also the tangent-space model of the
/// curve space at its base.
#[derive(Debug, Clone)]
pub struct NormalSection {
    vectors: Vec<Vector>,
}

impl NormalSection {
    pub fn new(base: &OrientedSubmanifold, vectors: Vec<Vector>) -> Result<Self> {
        if vectors.len() != base.sample_count() {
            return Err(GeomError::config(
                "section",
                format!(
                    "expected {} vectors, got {}",
                    base.sample_count(),
                    vectors.len()
                ),
            ));
        }
        for (i, v) in vectors.iter().enumerate() {
            for t in &base.tangent_frames[i] {
                if t.dot(v).abs() > FRAME_ORTHO_TOL * v.norm().max(1.0) {
                    return Err(GeomError::config(
                        "section",
                        format!("vector {i} is not in the normal fiber"),
                    ));
                }
            }
            if let Some(n) = base.manifold.surface_normal(&base.samples[i]) {
                if n.dot(v).abs() > 1e-8 * v.norm().max(1.0) {
                    return Err(GeomError::config(
                        "section",
                        format!("vector {i} leaves the ambient tangent space"),
                    ));
                }
            }
        }
        Ok(NormalSection { vectors })
    }

    pub fn zero(base: &OrientedSubmanifold) -> Self {
        NormalSection {
            vectors: vec![Vector::zeros(base.manifold.dim_ambient()); base.sample_count()],
        }
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Largest metric norm over the samples.
    pub fn sup_norm(&self, manifold: &AmbientManifold) -> f64 {
        self.vectors
            .iter()
            .map(|v| manifold.metric_norm(v))
            .fold(0.0, f64::max)
    }

    /// Componentwise linear combination `(1 - t) * self + t * other`.
    pub fn lerp(&self, other: &NormalSection, t: f64) -> NormalSection {
        let vectors = self
            .vectors
            .iter()
            .zip(&other.vectors)
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        NormalSection { vectors }
    }

    /// Largest per-sample difference against another section.
    pub fn max_difference(&self, other: &NormalSection) -> f64 {
        self.vectors
            .iter()
            .zip(&other.vectors)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl OrientedSubmanifold {
    /// Build a discrete closed curve from on-manifold samples.
    ///
    /// Tangents come from 4th-order central differences on the periodic
    /// grid; normal frames complete them to an orthonormal basis of the
    /// ambient tangent space at each sample.
    pub fn build(
        manifold: &AmbientManifold,
        samples: Vec<Point>,
        dim_k: usize,
        tol: &Tolerances,
    ) -> Result<Self> {
        if dim_k != 1 {
            return Err(GeomError::config(
                "dim_k",
                "only k = 1 (closed curves) is supported",
            ));
        }
        let m = samples.len();
        if m < 16 {
            return Err(GeomError::TooFewSamples { got: m, min: 16 });
        }
        for p in &samples {
            manifold.check_on_manifold(p, tol)?;
        }
        // simplicity at resolution scale
        let min_adjacent = (0..m)
            .map(|i| (&samples[(i + 1) % m] - &samples[i]).norm())
            .fold(f64::INFINITY, f64::min);
        if min_adjacent < 1e-14 {
            return Err(GeomError::SelfIntersection {
                i: 0,
                j: 1,
                dist: min_adjacent,
            });
        }
        let embed_sep = tol.embed_sep_factor * min_adjacent;
        for i in 0..m {
            for j in (i + 2)..m {
                if i == 0 && j == m - 1 {
                    continue; // adjacent across the wrap
                }
                let d = crate::ambient::dist2(&samples[i], &samples[j]).sqrt();
                if d <= embed_sep {
                    return Err(GeomError::SelfIntersection { i, j, dist: d });
                }
            }
        }
        Self::assemble(manifold, samples, dim_k)
    }

    /// Construction path for flow carriers: the samples come from a family
    /// whose node frames were already validated, so the simplicity scan and
    /// the surface residual checks are skipped.
    pub(crate) fn build_for_carrier(
        manifold: &AmbientManifold,
        samples: Vec<Point>,
        dim_k: usize,
    ) -> Result<Self> {
        if samples.len() < 16 {
            return Err(GeomError::TooFewSamples {
                got: samples.len(),
                min: 16,
            });
        }
        Self::assemble(manifold, samples, dim_k)
    }

    fn assemble(manifold: &AmbientManifold, samples: Vec<Point>, dim_k: usize) -> Result<Self> {
        let m = samples.len();
        let params: Vec<f64> = (0..m).map(|i| TAU * i as f64 / m as f64).collect();
        let h = TAU / m as f64;
        let n = manifold.dim_manifold();
        let codim = n - dim_k;

        let mut tangent_frames = Vec::with_capacity(m);
        for i in 0..m {
            let ip1 = &samples[(i + 1) % m];
            let ip2 = &samples[(i + 2) % m];
            let im1 = &samples[(i + m - 1) % m];
            let im2 = &samples[(i + m - 2) % m];
            let deriv = (-ip2 + 8.0 * ip1 - 8.0 * im1 + im2) / (12.0 * h);
            let t = match manifold.surface_normal(&samples[i]) {
                None => deriv,
                Some(nrm) => &deriv - nrm.dot(&deriv) * &nrm,
            };
            let norm = t.norm();
            if norm < 1e-12 {
                return Err(GeomError::NotEmbedding {
                    reason: format!("vanishing grid derivative at sample {i}"),
                });
            }
            tangent_frames.push(vec![t / norm]);
        }

        let mut normal_frames: Vec<Vec<Vector>> = Vec::with_capacity(m);
        for i in 0..m {
            let t = &tangent_frames[i][0];
            let x = &samples[i];
            let dim = manifold.dim_ambient();
            let frame = if codim == 0 {
                Vec::new()
            } else if dim == 2 && manifold.surface_normal(x).is_none() {
                // in-plane normal: rotate the tangent by -90 degrees
                vec![crate::ambient::point(&[t[1], -t[0]])]
            } else if dim == 3 && codim == 1 {
                // in-surface normal: surface normal cross tangent
                let nrm = manifold
                    .surface_normal(x)
                    .expect("codimension-1 curve needs a surface");
                vec![cross3(&nrm, t)]
            } else {
                gram_schmidt_normals(manifold, x, t, codim, normal_frames.last())
            };
            normal_frames.push(frame);
        }

        let pos_interp = VectorInterp::new(&samples);
        let tangent_interp = vec![VectorInterp::new(
            &tangent_frames.iter().map(|f| f[0].clone()).collect::<Vec<_>>(),
        )];

        Ok(OrientedSubmanifold {
            manifold: manifold.clone(),
            dim_k,
            params,
            samples,
            orientation: 1,
            tangent_frames,
            normal_frames,
            pos_interp,
            tangent_interp,
            normal_interp: once_cell::sync::OnceCell::new(),
        })
    }

    fn normal_interp(&self) -> &[VectorInterp] {
        self.normal_interp.get_or_init(|| {
            let codim = self.codimension();
            (0..codim)
                .map(|a| {
                    VectorInterp::new(
                        &self
                            .normal_frames
                            .iter()
                            .map(|f| f[a].clone())
                            .collect::<Vec<_>>(),
                    )
                })
                .collect()
        })
    }

    pub fn manifold(&self) -> &AmbientManifold {
        &self.manifold
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn tangent_frame(&self, i: usize) -> &[Vector] {
        &self.tangent_frames[i]
    }

    pub fn normal_frame(&self, i: usize) -> &[Vector] {
        &self.normal_frames[i]
    }

    pub fn codimension(&self) -> usize {
        self.manifold.dim_manifold() - self.dim_k
    }

    /// Smallest distance between consecutive samples.
    pub fn min_adjacent_spacing(&self) -> f64 {
        let m = self.sample_count();
        (0..m)
            .map(|i| (&self.samples[(i + 1) % m] - &self.samples[i]).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Separation floor for sampled injectivity checks.
    pub fn embed_sep(&self, tol: &Tolerances) -> f64 {
        tol.embed_sep_factor * self.min_adjacent_spacing()
    }

    /// Same point set, opposite orientation sign. Involution.
    pub fn reverse_orientation(&self) -> OrientedSubmanifold {
        let mut out = self.clone();
        out.orientation = -out.orientation;
        out
    }

    pub(crate) fn with_orientation(mut self, orientation: i8) -> Self {
        self.orientation = orientation;
        self
    }

    // ---- interpolated geometry --------------------------------------

    /// Interpolated curve point.
    pub fn point_at(&self, theta: f64) -> Point {
        self.pos_interp.eval(theta)
    }

    /// Interpolated point with first and second parameter derivative.
    pub fn point_derivs_at(&self, theta: f64) -> (Point, Vector, Vector) {
        self.pos_interp.eval_derivs(theta)
    }

    /// Unit tangent field, interpolating the node tangents (exact at nodes).
    pub fn tangent_at(&self, theta: f64) -> Vector {
        self.tangent_interp[0].eval(theta).normalize()
    }

    /// Orthonormal normal frame field, interpolating the node frames.
    ///
    /// Exact at the nodes; off the nodes the interpolated vectors are
    /// re-orthonormalized against the interpolated tangent.
    pub fn normal_frame_at(&self, theta: f64) -> Vec<Vector> {
        let t = self.tangent_at(theta);
        let normal_interp = self.normal_interp();
        let mut out: Vec<Vector> = Vec::with_capacity(normal_interp.len());
        let surface_n = self.manifold.surface_normal(&self.point_at(theta));
        for interp in normal_interp {
            let mut v = interp.eval(theta);
            v -= t.dot(&v) * &t;
            if let Some(n) = &surface_n {
                v -= n.dot(&v) * n;
            }
            for prev in &out {
                let d = prev.dot(&v);
                v -= d * prev;
            }
            out.push(v.normalize());
        }
        out
    }

    /// Parameter of the interpolated curve point nearest to `q`, with the
    /// distance; Newton from the nearest vertex.
    pub fn closest_param(&self, q: &Point, tol: &Tolerances) -> Result<(f64, f64)> {
        let m = self.sample_count();
        let init = self
            .samples
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - q).norm_squared().total_cmp(&(*b - q).norm_squared()))
            .map(|(i, _)| TAU * i as f64 / m as f64)
            .unwrap();
        let mut theta = init;
        for _ in 0..tol.max_newton_iters {
            let (p, d1, d2) = self.point_derivs_at(theta);
            let diff = q - &p;
            let g = diff.dot(&d1);
            if g.abs() < tol.root_tol * d1.norm().max(1.0) {
                break;
            }
            let dg = -d1.norm_squared() + diff.dot(&d2);
            if dg.abs() < 1e-14 {
                break;
            }
            theta -= (g / dg).clamp(-0.5, 0.5);
        }
        let dist = (q - self.point_at(theta)).norm();
        Ok((theta.rem_euclid(TAU), dist))
    }

    pub(crate) fn pos_interp(&self) -> &VectorInterp {
        &self.pos_interp
    }

    /// Raw (unnormalized) interpolant of the node tangent field.
    pub(crate) fn tangent_interp_raw(&self) -> &VectorInterp {
        &self.tangent_interp[0]
    }

    /// Wrap a parameter into `[0, 2*pi)` and locate (index, offset).
    pub fn index_offset(&self, theta: f64) -> (usize, f64) {
        let m = self.sample_count() as f64;
        let t = theta.rem_euclid(TAU);
        let pos = t / TAU * m;
        let idx = pos.floor() as usize % self.sample_count();
        (idx, pos - pos.floor())
    }

    // ---- serialization ----------------------------------------------

    /// CSV block: `k`, `m`, `orientation` header rows, then one row per
    /// sample with the parameter and the ambient coordinates.
    pub fn to_csv(&self) -> String {
        let dim = self.manifold.dim_ambient();
        let mut out = String::new();
        out.push_str(&format!("k,{}\n", self.dim_k));
        out.push_str(&format!("m,{}\n", self.sample_count()));
        out.push_str(&format!("orientation,{}\n", self.orientation));
        out.push_str("parameter");
        for c in 0..dim {
            out.push_str(&format!(",x{c}"));
        }
        out.push('\n');
        for (theta, p) in self.params.iter().zip(&self.samples) {
            out.push_str(&format!("{theta}"));
            for c in 0..dim {
                out.push_str(&format!(",{}", p[c]));
            }
            out.push('\n');
        }
        out
    }

    /// Rebuild a curve from its CSV block.
    pub fn from_csv(manifold: &AmbientManifold, text: &str, tol: &Tolerances) -> Result<Self> {
        let mut lines = text.lines();
        let mut header = std::collections::HashMap::new();
        for _ in 0..3 {
            let line = lines
                .next()
                .ok_or_else(|| GeomError::config("csv", "truncated header"))?;
            let mut parts = line.splitn(2, ',');
            let key = parts.next().unwrap_or("").to_string();
            let value = parts
                .next()
                .ok_or_else(|| GeomError::config("csv", "malformed header row"))?;
            header.insert(key, value.to_string());
        }
        let k: usize = header
            .get("k")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| GeomError::config("csv.k", "missing or invalid"))?;
        let orientation: i8 = header
            .get("orientation")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| GeomError::config("csv.orientation", "missing or invalid"))?;
        let _ = lines.next(); // column header
        let mut samples = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            let coords: std::result::Result<Vec<f64>, _> =
                cols[1..].iter().map(|c| c.parse::<f64>()).collect();
            let coords = coords.map_err(|e| GeomError::config("csv.row", e.to_string()))?;
            samples.push(Point::from_row_slice(&coords));
        }
        let built = OrientedSubmanifold::build(manifold, samples, k, tol)?;
        Ok(if orientation < 0 {
            built.reverse_orientation()
        } else {
            built
        })
    }
}

fn cross3(a: &Vector, b: &Vector) -> Vector {
    crate::ambient::point(&[
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

/// Fallback normal-frame construction: Gram-Schmidt of the ambient tangent
/// space against the curve tangent, signs aligned with the previous sample.
fn gram_schmidt_normals(
    manifold: &AmbientManifold,
    x: &Point,
    t: &Vector,
    codim: usize,
    previous: Option<&Vec<Vector>>,
) -> Vec<Vector> {
    let dim = manifold.dim_ambient();
    let surface_n = manifold.surface_normal(x);
    let mut basis: Vec<Vector> = Vec::new();
    for c in 0..dim {
        let mut e = Vector::zeros(dim);
        e[c] = 1.0;
        if let Some(n) = &surface_n {
            e -= n.dot(&e) * n;
        }
        e -= t.dot(&e) * t;
        for prev in &basis {
            let d = prev.dot(&e);
            e -= d * prev;
        }
        if e.norm() > 1e-8 {
            basis.push(e.normalize());
        }
        if basis.len() == codim {
            break;
        }
    }
    if let Some(prev_frame) = previous {
        for (a, v) in basis.iter_mut().enumerate() {
            if a < prev_frame.len() && prev_frame[a].dot(v) < 0.0 {
                *v = -v.clone();
            }
        }
    }
    basis
}

/// `+1` if the correspondence carries the source orientation onto the
/// target's stored orientation, `-1` otherwise.
pub fn orientation_sign(
    source: &OrientedSubmanifold,
    target: &OrientedSubmanifold,
    correspondence: &CircleMap,
) -> i8 {
    source.orientation() * correspondence.winding() * target.orientation()
}

/// Validate raw per-sample target parameters first, then compare signs.
pub fn orientation_sign_from_params(
    source: &OrientedSubmanifold,
    target: &OrientedSubmanifold,
    target_params: &[f64],
) -> Result<i8> {
    let map = CircleMap::new(target_params)?;
    Ok(orientation_sign(source, target, &map))
}

/// Distance from a point to the segment `[a, b]`.
fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 < 1e-30 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + t * ab)).norm()
}

/// Distance from a point to the closed polyline through `samples`.
pub fn point_polyline_distance(p: &Point, samples: &[Point]) -> f64 {
    let m = samples.len();
    let mut best = f64::INFINITY;
    for i in 0..m {
        let d = point_segment_distance(p, &samples[i], &samples[(i + 1) % m]);
        if d < best {
            best = d;
        }
    }
    best
}

fn directed_hausdorff(a: &[Point], b: &[Point]) -> f64 {
    a.iter()
        .map(|p| point_polyline_distance(p, b))
        .fold(0.0, f64::max)
}

/// Distance from a point to the interpolated curve: exact-zero shortcut at
/// coincident vertices, then Newton from the nearest vertex.
fn point_curve_distance(p: &Point, curve: &OrientedSubmanifold) -> f64 {
    let mut best_vertex = f64::INFINITY;
    for s in curve.samples() {
        let d = (p - s).norm();
        if d < best_vertex {
            best_vertex = d;
        }
    }
    if best_vertex == 0.0 {
        return 0.0;
    }
    let tol = Tolerances::default();
    match curve.closest_param(p, &tol) {
        Ok((_, d)) => d.min(best_vertex),
        Err(_) => best_vertex,
    }
}

fn directed_curve_hausdorff(a: &OrientedSubmanifold, b: &OrientedSubmanifold) -> f64 {
    a.samples()
        .iter()
        .map(|p| point_curve_distance(p, b))
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two sampled closed curves, with
/// segment-level projection (each sample against the other curve's
/// interpolated segments, not just vertex-to-vertex), in ambient Euclidean
/// distance.
pub fn hausdorff_distance(a: &OrientedSubmanifold, b: &OrientedSubmanifold) -> f64 {
    directed_curve_hausdorff(a, b).max(directed_curve_hausdorff(b, a))
}

/// Polyline-chord variant for raw sample sets.
pub fn hausdorff_between_samples(a: &[Point], b: &[Point]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::point;
    use crate::generators;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn circle_frames_match_closed_form() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 64, 1.0, &[0.0, 0.0], &tol()).unwrap();
        for (i, &theta) in sigma.params().iter().enumerate() {
            let t_expected = point(&[-theta.sin(), theta.cos()]);
            let n_expected = point(&[theta.cos(), theta.sin()]);
            assert!((&sigma.tangent_frame(i)[0] - t_expected).norm() < 1e-6);
            assert!((&sigma.normal_frame(i)[0] - n_expected).norm() < 1e-6);
        }
    }

    #[test]
    fn equator_normal_fiber_is_vertical() {
        let m = AmbientManifold::round_sphere(3);
        let sigma = generators::equator(&m, 64, &tol()).unwrap();
        for i in 0..64 {
            let frame = sigma.normal_frame(i);
            assert_eq!(frame.len(), 1);
            assert!((&frame[0] - point(&[0.0, 0.0, 1.0])).norm() < 1e-6);
        }
    }

    #[test]
    fn self_touching_curve_is_rejected() {
        let m = AmbientManifold::flat(2);
        // figure-six: loop that comes back through its own start region
        let samples: Vec<Point> = (0..64)
            .map(|i| {
                let t = TAU * i as f64 / 64.0;
                point(&[t.sin() * (1.0 - t / TAU), (2.0 * t).sin() * 0.3])
            })
            .collect();
        assert!(matches!(
            OrientedSubmanifold::build(&m, samples, 1, &tol()),
            Err(GeomError::SelfIntersection { .. })
        ));
    }

    #[test]
    fn too_few_samples_is_rejected() {
        let m = AmbientManifold::flat(2);
        let samples: Vec<Point> = (0..8)
            .map(|i| {
                let t = TAU * i as f64 / 8.0;
                point(&[t.cos(), t.sin()])
            })
            .collect();
        assert!(matches!(
            OrientedSubmanifold::build(&m, samples, 1, &tol()),
            Err(GeomError::TooFewSamples { got: 8, min: 16 })
        ));
    }

    #[test]
    fn reverse_orientation_is_involution() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 64, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let twice = sigma.reverse_orientation().reverse_orientation();
        assert_eq!(twice.orientation(), sigma.orientation());
        assert_eq!(hausdorff_distance(&sigma, &twice), 0.0);
        assert_eq!(sigma.reverse_orientation().orientation(), -1);
    }

    #[test]
    fn orientation_sign_examples() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 64, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let identity = CircleMap::identity(64);
        assert_eq!(orientation_sign(&sigma, &sigma, &identity), 1);

        let reflect: Vec<f64> = (0..64).map(|i| -(TAU * i as f64 / 64.0)).collect();
        assert_eq!(
            orientation_sign_from_params(&sigma, &sigma, &reflect).unwrap(),
            -1
        );

        let rot = CircleMap::rotation(64, 0.3);
        assert_eq!(orientation_sign(&sigma, &sigma, &rot), 1);

        assert_eq!(
            orientation_sign(&sigma, &sigma.reverse_orientation(), &identity),
            -1
        );
    }

    #[test]
    fn orientation_sign_rejects_folds() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 32, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let folded: Vec<f64> = (0..32)
            .map(|i| {
                let t = TAU * i as f64 / 32.0;
                t + 0.9 * (2.0 * t).sin()
            })
            .collect();
        assert!(matches!(
            orientation_sign_from_params(&sigma, &sigma, &folded),
            Err(GeomError::NotBijective)
        ));
    }

    #[test]
    fn hausdorff_identical_curves_is_zero() {
        let m = AmbientManifold::flat(2);
        let a = generators::circle(&m, 64, 1.0, &[0.0, 0.0], &tol()).unwrap();
        assert_eq!(hausdorff_distance(&a, &a), 0.0);
    }

    #[test]
    fn hausdorff_concentric_circles_matches_radius_gap() {
        let m = AmbientManifold::flat(2);
        let a = generators::circle(&m, 256, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let b = generators::circle(&m, 256, 1.2, &[0.0, 0.0], &tol()).unwrap();
        let d = hausdorff_distance(&a, &b);
        assert!((d - 0.2).abs() < 1e-3, "got {d}");
    }

    #[test]
    fn hausdorff_shifted_resample_is_resolution_small() {
        let m = AmbientManifold::flat(2);
        let a = generators::circle(&m, 256, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let shift = TAU / 512.0;
        let samples: Vec<Point> = (0..256)
            .map(|i| {
                let t = TAU * i as f64 / 256.0 + shift;
                point(&[t.cos(), t.sin()])
            })
            .collect();
        let b = OrientedSubmanifold::build(&m, samples, 1, &tol()).unwrap();
        let d = hausdorff_distance(&a, &b);
        assert!(d < 1e-4, "got {d}");
        // the chord-polyline variant pays the sagitta of the inscribed
        // chords, bounded by h^2 k / 8 with h = 2 pi / 256
        let chord = hausdorff_between_samples(a.samples(), b.samples());
        let sagitta = (TAU / 256.0) * (TAU / 256.0) / 8.0;
        assert!(chord <= sagitta * 1.01, "chord variant {chord} vs bound {sagitta}");
        assert!(chord > 1e-6, "shifted vertices cannot coincide");
    }

    #[test]
    fn frames_are_resolution_stable_at_fourth_order() {
        // wavy radius so the grid derivative carries real truncation error
        let m = AmbientManifold::flat(2);
        let t = tol();
        let star = |samples: usize| -> OrientedSubmanifold {
            let pts: Vec<Point> = (0..samples)
                .map(|i| {
                    let th = TAU * i as f64 / samples as f64;
                    let r = 1.0 + 0.2 * (3.0 * th).cos();
                    point(&[r * th.cos(), r * th.sin()])
                })
                .collect();
            OrientedSubmanifold::build(&m, pts, 1, &t).unwrap()
        };
        let frame_err = |m1: usize, m2: usize| -> f64 {
            let a = star(m1);
            let b = star(m2);
            let stride = m2 / m1;
            (0..m1)
                .map(|i| (&a.tangent_frame(i)[0] - &b.tangent_frame(i * stride)[0]).norm())
                .fold(0.0, f64::max)
        };
        let e1 = frame_err(64, 128);
        let e2 = frame_err(128, 256);
        let order = (e1 / e2).log2();
        assert!(order >= 3.0, "observed order {order} (errors {e1}, {e2})");
    }

    #[test]
    fn csv_roundtrip_preserves_samples_and_orientation() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::ellipse(&m, 32, 1.2, 0.9, &[0.1, -0.2], &tol())
            .unwrap()
            .reverse_orientation();
        let text = sigma.to_csv();
        let back = OrientedSubmanifold::from_csv(&m, &text, &tol()).unwrap();
        assert_eq!(back.orientation(), sigma.orientation());
        assert_eq!(back.sample_count(), sigma.sample_count());
        for (a, b) in sigma.samples().iter().zip(back.samples()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn normal_section_rejects_tangential_vectors() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 32, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let bad: Vec<Vector> = sigma
            .tangent_frames
            .iter()
            .map(|f| f[0].clone())
            .collect();
        assert!(NormalSection::new(&sigma, bad).is_err());
        let good: Vec<Vector> = (0..32).map(|i| sigma.normal_frame(i)[0].clone()).collect();
        assert!(NormalSection::new(&sigma, good).is_ok());
    }
}
