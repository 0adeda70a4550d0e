//! Tubular neighborhoods of a discrete curve: the admissible radius, the
//! normal exponential over the tube, its inverse (nearest-point retraction
//! in normal coordinates), and the base projection.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::ambient::{AmbientKind, AmbientManifold, LevelSetField, Point, TangentVector, Vector};
use crate::config::Tolerances;
use crate::error::{GeomError, Result};
use crate::submanifold::{NormalSection, OrientedSubmanifold};

/// Result of the certified injectivity sweep run at chart construction.
#[derive(Debug, Clone, Serialize)]
pub struct InjectivityCertificate {
    pub max_roundtrip_error: f64,
    pub min_image_separation: f64,
    pub grid_points: usize,
}

/// Tube coordinates of a point: base parameter (index plus offset on the
/// grid), the base point, and the normal vector reaching the point.
#[derive(Debug, Clone)]
pub struct TubeCoordinates {
    pub theta: f64,
    pub base_index: usize,
    pub offset: f64,
    pub base_point: Point,
    pub normal: Vector,
}

/// A uniform-radius ball bundle over the curve on which the normal
/// exponential is certified injective.
#[derive(Debug, Clone)]
pub struct TubularChart {
    sigma: OrientedSubmanifold,
    radius: f64,
    certificate: Option<InjectivityCertificate>,
}

/// Reach-style admissible radius: `safety_factor * min(point-to-tangent
/// estimate, ambient injectivity bound)`, in metric length.
///
/// The point-to-tangent criterion projects each chord into the ambient
/// tangent space first, so curves that only bend with the ambient surface
/// (e.g. great circles) do not shrink their own tube; the ambient bound
/// covers that bending instead.
pub fn tubular_radius(sigma: &OrientedSubmanifold, tol: &Tolerances) -> Result<f64> {
    let m = sigma.sample_count();
    let dim = sigma.manifold().dim_ambient();
    let samples = sigma.samples();
    let manifold = sigma.manifold();
    let scale = manifold.metric_scale().sqrt();
    let mut lfs = f64::INFINITY;
    let mut wt = vec![0.0_f64; dim];
    for i in 0..m {
        let t = &sigma.tangent_frame(i)[0];
        let surface_n = manifold.surface_normal(&samples[i]);
        for j in 0..m {
            let gap = (j + m - i) % m;
            if gap <= 1 || gap == m - 1 {
                continue;
            }
            for c in 0..dim {
                wt[c] = samples[j][c] - samples[i][c];
            }
            if let Some(n) = &surface_n {
                let dn: f64 = (0..dim).map(|c| n[c] * wt[c]).sum();
                for c in 0..dim {
                    wt[c] -= dn * n[c];
                }
            }
            let tangential: f64 = (0..dim).map(|c| t[c] * wt[c]).sum();
            let wt2: f64 = wt.iter().map(|x| x * x).sum();
            let normal2 = (wt2 - tangential * tangential).max(0.0);
            let normal_part = normal2.sqrt();
            if normal_part < 1e-12 {
                continue; // chord runs along the tangent space of the curve
            }
            let estimate = scale * wt2 / (2.0 * normal_part);
            if estimate < lfs {
                lfs = estimate;
            }
        }
    }
    let ambient_bound = match manifold.kind() {
        AmbientKind::Flat => f64::INFINITY,
        AmbientKind::RoundSphere => scale * std::f64::consts::FRAC_PI_2,
        AmbientKind::LevelSet(LevelSetField::Sphere { radius }) => {
            scale * radius * std::f64::consts::FRAC_PI_2
        }
        // quarter of the smallest surface circumference, mirroring the
        // sphere's quarter-circle bound
        AmbientKind::LevelSet(LevelSetField::Torus { minor, .. }) => {
            scale * minor * std::f64::consts::FRAC_PI_2
        }
        AmbientKind::LevelSet(LevelSetField::Ellipsoid { a, b, c }) => {
            scale * a.min(*b).min(*c) * std::f64::consts::FRAC_PI_2
        }
    };
    let reach = lfs.min(ambient_bound);
    if !reach.is_finite() {
        return Err(GeomError::DegenerateReach { estimate: reach });
    }
    if reach < 1e-8 {
        return Err(GeomError::DegenerateReach { estimate: reach });
    }
    Ok(tol.safety_factor * reach)
}

impl TubularChart {
    /// Build the chart with the certified radius.
    pub fn new(sigma: OrientedSubmanifold, tol: &Tolerances) -> Result<Self> {
        let radius = tubular_radius(&sigma, tol)?;
        let mut chart = TubularChart {
            sigma,
            radius,
            certificate: None,
        };
        chart.certificate = Some(chart.run_certificate(tol)?);
        Ok(chart)
    }

    /// Build without the injectivity sweep (used for flow carriers, where
    /// charts are rebuilt at every time stamp).
    pub fn without_certificate(sigma: OrientedSubmanifold, tol: &Tolerances) -> Result<Self> {
        let radius = tubular_radius(&sigma, tol)?;
        Ok(TubularChart {
            sigma,
            radius,
            certificate: None,
        })
    }

    /// Same chart with a smaller radius, re-certified.
    pub fn with_radius(&self, radius: f64, tol: &Tolerances) -> Result<Self> {
        if radius <= 0.0 || radius > self.radius {
            return Err(GeomError::config("radius", "must be in (0, current radius]"));
        }
        let mut chart = TubularChart {
            sigma: self.sigma.clone(),
            radius,
            certificate: None,
        };
        chart.certificate = Some(chart.run_certificate(tol)?);
        Ok(chart)
    }

    pub fn sigma(&self) -> &OrientedSubmanifold {
        &self.sigma
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn certificate(&self) -> Option<&InjectivityCertificate> {
        self.certificate.as_ref()
    }

    pub fn manifold(&self) -> &AmbientManifold {
        self.sigma.manifold()
    }

    /// Normal exponential at an interpolated base parameter with normal
    /// coordinates `c` in the frame at that parameter.
    pub fn exp_at(&self, theta: f64, c: &[f64], tol: &Tolerances) -> Result<Point> {
        let base = self.sigma.point_at(theta);
        let frame = self.sigma.normal_frame_at(theta);
        let mut v = Vector::zeros(self.manifold().dim_ambient());
        for (ca, nu) in c.iter().zip(&frame) {
            v += *ca * nu;
        }
        // interpolated bases sit on the curve model, not exactly on the
        // surface; project both before calling the ambient exponential
        let base = self.manifold().project_to_surface(&base, tol)?;
        let v = match self.manifold().surface_normal(&base) {
            None => v,
            Some(n) => &v - n.dot(&v) * &n,
        };
        self.manifold().exp(
            &TangentVector {
                base,
                components: v,
            },
            tol,
        )
    }

    /// Per-sample normal exponential of a section inside the tube.
    pub fn tau(&self, section: &NormalSection, tol: &Tolerances) -> Result<Vec<Point>> {
        let manifold = self.manifold();
        let mut out = Vec::with_capacity(section.len());
        for (i, v) in section.vectors().iter().enumerate() {
            let norm = manifold.metric_norm(v);
            if norm >= self.radius {
                return Err(GeomError::OutsideTube {
                    norm,
                    radius: self.radius,
                });
            }
            out.push(manifold.exp(
                &TangentVector {
                    base: self.sigma.samples()[i].clone(),
                    components: v.clone(),
                },
                tol,
            )?);
        }
        Ok(out)
    }

    /// Invert the normal exponential: the unique `(theta, v)` with
    /// `exp_{x(theta)}(v) = p` inside the tube.
    pub fn tau_inverse(&self, p: &Point, tol: &Tolerances) -> Result<TubeCoordinates> {
        self.invert(p, None, 0.95, true, tol)
    }

    /// Base point of the nearest-point retraction.
    pub fn base_projection(&self, p: &Point, tol: &Tolerances) -> Result<Point> {
        Ok(self.tau_inverse(p, tol)?.base_point)
    }

    /// Shared inversion routine.
    ///
    /// `hint` skips the global scan (warm starts along a flow);
    /// `max_fraction` bounds the accepted normal norm as a fraction of the
    /// radius; `check_ambiguity` refines all candidate minima and reports
    /// near-ties (cut locus).
    pub(crate) fn invert(
        &self,
        p: &Point,
        hint: Option<f64>,
        max_fraction: f64,
        check_ambiguity: bool,
        tol: &Tolerances,
    ) -> Result<TubeCoordinates> {
        let scale = self.manifold().metric_scale().sqrt();
        let max_norm = max_fraction * self.radius;
        if let Some(theta0) = hint {
            if let Ok(coords) = self.refine_from(p, theta0, tol) {
                let norm = scale * coords.normal.norm();
                if norm <= max_norm {
                    return Ok(coords);
                }
                return Err(GeomError::OutsideTube {
                    norm,
                    radius: self.radius,
                });
            }
            // fall through to the global scan
        }
        let m = self.sigma.sample_count();
        let samples = self.sigma.samples();
        let d2: Vec<f64> = samples
            .iter()
            .map(|x| crate::ambient::dist2(p, x))
            .collect();
        // early out: even the chord distance exceeds the tube
        let best = d2.iter().cloned().fold(f64::INFINITY, f64::min).sqrt();
        if scale * best > max_norm + 2.0 * self.sigma.min_adjacent_spacing() {
            return Err(GeomError::OutsideTube {
                norm: scale * best,
                radius: self.radius,
            });
        }
        // circular local minima of the vertex distances
        let mut candidates: Vec<usize> = (0..m)
            .filter(|&i| d2[i] <= d2[(i + 1) % m] && d2[i] <= d2[(i + m - 1) % m])
            .collect();
        candidates.sort_by(|&a, &b| d2[a].total_cmp(&d2[b]));
        candidates.truncate(8);
        let mut solutions: Vec<TubeCoordinates> = Vec::new();
        for &i in &candidates {
            // quadratic fit of the squared distance through the neighbors
            let dm = d2[(i + m - 1) % m];
            let dp = d2[(i + 1) % m];
            let denom = dm - 2.0 * d2[i] + dp;
            let offset = if denom.abs() > 1e-30 {
                (0.5 * (dm - dp) / denom).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            let theta0 = TAU * (i as f64 + offset) / m as f64;
            if let Ok(coords) = self.refine_from(p, theta0, tol) {
                let distinct = solutions.iter().all(|s| {
                    let mut d = (s.theta - coords.theta).rem_euclid(TAU);
                    if d > std::f64::consts::PI {
                        d = TAU - d;
                    }
                    d > 0.5 * TAU / m as f64
                });
                if distinct {
                    solutions.push(coords);
                }
            }
            if !check_ambiguity && !solutions.is_empty() {
                break;
            }
        }
        if solutions.is_empty() {
            return Err(GeomError::NoConvergence {
                what: "tube inversion",
                last_change: best,
            });
        }
        solutions.sort_by(|a, b| a.normal.norm().total_cmp(&b.normal.norm()));
        if check_ambiguity && solutions.len() >= 2 {
            let d1 = scale * solutions[0].normal.norm();
            let d2t = scale * solutions[1].normal.norm();
            if d2t <= max_norm && (d2t - d1).abs() < tol.ambiguous_tol {
                return Err(GeomError::AmbiguousProjection { d1, d2: d2t });
            }
        }
        let sol = solutions.into_iter().next().unwrap();
        let norm = scale * sol.normal.norm();
        if norm > max_norm {
            return Err(GeomError::OutsideTube {
                norm,
                radius: self.radius,
            });
        }
        Ok(sol)
    }

    /// Newton (flat) or Gauss-Newton (curved) refinement from a parameter.
    fn refine_from(&self, p: &Point, theta0: f64, tol: &Tolerances) -> Result<TubeCoordinates> {
        match self.manifold().kind() {
            AmbientKind::Flat => self.refine_flat(p, theta0, tol),
            _ => self.refine_curved(p, theta0, tol),
        }
    }

    /// Flat kind: 1-D Newton on the frame-tangency condition
    /// `(p - x(theta)) . t(theta) = 0` with the analytic derivative.
    ///
    /// The frames span the orthogonal complement of the tangent, so once
    /// tangency holds the residual vector `p - x` is the normal coordinate.
    fn refine_flat(&self, p: &Point, theta0: f64, tol: &Tolerances) -> Result<TubeCoordinates> {
        let dim = p.len();
        let pos = self.sigma.pos_interp();
        let tan = self.sigma.tangent_interp_raw();
        let mut x = vec![0.0; dim];
        let mut dx = vec![0.0; dim];
        let mut tr = vec![0.0; dim];
        let mut dtr = vec![0.0; dim];
        let mut theta = theta0;
        let mut g_val = f64::INFINITY;
        for _ in 0..tol.max_newton_iters {
            pos.eval_deriv_into(theta, &mut x, &mut dx);
            tan.eval_deriv_into(theta, &mut tr, &mut dtr);
            let tnorm2: f64 = tr.iter().map(|v| v * v).sum();
            let tnorm = tnorm2.sqrt();
            let tdot: f64 = tr.iter().zip(&dtr).map(|(a, b)| a * b).sum();
            // that = tr/|tr|, that' = dtr/|tr| - tr (tr.dtr)/|tr|^3
            let mut g = 0.0;
            let mut dg = 0.0;
            for c in 0..dim {
                let diff = p[c] - x[c];
                let that = tr[c] / tnorm;
                let dthat = dtr[c] / tnorm - tr[c] * tdot / (tnorm2 * tnorm);
                g += diff * that;
                dg += -dx[c] * that + diff * dthat;
            }
            g_val = g;
            if g.abs() < tol.inv_tol {
                break;
            }
            if dg.abs() < 1e-14 {
                break;
            }
            theta -= (g / dg).clamp(-0.5, 0.5);
        }
        if g_val.abs() >= tol.inv_tol {
            // final re-evaluation after the last step
            pos.eval_deriv_into(theta, &mut x, &mut dx);
            tan.eval_deriv_into(theta, &mut tr, &mut dtr);
            let tnorm: f64 = tr.iter().map(|v| v * v).sum::<f64>().sqrt();
            g_val = (0..dim).map(|c| (p[c] - x[c]) * tr[c] / tnorm).sum();
            if g_val.abs() >= tol.inv_tol {
                return Err(GeomError::NoConvergence {
                    what: "flat tube inversion",
                    last_change: g_val.abs(),
                });
            }
        } else {
            pos.eval_deriv_into(theta, &mut x, &mut dx);
            tan.eval_deriv_into(theta, &mut tr, &mut dtr);
        }
        let tnorm: f64 = tr.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut base_point = Vector::zeros(dim);
        let mut normal = Vector::zeros(dim);
        for c in 0..dim {
            base_point[c] = x[c];
        }
        // normal coordinate: remove the residual tangency component
        for c in 0..dim {
            normal[c] = p[c] - x[c] - g_val * tr[c] / tnorm;
        }
        let (base_index, offset) = self.sigma.index_offset(theta);
        Ok(TubeCoordinates {
            theta: theta.rem_euclid(TAU),
            base_index,
            offset,
            base_point,
            normal,
        })
    }

    /// Curved kinds: Gauss-Newton on `(theta, c)` minimizing
    /// `|exp_{x(theta)}(sum c_a nu_a(theta)) - p|^2`.
    fn refine_curved(&self, p: &Point, theta0: f64, tol: &Tolerances) -> Result<TubeCoordinates> {
        let codim = self.sigma.codimension();
        let dim = self.manifold().dim_ambient();
        let mut theta = theta0;
        let x0 = self.sigma.point_at(theta);
        let frame0 = self.sigma.normal_frame_at(theta);
        let mut c: Vec<f64> = frame0.iter().map(|nu| nu.dot(&(p - &x0))).collect();
        let residual_at = |theta: f64, c: &[f64]| -> Result<Vector> {
            Ok(self.exp_at(theta, c, tol)? - p)
        };
        let mut r = residual_at(theta, &c)?;
        for _ in 0..tol.max_newton_iters {
            if r.norm() < tol.inv_tol {
                break;
            }
            // finite-difference Jacobian, one column per unknown
            let n_unknowns = 1 + codim;
            let mut jac = DMatrix::zeros(dim, n_unknowns);
            let dtheta = 1e-6;
            let r_t = residual_at(theta + dtheta, &c)?;
            let col = (&r_t - &r) / dtheta;
            jac.set_column(0, &col);
            for a in 0..codim {
                let dc = 1e-6;
                let mut c2 = c.to_vec();
                c2[a] += dc;
                let r_c = residual_at(theta, &c2)?;
                let col = (&r_c - &r) / dc;
                jac.set_column(1 + a, &col);
            }
            let jtj = jac.transpose() * &jac;
            let jtr = jac.transpose() * &r;
            let delta = jtj
                .lu()
                .solve(&(-jtr))
                .ok_or(GeomError::NoConvergence {
                    what: "tube inversion normal equations",
                    last_change: r.norm(),
                })?;
            theta += delta[0].clamp(-0.5, 0.5);
            for a in 0..codim {
                c[a] += delta[1 + a];
            }
            r = residual_at(theta, &c)?;
        }
        if r.norm() >= tol.inv_tol.max(1e-12) * 10.0 {
            return Err(GeomError::NoConvergence {
                what: "tube inversion",
                last_change: r.norm(),
            });
        }
        let x = self.sigma.point_at(theta);
        let frame = self.sigma.normal_frame_at(theta);
        let mut normal = Vector::zeros(dim);
        for (ca, nu) in c.iter().zip(&frame) {
            normal += *ca * nu;
        }
        let (base_index, offset) = self.sigma.index_offset(theta);
        Ok(TubeCoordinates {
            theta: theta.rem_euclid(TAU),
            base_index,
            offset,
            base_point: x,
            normal,
        })
    }

    /// Injectivity sweep over a grid of normal vectors with norms up to
    /// `0.9 * radius`: roundtrips must reproduce `(x, v)` and no two grid
    /// atoms may collide in the image.
    fn run_certificate(&self, tol: &Tolerances) -> Result<InjectivityCertificate> {
        let m = self.sigma.sample_count();
        let codim = self.sigma.codimension();
        let scale = self.manifold().metric_scale().sqrt();
        let stride = (m / 16).max(1);
        let fractions = [-0.9, -0.45, 0.45, 0.9];
        let mut images: Vec<Point> = Vec::new();
        let mut max_roundtrip: f64 = 0.0;
        for i in (0..m).step_by(stride) {
            for a in 0..codim {
                for &f in &fractions {
                    let coeff = f * self.radius / scale;
                    let v = coeff * &self.sigma.normal_frame(i)[a];
                    let p = self.manifold().exp(
                        &TangentVector {
                            base: self.sigma.samples()[i].clone(),
                            components: v.clone(),
                        },
                        tol,
                    )?;
                    let coords = self.invert(&p, None, 0.95, false, tol).map_err(|e| {
                        GeomError::NotDiffeomorphism {
                            reason: format!("injectivity sweep failed to invert: {e}"),
                        }
                    })?;
                    let base_err = (&coords.base_point - &self.sigma.samples()[i]).norm();
                    let v_err = (&coords.normal - &v).norm();
                    max_roundtrip = max_roundtrip.max(base_err.max(v_err));
                    images.push(p);
                }
            }
        }
        let mut min_sep = f64::INFINITY;
        for i in 0..images.len() {
            for j in (i + 1)..images.len() {
                let d = (&images[i] - &images[j]).norm();
                if d < min_sep {
                    min_sep = d;
                }
            }
        }
        if max_roundtrip > tol.roundtrip_tol {
            return Err(GeomError::NotDiffeomorphism {
                reason: format!(
                    "tube roundtrip error {max_roundtrip:.3e} exceeds {:.3e}",
                    tol.roundtrip_tol
                ),
            });
        }
        if min_sep < tol.collision_tol {
            return Err(GeomError::NotDiffeomorphism {
                reason: format!(
                    "tube grid images collide: separation {min_sep:.3e}"
                ),
            });
        }
        Ok(InjectivityCertificate {
            max_roundtrip_error: max_roundtrip,
            min_image_separation: min_sep,
            grid_points: images.len(),
        })
    }
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
    fn unit_circle_radius_matches_reach_oracle() {
        // reach of a circle of radius r is r
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 128, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let rho = tubular_radius(&sigma, &tol()).unwrap();
        assert!((rho - 0.5).abs() / 0.5 < 0.02, "rho = {rho}");
    }

    #[test]
    fn ellipse_radius_matches_curvature_oracle() {
        // reach of an ellipse is the minimal curvature radius b^2/a
        let m = AmbientManifold::flat(2);
        let sigma = generators::ellipse(&m, 256, 2.0, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let rho = tubular_radius(&sigma, &tol()).unwrap();
        assert!((rho - 0.25).abs() / 0.25 < 0.05, "rho = {rho}");
    }

    #[test]
    fn equator_radius_is_bounded_by_ambient_injectivity() {
        // normal exponential along meridians is injective up to the poles
        let m = AmbientManifold::round_sphere(3);
        let sigma = generators::equator(&m, 128, &tol()).unwrap();
        let rho = tubular_radius(&sigma, &tol()).unwrap();
        let expected = 0.5 * std::f64::consts::FRAC_PI_2;
        assert!((rho - expected).abs() / expected < 0.02, "rho = {rho}");
    }

    #[test]
    fn tau_zero_section_returns_samples() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 64, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let chart = TubularChart::new(sigma, &tol()).unwrap();
        let zero = NormalSection::zero(chart.sigma());
        let image = chart.tau(&zero, &tol()).unwrap();
        for (a, b) in image.iter().zip(chart.sigma().samples()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn tau_outward_offset_is_a_larger_circle() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 64, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let chart = TubularChart::new(sigma, &tol()).unwrap();
        let s = generators::constant_normal_section(chart.sigma(), 0.3).unwrap();
        let image = chart.tau(&s, &tol()).unwrap();
        for p in image {
            assert!((p.norm() - 1.3).abs() < 1e-12);
        }
    }

    #[test]
    fn tau_rejects_sections_reaching_the_radius() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 64, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let chart = TubularChart::new(sigma, &tol()).unwrap();
        let s = generators::constant_normal_section(chart.sigma(), chart.radius()).unwrap();
        assert!(matches!(
            chart.tau(&s, &tol()),
            Err(GeomError::OutsideTube { .. })
        ));
    }

    #[test]
    fn equator_offset_reaches_latitude_circle() {
        let m = AmbientManifold::round_sphere(3);
        let sigma = generators::equator(&m, 64, &tol()).unwrap();
        let chart = TubularChart::new(sigma, &tol()).unwrap();
        let s = generators::constant_normal_section(chart.sigma(), 0.2).unwrap();
        let image = chart.tau(&s, &tol()).unwrap();
        for p in image {
            assert!((p[2].abs() - 0.2_f64.sin().abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn tau_inverse_radial_point_on_unit_circle() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 64, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let chart = TubularChart::new(sigma, &tol()).unwrap();
        let coords = chart.tau_inverse(&point(&[1.4, 0.0]), &tol()).unwrap();
        assert!((coords.base_point.clone() - point(&[1.0, 0.0])).norm() < 1e-10);
        assert!((coords.normal.clone() - point(&[0.4, 0.0])).norm() < 1e-10);
        assert_eq!(coords.base_index, 0);
    }

    #[test]
    fn circle_center_is_ambiguous() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 64, 0.4, &[0.0, 0.0], &tol()).unwrap();
        let chart = TubularChart::new(sigma, &tol()).unwrap();
        // radius 0.4 circle has tube radius ~0.2, center distance 0.4; widen
        // the fraction so the ambiguity check is what fires
        let r = chart.invert(&point(&[0.0, 0.0]), None, 2.5, true, &tol());
        assert!(
            matches!(r, Err(GeomError::AmbiguousProjection { .. })),
            "got {r:?}"
        );
    }

    #[test]
    fn far_points_are_outside_the_tube() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 64, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let chart = TubularChart::new(sigma, &tol()).unwrap();
        assert!(matches!(
            chart.tau_inverse(&point(&[3.0, 0.0]), &tol()),
            Err(GeomError::OutsideTube { .. })
        ));
    }

    #[test]
    fn roundtrip_on_level_set_torus() {
        let m = AmbientManifold::level_set(LevelSetField::Torus {
            major: 2.0,
            minor: 0.5,
        });
        let t = tol();
        let sigma = generators::torus_knot(&m, 32, 1, 0, &t).unwrap();
        let chart = TubularChart::without_certificate(sigma, &t).unwrap();
        // synthesize a point by tau, then invert
        let i = 5;
        let coeff = 0.4 * chart.radius();
        let v = coeff * &chart.sigma().normal_frame(i)[0];
        let p = m
            .exp(
                &TangentVector {
                    base: chart.sigma().samples()[i].clone(),
                    components: v.clone(),
                },
                &t,
            )
            .unwrap();
        let coords = chart.tau_inverse(&p, &t).unwrap();
        assert!(
            (&coords.base_point - &chart.sigma().samples()[i]).norm() < 1e-8,
            "base error"
        );
        assert!((&coords.normal - &v).norm() < 1e-8, "normal error");
    }

    #[test]
    fn base_projection_is_idempotent_and_radial() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 64, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let chart = TubularChart::new(sigma, &tol()).unwrap();
        let b = chart.base_projection(&point(&[0.7, 0.0]), &tol()).unwrap();
        assert!((b.clone() - point(&[1.0, 0.0])).norm() < 1e-10);
        let b2 = chart.base_projection(&b, &tol()).unwrap();
        assert!((b2 - point(&[1.0, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn equator_base_projection_follows_meridians() {
        let m = AmbientManifold::round_sphere(3);
        let sigma = generators::equator(&m, 64, &tol()).unwrap();
        let chart = TubularChart::new(sigma, &tol()).unwrap();
        let theta0 = 0.7_f64;
        let (c, s) = (0.2_f64.cos(), 0.2_f64.sin());
        let p = point(&[c * theta0.cos(), c * theta0.sin(), s]);
        let b = chart.base_projection(&p, &tol()).unwrap();
        assert!((b - point(&[theta0.cos(), theta0.sin(), 0.0])).norm() < 1e-8);
    }

    #[test]
    fn shrinking_the_radius_does_not_move_inversions() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 64, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let chart = TubularChart::new(sigma, &tol()).unwrap();
        let small = chart.with_radius(chart.radius() * 0.5, &tol()).unwrap();
        let p = point(&[1.1, 0.05]);
        let a = chart.tau_inverse(&p, &tol()).unwrap();
        let b = small.tau_inverse(&p, &tol()).unwrap();
        assert!((a.base_point - b.base_point).norm() < 1e-12);
        assert!((a.normal - b.normal).norm() < 1e-12);
    }

    #[test]
    fn certificate_reports_injective_grid() {
        let m = AmbientManifold::flat(2);
        let sigma = generators::circle(&m, 128, 1.0, &[0.0, 0.0], &tol()).unwrap();
        let chart = TubularChart::new(sigma, &tol()).unwrap();
        let cert = chart.certificate().unwrap();
        assert!(cert.max_roundtrip_error < 1e-8);
        assert!(cert.min_image_separation > 1e-6);
    }
}
