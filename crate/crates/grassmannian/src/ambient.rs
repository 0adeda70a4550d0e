//! Ambient Riemannian spaces: flat space, the round sphere, and implicit
//! level-set surfaces, all embedded in Euclidean coordinates with the induced
//! metric. The geodesic exponential is closed form where possible and a
//! projected Runge-Kutta integration on level sets.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{GeomError, Result};

pub type Point = DVector<f64>;
pub type Vector = DVector<f64>;

/// Convenience constructor for low-dimensional points.
pub fn point(coords: &[f64]) -> Point {
    DVector::from_row_slice(coords)
}

/// Squared distance without allocating an intermediate vector.
#[inline]
pub fn dist2(a: &Point, b: &Point) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc
}

/// Built-in implicit surfaces `{F = 0}` in R^3 with analytic gradient and
/// Hessian (the integrator needs the Hessian for the geodesic acceleration).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "surface", rename_all = "snake_case")]
pub enum LevelSetField {
    Sphere { radius: f64 },
    Torus { major: f64, minor: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
}

impl LevelSetField {
    pub fn value(&self, x: &Point) -> f64 {
        match self {
            LevelSetField::Sphere { radius } => x.norm_squared() - radius * radius,
            LevelSetField::Torus { major, minor } => {
                let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let d = rho - major;
                d * d + x[2] * x[2] - minor * minor
            }
            LevelSetField::Ellipsoid { a, b, c } => {
                (x[0] / a).powi(2) + (x[1] / b).powi(2) + (x[2] / c).powi(2) - 1.0
            }
        }
    }

    pub fn gradient(&self, x: &Point) -> Vector {
        match self {
            LevelSetField::Sphere { .. } => 2.0 * x,
            LevelSetField::Torus { major, .. } => {
                let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let d = rho - major;
                point(&[2.0 * d * x[0] / rho, 2.0 * d * x[1] / rho, 2.0 * x[2]])
            }
            LevelSetField::Ellipsoid { a, b, c } => point(&[
                2.0 * x[0] / (a * a),
                2.0 * x[1] / (b * b),
                2.0 * x[2] / (c * c),
            ]),
        }
    }

    pub fn hessian(&self, x: &Point) -> DMatrix<f64> {
        match self {
            LevelSetField::Sphere { .. } => DMatrix::identity(3, 3) * 2.0,
            LevelSetField::Torus { major, .. } => {
                let rho2 = x[0] * x[0] + x[1] * x[1];
                let rho = rho2.sqrt();
                let rho3 = rho2 * rho;
                let mut h = DMatrix::zeros(3, 3);
                h[(0, 0)] = 2.0 * (1.0 - major * x[1] * x[1] / rho3);
                h[(1, 1)] = 2.0 * (1.0 - major * x[0] * x[0] / rho3);
                h[(0, 1)] = 2.0 * major * x[0] * x[1] / rho3;
                h[(1, 0)] = h[(0, 1)];
                h[(2, 2)] = 2.0;
                h
            }
            LevelSetField::Ellipsoid { a, b, c } => {
                let mut h = DMatrix::zeros(3, 3);
                h[(0, 0)] = 2.0 / (a * a);
                h[(1, 1)] = 2.0 / (b * b);
                h[(2, 2)] = 2.0 / (c * c);
                h
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum AmbientKind {
    /// Euclidean space of the given ambient dimension.
    Flat,
    /// Unit sphere `S^{N-1}` embedded in dimension-N Euclidean space.
    RoundSphere,
    /// Implicit surface `{F = 0}` in R^3.
    LevelSet(LevelSetField),
}

/// The ambient Riemannian space `(M, g)` with the induced metric, optionally
/// scaled by a constant conformal factor (constant scaling leaves geodesics
/// unchanged, only lengths differ).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmbientManifold {
    kind: AmbientKind,
    dim_ambient: usize,
    metric_scale: f64,
}

/// Tangent vector at a base point, components in ambient coordinates.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub base: Point,
    pub components: Vector,
}

const TANGENCY_TOL: f64 = 1e-8;

impl AmbientManifold {
    pub fn flat(dim: usize) -> Self {
        AmbientManifold {
            kind: AmbientKind::Flat,
            dim_ambient: dim,
            metric_scale: 1.0,
        }
    }

    /// Round unit sphere embedded in dimension-`dim_ambient` space.
    pub fn round_sphere(dim_ambient: usize) -> Self {
        assert!(dim_ambient >= 2);
        AmbientManifold {
            kind: AmbientKind::RoundSphere,
            dim_ambient,
            metric_scale: 1.0,
        }
    }

    pub fn level_set(field: LevelSetField) -> Self {
        AmbientManifold {
            kind: AmbientKind::LevelSet(field),
            dim_ambient: 3,
            metric_scale: 1.0,
        }
    }

    pub fn with_metric_scale(mut self, scale: f64) -> Self {
        assert!(scale > 0.0);
        self.metric_scale = scale;
        self
    }

    pub fn kind(&self) -> &AmbientKind {
        &self.kind
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    /// Intrinsic dimension `n` of the manifold.
    pub fn dim_manifold(&self) -> usize {
        match self.kind {
            AmbientKind::Flat => self.dim_ambient,
            AmbientKind::RoundSphere => self.dim_ambient - 1,
            AmbientKind::LevelSet(_) => 2,
        }
    }

    pub fn metric_scale(&self) -> f64 {
        self.metric_scale
    }

    /// Residual of the defining surface equation (zero for flat space).
    pub fn surface_residual(&self, x: &Point) -> f64 {
        match &self.kind {
            AmbientKind::Flat => 0.0,
            AmbientKind::RoundSphere => x.norm() - 1.0,
            AmbientKind::LevelSet(field) => field.value(x),
        }
    }

    pub fn check_on_manifold(&self, x: &Point, tol: &Tolerances) -> Result<()> {
        let r = self.surface_residual(x).abs();
        if r > tol.surface_tol {
            Err(GeomError::OffManifold { residual: r })
        } else {
            Ok(())
        }
    }

    /// Unit normal of the embedded surface (empty for flat space).
    pub fn surface_normal(&self, x: &Point) -> Option<Vector> {
        match &self.kind {
            AmbientKind::Flat => None,
            AmbientKind::RoundSphere => Some(x.normalize()),
            AmbientKind::LevelSet(field) => {
                let g = field.gradient(x);
                Some(g.normalize())
            }
        }
    }

    /// Evaluate the induced metric `g_x(u, v)`.
    pub fn metric_at(&self, x: &Point, u: &Vector, v: &Vector, tol: &Tolerances) -> Result<f64> {
        self.check_on_manifold(x, tol)?;
        Ok(self.metric_scale * u.dot(v))
    }

    /// Metric norm of a vector (constant conformal factor).
    pub fn metric_norm(&self, v: &Vector) -> f64 {
        self.metric_scale.sqrt() * v.norm()
    }

    /// Orthogonal projection of an ambient vector onto `T_x M`.
    pub fn project_tangent(&self, x: &Point, u: &Vector, tol: &Tolerances) -> Result<TangentVector> {
        self.check_on_manifold(x, tol)?;
        let components = match self.surface_normal(x) {
            None => u.clone(),
            Some(n) => u - n.dot(u) * &n,
        };
        Ok(TangentVector {
            base: x.clone(),
            components,
        })
    }

    /// Nearest-point style projection onto the surface (Newton along the
    /// gradient); identity for flat space.
    pub fn project_to_surface(&self, x: &Point, tol: &Tolerances) -> Result<Point> {
        match &self.kind {
            AmbientKind::Flat => Ok(x.clone()),
            AmbientKind::RoundSphere => Ok(x.normalize()),
            AmbientKind::LevelSet(field) => {
                let mut y = x.clone();
                for _ in 0..tol.max_newton_iters {
                    let f = field.value(&y);
                    if f.abs() <= tol.surface_tol {
                        return Ok(y);
                    }
                    let g = field.gradient(&y);
                    let gn = g.norm_squared();
                    if gn < 1e-30 {
                        break;
                    }
                    y -= (f / gn) * g;
                }
                let f = field.value(&y);
                if f.abs() <= tol.surface_tol {
                    Ok(y)
                } else {
                    Err(GeomError::NoConvergence {
                        what: "surface projection",
                        last_change: f.abs(),
                    })
                }
            }
        }
    }

    fn check_tangent(&self, x: &Point, v: &Vector) -> Result<()> {
        if let Some(n) = self.surface_normal(x) {
            let d = n.dot(v).abs();
            if d > TANGENCY_TOL * v.norm().max(1.0) {
                return Err(GeomError::OffManifold { residual: d });
            }
        }
        Ok(())
    }

    /// Geodesic exponential: the geodesic through `x` with initial velocity
    /// `v`, evaluated at time one.
    pub fn exp(&self, v: &TangentVector, tol: &Tolerances) -> Result<Point> {
        let x = &v.base;
        self.check_on_manifold(x, tol)?;
        self.check_tangent(x, &v.components)?;
        match &self.kind {
            AmbientKind::Flat => Ok(x + &v.components),
            AmbientKind::RoundSphere => Ok(sphere_exp(x, &v.components)),
            AmbientKind::LevelSet(field) => self.level_set_exp(field, x, &v.components, tol),
        }
    }

    /// Level-set geodesic with a fixed step count (exposed so convergence
    /// order can be measured); also valid for the other kinds, where it just
    /// returns the closed form.
    pub fn exp_fixed_steps(&self, v: &TangentVector, steps: usize, tol: &Tolerances) -> Result<Point> {
        let x = &v.base;
        self.check_on_manifold(x, tol)?;
        self.check_tangent(x, &v.components)?;
        match &self.kind {
            AmbientKind::Flat => Ok(x + &v.components),
            AmbientKind::RoundSphere => Ok(sphere_exp(x, &v.components)),
            AmbientKind::LevelSet(field) => {
                Ok(integrate_geodesic(field, x, &v.components, steps, tol).0)
            }
        }
    }

    /// Full trajectory of the level-set integrator (positions and velocities
    /// after every step), for conservation checks.
    pub fn geodesic_trace(
        &self,
        v: &TangentVector,
        steps: usize,
        tol: &Tolerances,
    ) -> Result<Vec<(Point, Vector)>> {
        match &self.kind {
            AmbientKind::LevelSet(field) => {
                Ok(integrate_geodesic(field, &v.base, &v.components, steps, tol).1)
            }
            _ => Err(GeomError::config("kind", "geodesic trace is for level-set kinds")),
        }
    }

    fn level_set_exp(
        &self,
        field: &LevelSetField,
        x: &Point,
        v: &Vector,
        tol: &Tolerances,
    ) -> Result<Point> {
        if v.norm() < 1e-15 {
            return Ok(x.clone());
        }
        let mut steps = tol.exp_steps_init;
        let mut prev = integrate_geodesic(field, x, v, steps, tol).0;
        while steps * 2 <= tol.exp_steps_max {
            steps *= 2;
            let next = integrate_geodesic(field, x, v, steps, tol).0;
            let change = (&next - &prev).norm();
            if change < tol.exp_tol {
                return Ok(next);
            }
            prev = next;
        }
        Err(GeomError::NoConvergence {
            what: "geodesic step doubling",
            last_change: f64::INFINITY,
        })
    }

    /// Directional derivative `d/de exp_x(v + e*w)` at `e = 0`, by 4th-order
    /// central differences with Richardson step control.
    pub fn exp_differential(
        &self,
        v: &TangentVector,
        w: &Vector,
        tol: &Tolerances,
    ) -> Result<Vector> {
        let wn = w.norm();
        if wn < 1e-15 {
            return Ok(Vector::zeros(self.dim_ambient));
        }
        let wh = w / wn;
        let stencil = |h: f64| -> Result<Vector> {
            let at = |e: f64| {
                let tv = TangentVector {
                    base: v.base.clone(),
                    components: &v.components + e * &wh,
                };
                self.exp(&tv, tol)
            };
            let f_p2 = at(2.0 * h)?;
            let f_p1 = at(h)?;
            let f_m1 = at(-h)?;
            let f_m2 = at(-2.0 * h)?;
            Ok((-f_p2 + 8.0 * f_p1 - 8.0 * f_m1 + f_m2) / (12.0 * h))
        };
        let mut h = 1e-2;
        let mut coarse = stencil(h)?;
        for _ in 0..8 {
            let fine = stencil(h / 2.0)?;
            let change = (&fine - &coarse).norm();
            if change < tol.fd_tol {
                // one Richardson extrapolation step on the 4th-order stencil
                let extrapolated = (16.0 * &fine - &coarse) / 15.0;
                return Ok(wn * extrapolated);
            }
            coarse = fine;
            h /= 2.0;
            if h < 1e-5 {
                break;
            }
        }
        Err(GeomError::NoConvergence {
            what: "exp differential Richardson",
            last_change: f64::INFINITY,
        })
    }
}

/// Great-circle exponential on the unit sphere.
fn sphere_exp(x: &Point, v: &Vector) -> Point {
    let r = v.norm();
    if r < 1e-15 {
        return x.clone();
    }
    let vhat = v / r;
    r.cos() * x + r.sin() * vhat
}

/// RK4 on the geodesic system with one Newton projection back to the surface
/// after each step, followed by tangential projection of the velocity.
fn integrate_geodesic(
    field: &LevelSetField,
    x0: &Point,
    v0: &Vector,
    steps: usize,
    _tol: &Tolerances,
) -> (Point, Vec<(Point, Vector)>) {
    let accel = |x: &Point, u: &Vector| -> Vector {
        let g = field.gradient(x);
        let h = field.hessian(x);
        let quad = (u.transpose() * &h * u)[(0, 0)];
        -(quad / g.norm_squared()) * g
    };
    let h = 1.0 / steps as f64;
    let mut x = x0.clone();
    let mut u = v0.clone();
    let mut trace = Vec::with_capacity(steps + 1);
    trace.push((x.clone(), u.clone()));
    for _ in 0..steps {
        let k1x = u.clone();
        let k1u = accel(&x, &u);
        let x2 = &x + 0.5 * h * &k1x;
        let u2 = &u + 0.5 * h * &k1u;
        let k2x = u2.clone();
        let k2u = accel(&x2, &u2);
        let x3 = &x + 0.5 * h * &k2x;
        let u3 = &u + 0.5 * h * &k2u;
        let k3x = u3.clone();
        let k3u = accel(&x3, &u3);
        let x4 = &x + h * &k3x;
        let u4 = &u + h * &k3u;
        let k4x = u4.clone();
        let k4u = accel(&x4, &u4);
        x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        u += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        // one Newton step back onto {F = 0}
        let f = field.value(&x);
        let g = field.gradient(&x);
        x -= (f / g.norm_squared()) * &g;
        // keep the velocity tangent
        let g = field.gradient(&x);
        let n = g.normalize();
        u -= n.dot(&u) * &n;
        trace.push((x.clone(), u.clone()));
    }
    (x, trace)
}
