//! Charts of the space of oriented curves: a chart is a tubular neighborhood
//! of a center curve, chart points are normal sections inside the tube, and
//! this module applies charts, decides oriented membership, certifies the
//! correspondence diffeomorphism between overlapping charts, and computes
//! the transition map between their section coordinates.

use nalgebra::DMatrix;

use crate::ambient::{AmbientKind, Point, TangentVector, Vector};
use crate::circle_map::CircleMap;
use crate::config::Tolerances;
use crate::error::{GeomError, Result};
use crate::submanifold::{NormalSection, OrientedSubmanifold};
use crate::tubular::TubularChart;

/// A point of the curve space in chart coordinates: a section strictly
/// inside the tube of its chart.
#[derive(Debug, Clone)]
pub struct ChartPoint {
    pub chart: TubularChart,
    pub section: NormalSection,
}

impl ChartPoint {
    pub fn new(chart: TubularChart, section: NormalSection) -> Result<Self> {
        let sup = section.sup_norm(chart.manifold());
        if sup >= chart.radius() {
            return Err(GeomError::OutsideTube {
                norm: sup,
                radius: chart.radius(),
            });
        }
        Ok(ChartPoint { chart, section })
    }

    pub fn apply(&self, tol: &Tolerances) -> Result<OrientedSubmanifold> {
        chart_apply(&self.chart, &self.section, tol)
    }
}

/// Apply the chart: exponentiate the section and rebuild the curve, with the
/// orientation induced by the per-sample map from the center.
pub fn chart_apply(
    chart: &TubularChart,
    section: &NormalSection,
    tol: &Tolerances,
) -> Result<OrientedSubmanifold> {
    let points = chart.tau(section, tol)?;
    let built = OrientedSubmanifold::build(chart.manifold(), points, chart.sigma().dim_k(), tol)?;
    // the sample-wise correspondence is the identity reindexing, so the
    // induced orientation is the center's sign
    Ok(built.with_orientation(chart.sigma().orientation()))
}

/// Per-node membership solve: find `(u, c)` with
/// `exp_{x_i}(sum_a c_a nu_{a,i}) = W(u)` for the chart node `i` against the
/// interpolated target curve `W`.
fn solve_node(
    chart: &TubularChart,
    node: usize,
    target: &OrientedSubmanifold,
    u_init: f64,
    tol: &Tolerances,
) -> Result<(f64, Vec<f64>, f64)> {
    let manifold = chart.manifold();
    let dim = manifold.dim_ambient();
    let codim = chart.sigma().codimension();
    let x = &chart.sigma().samples()[node];
    let frame = chart.sigma().normal_frame(node);
    let flat = matches!(manifold.kind(), AmbientKind::Flat);
    let exp_here = |c: &[f64]| -> Result<Point> {
        let mut v = Vector::zeros(dim);
        for (ca, nu) in c.iter().zip(frame) {
            v += *ca * nu;
        }
        if flat {
            Ok(x + v)
        } else {
            manifold.exp(
                &TangentVector {
                    base: x.clone(),
                    components: v,
                },
                tol,
            )
        }
    };
    let mut u = u_init;
    let w0 = target.point_at(u);
    let mut c: Vec<f64> = frame.iter().map(|nu| nu.dot(&(&w0 - x))).collect();
    let mut r = exp_here(&c)? - target.point_at(u);
    for _ in 0..tol.max_newton_iters {
        if r.norm() < tol.inv_tol {
            break;
        }
        let (_, dw, _) = target.point_derivs_at(u);
        let mut jac = DMatrix::zeros(dim, 1 + codim);
        jac.set_column(0, &(-&dw));
        if flat {
            for (a, nu) in frame.iter().enumerate() {
                jac.set_column(1 + a, nu);
            }
        } else {
            let dc = 1e-6;
            for a in 0..codim {
                let mut c2 = c.clone();
                c2[a] += dc;
                let col = (exp_here(&c2)? - exp_here(&c)?) / dc;
                jac.set_column(1 + a, &col);
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let delta = jtj.lu().solve(&(-jtr)).ok_or(GeomError::NoConvergence {
            what: "membership normal equations",
            last_change: r.norm(),
        })?;
        u += delta[0].clamp(-0.5, 0.5);
        for a in 0..codim {
            c[a] += delta[1 + a];
        }
        r = exp_here(&c)? - target.point_at(u);
    }
    let res = r.norm();
    if res >= tol.inv_tol.max(1e-12) * 10.0 {
        return Err(GeomError::NoConvergence {
            what: "membership solve",
            last_change: res,
        });
    }
    Ok((u, c, res))
}

/// Strict oriented chart membership: the section representing `target` in
/// the chart, or the specific reason there is none.
pub fn membership(
    chart: &TubularChart,
    target: &OrientedSubmanifold,
    tol: &Tolerances,
) -> Result<NormalSection> {
    let manifold = chart.manifold();
    let scale = manifold.metric_scale().sqrt();
    // (a) every sample of the target lies inside the tube
    for p in target.samples() {
        let coords = chart.invert(p, None, 1.0, false, tol)?;
        let norm = scale * coords.normal.norm();
        if norm >= chart.radius() {
            return Err(GeomError::OutsideTube {
                norm,
                radius: chart.radius(),
            });
        }
    }
    // (b) per-node sections over the chart grid, against the target curve
    let m = chart.sigma().sample_count();
    let mut params = Vec::with_capacity(m);
    let mut vectors = Vec::with_capacity(m);
    let mut max_res = 0.0_f64;
    for i in 0..m {
        let x = &chart.sigma().samples()[i];
        let nearest = target
            .samples()
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - x).norm_squared().total_cmp(&(*b - x).norm_squared())
            })
            .map(|(j, _)| target.params()[j])
            .unwrap();
        let (u, c, res) = solve_node(chart, i, target, nearest, tol)?;
        max_res = max_res.max(res);
        let coeff_norm = scale * c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if coeff_norm >= chart.radius() {
            return Err(GeomError::OutsideTube {
                norm: coeff_norm,
                radius: chart.radius(),
            });
        }
        let frame = chart.sigma().normal_frame(i);
        let mut v = Vector::zeros(manifold.dim_ambient());
        for (ca, nu) in c.iter().zip(frame) {
            v += *ca * nu;
        }
        params.push(u);
        vectors.push(v);
    }
    if max_res > tol.contain_tol {
        return Err(GeomError::NoConvergence {
            what: "membership residual",
            last_change: max_res,
        });
    }
    // (b') the base correspondence is a sampled bijection
    let map = CircleMap::new(&params)?;
    // (c) induced orientation must match the target's stored orientation
    let sign = crate::submanifold::orientation_sign(chart.sigma(), target, &map);
    if sign != 1 {
        return Err(GeomError::OrientationMismatch);
    }
    NormalSection::new(chart.sigma(), vectors)
}

/// Oriented chart membership; absence is a value, not an error.
pub fn chart_contains(
    chart: &TubularChart,
    target: &OrientedSubmanifold,
    tol: &Tolerances,
) -> Option<NormalSection> {
    membership(chart, target, tol).ok()
}

/// Certified correspondence between a chart point over one center and the
/// base of another chart: the per-sample map, its derivative along the grid,
/// and the 1-D Jacobian floor realizing the invertibility criterion.
#[derive(Debug, Clone)]
pub struct Correspondence {
    pub map: CircleMap,
    pub derivative: Vec<f64>,
    pub min_abs_derivative: f64,
}

pub fn correspondence(
    chart1: &TubularChart,
    section: &NormalSection,
    chart2: &TubularChart,
    tol: &Tolerances,
) -> Result<Correspondence> {
    let images = chart1.tau(section, tol)?;
    let mut raw = Vec::with_capacity(images.len());
    for p in &images {
        let coords = chart2.invert(p, None, 0.95, false, tol)?;
        let norm = chart2.manifold().metric_scale().sqrt() * coords.normal.norm();
        if norm >= chart2.radius() {
            return Err(GeomError::OutsideTube {
                norm,
                radius: chart2.radius(),
            });
        }
        raw.push(coords.theta);
    }
    let map = CircleMap::new(&raw).map_err(|_| GeomError::NotDiffeomorphism {
        reason: "induced parameter sequence is not circularly monotone".into(),
    })?;
    // 4th-order differences of the lifted parameter sequence
    let m = raw.len();
    let lift = map.lift();
    let dir = map.winding() as f64;
    let h = std::f64::consts::TAU / m as f64;
    let at = |i: isize| -> f64 {
        let mi = m as isize;
        let q = i.rem_euclid(mi) as usize;
        let turns = (i - i.rem_euclid(mi)) / mi;
        lift[q] + dir * std::f64::consts::TAU * turns as f64
    };
    let mut derivative = Vec::with_capacity(m);
    let mut min_abs = f64::INFINITY;
    for i in 0..m as isize {
        let d = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * h);
        min_abs = min_abs.min(d.abs());
        derivative.push(d);
    }
    if min_abs < tol.jac_floor {
        return Err(GeomError::NotDiffeomorphism {
            reason: format!("correspondence derivative {min_abs:.3e} below floor"),
        });
    }
    Ok(Correspondence {
        map,
        derivative,
        min_abs_derivative: min_abs,
    })
}

/// Transition between overlapping charts: the section over the second
/// center representing the same oriented curve.
pub fn transition(
    chart1: &TubularChart,
    section: &NormalSection,
    chart2: &TubularChart,
    tol: &Tolerances,
) -> Result<ChartPoint> {
    correspondence(chart1, section, chart2, tol)?;
    let image = chart_apply(chart1, section, tol)?;
    let s2 = membership(chart2, &image, tol)?;
    ChartPoint::new(chart2.clone(), s2)
}
