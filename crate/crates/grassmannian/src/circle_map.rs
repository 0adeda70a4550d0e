//! Sampled maps of the circle: reparametrizations, gauges, correspondences.
//!
//! A map is stored by its values on the uniform grid, lifted to a continuous
//! branch so that winding and monotonicity are well defined. Evaluation off
//! the grid interpolates the periodic part `u(theta) - w*theta`
//! trigonometrically, so composition and inversion stay closed under the
//! operations used by the bundle machinery.

use std::f64::consts::TAU;

use crate::error::{GeomError, Result};
use crate::fourier::PeriodicInterp;

/// Strictly monotone sampled circle map with winding `+1` or `-1`.
#[derive(Debug, Clone)]
pub struct CircleMap {
    /// Lifted values over `theta_i = 2*pi*i/m`; continues with
    /// `lift[i + m] = lift[i] + 2*pi*winding`.
    lift: Vec<f64>,
    winding: i8,
    periodic: PeriodicInterp,
}

impl CircleMap {
    /// Build from raw (possibly wrapped) target parameters per grid node.
    pub fn new(raw_values: &[f64]) -> Result<Self> {
        let m = raw_values.len();
        if m < 2 {
            return Err(GeomError::NotBijective);
        }
        // unwrap: pick the branch of each value nearest the previous one
        let mut lift = Vec::with_capacity(m);
        lift.push(raw_values[0]);
        for &v in &raw_values[1..] {
            let prev = *lift.last().unwrap();
            let mut w = v;
            while w - prev > std::f64::consts::PI {
                w -= TAU;
            }
            while w - prev < -std::f64::consts::PI {
                w += TAU;
            }
            lift.push(w);
        }
        // closing step decides the winding
        let mut closing = raw_values[0];
        let last = *lift.last().unwrap();
        while closing - last > std::f64::consts::PI {
            closing -= TAU;
        }
        while closing - last < -std::f64::consts::PI {
            closing += TAU;
        }
        let total = closing - lift[0];
        let winding = if (total - TAU).abs() < 1e-6 {
            1i8
        } else if (total + TAU).abs() < 1e-6 {
            -1i8
        } else {
            return Err(GeomError::NotBijective);
        };
        // strict monotonicity including the wrap-around step
        let dir = winding as f64;
        for i in 0..m {
            let next = if i + 1 < m {
                lift[i + 1]
            } else {
                lift[0] + dir * TAU
            };
            if (next - lift[i]) * dir <= 0.0 {
                return Err(GeomError::NotBijective);
            }
        }
        let periodic_samples: Vec<f64> = lift
            .iter()
            .enumerate()
            .map(|(i, &u)| u - dir * TAU * i as f64 / m as f64)
            .collect();
        let periodic = PeriodicInterp::new(&periodic_samples);
        Ok(CircleMap {
            lift,
            winding,
            periodic,
        })
    }

    pub fn identity(m: usize) -> Self {
        let values: Vec<f64> = (0..m).map(|i| TAU * i as f64 / m as f64).collect();
        CircleMap::new(&values).expect("identity map is monotone")
    }

    pub fn rotation(m: usize, delta: f64) -> Self {
        let values: Vec<f64> = (0..m).map(|i| TAU * i as f64 / m as f64 + delta).collect();
        CircleMap::new(&values).expect("rotation is monotone")
    }

    pub fn grid_size(&self) -> usize {
        self.lift.len()
    }

    pub fn winding(&self) -> i8 {
        self.winding
    }

    /// Lifted node values (continuous branch).
    pub fn lift(&self) -> &[f64] {
        &self.lift
    }

    /// Node values wrapped into `[0, 2*pi)`.
    pub fn values(&self) -> Vec<f64> {
        self.lift.iter().map(|&u| u.rem_euclid(TAU)).collect()
    }

    /// Evaluate the lifted map at any real parameter.
    ///
    /// Satisfies `eval(theta + 2*pi) = eval(theta) + 2*pi*winding`.
    pub fn eval(&self, theta: f64) -> f64 {
        self.winding as f64 * theta + self.periodic.eval(theta)
    }

    pub fn deriv(&self, theta: f64) -> f64 {
        self.winding as f64 + self.periodic.deriv(theta)
    }

    /// `self` after `other`: `(self . other)(theta) = self(other(theta))`.
    pub fn compose(&self, other: &CircleMap) -> Result<CircleMap> {
        let m = other.grid_size();
        let values: Vec<f64> = (0..m).map(|i| self.eval(other.lift[i])).collect();
        CircleMap::new(&values)
    }

    /// Inverse map sampled on the uniform grid (monotone root find per node).
    pub fn inverse(&self, root_tol: f64, max_iters: usize) -> Result<CircleMap> {
        let m = self.grid_size();
        let mut values = Vec::with_capacity(m);
        for i in 0..m {
            let u = TAU * i as f64 / m as f64;
            values.push(self.solve_inverse(u, root_tol, max_iters)?);
        }
        CircleMap::new(&values)
    }

    /// Solve `eval(theta) = u (mod 2*pi)`; bisection then Newton polish.
    pub fn solve_inverse(&self, u: f64, root_tol: f64, max_iters: usize) -> Result<f64> {
        let dir = self.winding as f64;
        let v0 = self.eval(0.0);
        // shift u by whole turns so that (target - v0)*dir lands in [0, 2*pi);
        // the root is then bracketed by one fundamental domain
        let turns = ((u - v0) * dir / TAU).floor();
        let target = u - dir * turns * TAU;
        let g = |t: f64| (self.eval(t) - target) * dir;
        let mut lo = 0.0;
        let mut hi = TAU;
        debug_assert!(g(lo) <= 1e-12 && g(hi) >= -1e-12);
        for _ in 0..45 {
            let mid = 0.5 * (lo + hi);
            if g(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..max_iters {
            let r = self.eval(t) - target;
            if r.abs() < root_tol {
                return Ok(t);
            }
            let d = self.deriv(t);
            if d.abs() < 1e-14 {
                break;
            }
            t -= r / d;
        }
        let r = self.eval(t) - target;
        if r.abs() < root_tol {
            Ok(t)
        } else {
            Err(GeomError::NoConvergence {
                what: "circle map inversion",
                last_change: r.abs(),
            })
        }
    }

    /// CSV block: source parameter, image parameter per grid node.
    pub fn to_csv(&self) -> String {
        let m = self.grid_size();
        let mut out = String::from("parameter,image\n");
        for (i, &u) in self.lift.iter().enumerate() {
            out.push_str(&format!("{},{}\n", TAU * i as f64 / m as f64, u.rem_euclid(TAU)));
        }
        out
    }

    /// Largest node distance to the identity map (circular).
    pub fn max_deviation_from_identity(&self) -> f64 {
        let m = self.grid_size();
        self.lift
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                let theta = TAU * i as f64 / m as f64;
                let mut d = (u - theta).rem_euclid(TAU);
                if d > std::f64::consts::PI {
                    d = TAU - d;
                }
                d
            })
            .fold(0.0_f64, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rotation_has_positive_winding() {
        let r = CircleMap::rotation(32, 0.3);
        assert_eq!(r.winding(), 1);
        assert_abs_diff_eq!(r.eval(0.1), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn reflection_has_negative_winding() {
        let m = 32;
        let values: Vec<f64> = (0..m).map(|i| -(TAU * i as f64 / m as f64)).collect();
        let r = CircleMap::new(&values).unwrap();
        assert_eq!(r.winding(), -1);
    }

    #[test]
    fn folded_map_is_rejected() {
        let m = 32;
        // non-monotone: doubles back in the middle
        let values: Vec<f64> = (0..m)
            .map(|i| {
                let t = TAU * i as f64 / m as f64;
                t + 0.9 * (2.0 * t).sin()
            })
            .collect();
        assert!(matches!(
            CircleMap::new(&values),
            Err(GeomError::NotBijective)
        ));
    }

    #[test]
    fn inverse_undoes_composition() {
        let m = 64;
        let values: Vec<f64> = (0..m)
            .map(|i| {
                let t = TAU * i as f64 / m as f64;
                t + 0.4 * (t + 0.2).sin()
            })
            .collect();
        let phi = CircleMap::new(&values).unwrap();
        let inv = phi.inverse(1e-12, 50).unwrap();
        let comp = phi.compose(&inv).unwrap();
        assert!(comp.max_deviation_from_identity() < 1e-10);
    }

    #[test]
    fn composition_matches_pointwise_formula() {
        let m = 64;
        let f = |t: f64| t + 0.3 * (t).sin();
        let g = |t: f64| t + 0.25 * (2.0 * t + 0.7).cos();
        let fv: Vec<f64> = (0..m).map(|i| f(TAU * i as f64 / m as f64)).collect();
        let gv: Vec<f64> = (0..m).map(|i| g(TAU * i as f64 / m as f64)).collect();
        let fm = CircleMap::new(&fv).unwrap();
        let gm = CircleMap::new(&gv).unwrap();
        let comp = fm.compose(&gm).unwrap();
        for i in 0..m {
            let t = TAU * i as f64 / m as f64;
            assert_abs_diff_eq!(comp.lift()[i].rem_euclid(TAU), f(g(t)).rem_euclid(TAU), epsilon = 1e-10);
        }
    }
}
