//! Numerical tolerances and method parameters.
//!
//! Every threshold used by the kernels lives here so that a scenario config
//! can override it; call sites never hard-code a relaxation.

use serde::{Deserialize, Serialize};

/// Tolerances and iteration limits for the geometric kernels.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Acceptable residual |F(x)| for a point to count as on-manifold.
    pub surface_tol: f64,
    /// Step-doubling acceptance threshold for the geodesic integrator.
    pub exp_tol: f64,
    /// Agreement threshold for Richardson finite-difference derivatives.
    pub fd_tol: f64,
    /// Residual target for tubular-neighborhood inversion.
    pub inv_tol: f64,
    /// Fraction of the reach estimate used as the tubular radius.
    pub safety_factor: f64,
    /// Separation floor factor: `embed_sep = factor * min adjacent spacing`.
    pub embed_sep_factor: f64,
    /// Minimum norm of the finite-difference derivative along the grid.
    pub imm_floor: f64,
    /// Minimum correspondence-map derivative magnitude for the certificate.
    pub jac_floor: f64,
    /// Point-set agreement threshold for chart membership.
    pub contain_tol: f64,
    /// Roundtrip threshold used by the chart injectivity certificate.
    pub roundtrip_tol: f64,
    /// Minimum image separation on the chart certificate test grid.
    pub collision_tol: f64,
    /// Two projection minima closer than this are reported as ambiguous.
    pub ambiguous_tol: f64,
    /// Allowed per-sample jump at a path concatenation junction.
    pub junction_tol: f64,
    /// Endpoint tolerance for lifted paths.
    pub lift_tol: f64,
    /// Smallest admissible carrier tube radius during a flow.
    pub rho_min: f64,
    /// Step-halving acceptance threshold for flow trajectories.
    pub flow_tol: f64,
    /// Maximum deviation between the flow restricted to the carrier and
    /// the isotopy it extends.
    pub track_tol: f64,
    /// Endpoint tolerance for transport certificates.
    pub transport_tol: f64,
    /// Residual target for monotone 1-D root finding (map inversion).
    pub root_tol: f64,
    /// Initial step count for the geodesic integrator.
    pub exp_steps_init: usize,
    /// Step-doubling cap for the geodesic integrator.
    pub exp_steps_max: usize,
    /// Iteration cap for Newton / Gauss-Newton solves.
    pub max_newton_iters: usize,
    /// Step-halving cap for flow integration.
    pub flow_halvings_max: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            surface_tol: 1e-9,
            exp_tol: 1e-9,
            fd_tol: 1e-6,
            inv_tol: 1e-10,
            safety_factor: 0.5,
            embed_sep_factor: 0.25,
            imm_floor: 1e-6,
            jac_floor: 1e-6,
            contain_tol: 1e-6,
            roundtrip_tol: 1e-8,
            collision_tol: 1e-6,
            ambiguous_tol: 1e-6,
            junction_tol: 1e-6,
            lift_tol: 1e-6,
            rho_min: 1e-3,
            flow_tol: 1e-8,
            track_tol: 1e-5,
            transport_tol: 1e-3,
            root_tol: 1e-12,
            exp_steps_init: 64,
            exp_steps_max: 65_536,
            max_newton_iters: 50,
            flow_halvings_max: 12,
        }
    }
}
