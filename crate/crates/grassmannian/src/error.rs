//! Error taxonomy shared by every geometric operation.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeomError>;

/// Failure modes of the geometric kernels.
///
/// Numerical operations never panic on bad geometry; they return one of
/// these variants so callers (and the scenario runner) can report the
/// failure instead of crashing.
#[derive(Debug, Clone, Error)]
pub enum GeomError {
    /// A point violates the ambient surface equation beyond `surface_tol`.
    #[error("point is off the ambient manifold (residual {residual:.3e})")]
    OffManifold { residual: f64 },

    /// An iteration (step doubling, Newton, Richardson) failed to settle.
    #[error("{what} did not converge (last change {last_change:.3e})")]
    NoConvergence { what: &'static str, last_change: f64 },

    #[error("too few samples: got {got}, need at least {min}")]
    TooFewSamples { got: usize, min: usize },

    /// Non-adjacent samples closer than the separation floor.
    #[error("polyline self-intersects: samples {i} and {j} are {dist:.3e} apart")]
    SelfIntersection { i: usize, j: usize, dist: f64 },

    /// A sampled parameter map is not a circular bijection.
    #[error("sampled correspondence is not circularly monotone")]
    NotBijective,

    #[error("reach estimate degenerated to {estimate:.3e}")]
    DegenerateReach { estimate: f64 },

    /// A normal vector (or query point) leaves the tubular neighborhood.
    #[error("outside tubular neighborhood: |v| = {norm:.6} vs radius {radius:.6}")]
    OutsideTube { norm: f64, radius: f64 },

    /// Two candidate projections are too close to distinguish (cut locus).
    #[error("ambiguous projection: competing minima at distances {d1:.6} and {d2:.6}")]
    AmbiguousProjection { d1: f64, d2: f64 },

    #[error("map is not an embedding: {reason}")]
    NotEmbedding { reason: String },

    #[error("map is not a diffeomorphism: {reason}")]
    NotDiffeomorphism { reason: String },

    /// A circle map lands in the orientation-reversing component.
    #[error("orientation mismatch")]
    OrientationMismatch,

    /// Path concatenation endpoints disagree.
    #[error("path source mismatch: endpoint differs by {dist:.3e}")]
    SourceMismatch { dist: f64 },

    /// The carrier of a flow lost its tubular neighborhood.
    #[error("tubular radius collapsed to {rho:.3e} at t = {t:.4}")]
    TubeCollapse { rho: f64, t: f64 },

    /// An extended flow stopped tracking the isotopy it extends.
    #[error("flow tracking error {max_dev:.3e} exceeds tolerance {tol:.3e}")]
    TrackingFailure { max_dev: f64, tol: f64 },

    /// The chart-hopping heuristic gave up; not a disproof of connectivity.
    #[error("no chart path found after {attempts} attempts")]
    NoPathFound { attempts: usize },

    #[error("invalid configuration at `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
}

impl GeomError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        GeomError::ConfigInvalid {
            field: field.into(),
            message: message.into(),
        }
    }
}
