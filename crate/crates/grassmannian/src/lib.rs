//! Discrete oriented submanifolds of an ambient Riemannian space.
//!
//! The crate realizes, at desk scale, the manifold of compact connected
//! oriented k-dimensional submanifolds (closed curves, `k = 1`) of an
//! ambient space: tubular-neighborhood charts and their transitions, the
//! space of embeddings as a principal bundle over the curve space, and the
//! extension of curve isotopies to compactly supported ambient flows. Every
//! structural identity is checked numerically at explicit tolerances.

pub mod ambient;
pub mod atlas;
pub mod circle_map;
pub mod config;
pub mod embedding;
pub mod error;
pub mod fourier;
pub mod generators;
pub mod isotopy;
pub mod submanifold;
pub mod tubular;

pub use ambient::{point, AmbientKind, AmbientManifold, LevelSetField, Point, TangentVector, Vector};
pub use circle_map::CircleMap;
pub use config::Tolerances;
pub use error::{GeomError, Result};
pub use submanifold::{hausdorff_distance, NormalSection, OrientedSubmanifold};
pub use tubular::TubularChart;
