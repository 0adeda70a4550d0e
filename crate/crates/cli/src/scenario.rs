//! Scenario configuration: ambient descriptor, generator specs, resolution,
//! seed, tolerance overrides and the experiment tag. Loaded from TOML;
//! every validation failure names the offending field.

use serde::{Deserialize, Serialize};

use grassmannian::ambient::{AmbientManifold, LevelSetField};
use grassmannian::error::{GeomError, Result};
use grassmannian::generators;
use grassmannian::submanifold::OrientedSubmanifold;
use grassmannian::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ChartTransition,
    ProjectionDiff,
    Trivialize,
    LiftPath,
    ExtendIsotopy,
    Transport,
    VerifyAll,
}

impl Experiment {
    pub fn tag(&self) -> &'static str {
        match self {
            Experiment::ChartTransition => "chart-transition",
            Experiment::ProjectionDiff => "projection-diff",
            Experiment::Trivialize => "trivialize",
            Experiment::LiftPath => "lift-path",
            Experiment::ExtendIsotopy => "extend-isotopy",
            Experiment::Transport => "transport",
            Experiment::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmbientSpec {
    Flat { dim: usize },
    Sphere { dim: usize },
    LevelSet(LevelSetField),
}

impl Default for AmbientSpec {
    fn default() -> Self {
        AmbientSpec::Flat { dim: 2 }
    }
}

impl AmbientSpec {
    pub fn build(&self) -> Result<AmbientManifold> {
        match self {
            AmbientSpec::Flat { dim } => {
                if *dim < 2 {
                    return Err(GeomError::config("ambient.dim", "need dim >= 2"));
                }
                Ok(AmbientManifold::flat(*dim))
            }
            AmbientSpec::Sphere { dim } => {
                if *dim < 3 {
                    return Err(GeomError::config("ambient.dim", "need ambient dim >= 3"));
                }
                Ok(AmbientManifold::round_sphere(*dim))
            }
            AmbientSpec::LevelSet(field) => Ok(AmbientManifold::level_set(field.clone())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum CurveGenerator {
    Circle {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Equator,
    TorusKnot {
        p: u32,
        q: u32,
    },
}

impl CurveGenerator {
    pub fn build(
        &self,
        manifold: &AmbientManifold,
        m: usize,
        tol: &Tolerances,
    ) -> Result<OrientedSubmanifold> {
        match self {
            CurveGenerator::Circle { radius, center } => {
                generators::circle(manifold, m, *radius, center, tol)
            }
            CurveGenerator::Ellipse { a, b, center } => {
                generators::ellipse(manifold, m, *a, *b, center, tol)
            }
            CurveGenerator::Equator => generators::equator(manifold, m, tol),
            CurveGenerator::TorusKnot { p, q } => generators::torus_knot(manifold, m, *p, *q, tol),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSpec {
    pub role: String,
    #[serde(flatten)]
    pub generator: CurveGenerator,
}

fn default_seed() -> u64 {
    42
}

fn default_resolution() -> usize {
    256
}

fn default_trials() -> usize {
    20
}

fn default_section_amplitude() -> f64 {
    0.3
}

/// One named experiment run: cast, resolution, seed, tolerances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub experiment: Experiment,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub ambient: AmbientSpec,
    #[serde(default)]
    pub curves: Vec<CurveSpec>,
    /// Randomized trial count for property-style checks.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Sup-norm of random sections as a fraction of the tube radius.
    #[serde(default = "default_section_amplitude")]
    pub section_amplitude: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(GeomError::config("id", "must be nonempty"));
        }
        if self.resolution < 16 {
            return Err(GeomError::config(
                "resolution",
                format!("m = {} below the minimum of 16", self.resolution),
            ));
        }
        if !(0.0..1.0).contains(&self.section_amplitude) {
            return Err(GeomError::config(
                "section_amplitude",
                "must lie in [0, 1) as a fraction of the tube radius",
            ));
        }
        if self.trials == 0 {
            return Err(GeomError::config("trials", "must be positive"));
        }
        self.ambient.build()?;
        Ok(())
    }

    pub fn curve(&self, role: &str) -> Result<&CurveSpec> {
        self.curves
            .iter()
            .find(|c| c.role == role)
            .ok_or_else(|| GeomError::config("curves", format!("missing role `{role}`")))
    }

    pub fn from_toml(text: &str) -> Result<Scenario> {
        let s: Scenario = toml::from_str(text)
            .map_err(|e| GeomError::config("config", e.to_string()))?;
        s.validate()?;
        Ok(s)
    }
}

/// A suite file: a list of scenarios run together by `verify-all`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Suite {
    #[serde(default)]
    pub id: String,
    #[serde(rename = "scenario")]
    pub scenarios: Vec<Scenario>,
}

impl Suite {
    pub fn from_toml(text: &str) -> Result<Suite> {
        let s: Suite = toml::from_str(text)
            .map_err(|e| GeomError::config("config", e.to_string()))?;
        for sc in &s.scenarios {
            sc.validate()?;
        }
        Ok(s)
    }
}
