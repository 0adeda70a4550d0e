//! Machine-readable reports. Field order is fixed by declaration, no clocks
//! or paths are embedded, so a rerun with the same config and seed renders
//! byte-identical JSON.

use serde::Serialize;

/// One verified claim: the measured value and the tolerance it was held to.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured value (max error, observed order, ...) when meaningful.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// The tolerance or threshold the value was compared against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// How the value relates to the tolerance: `lt`, `ge` or `exact`.
    pub comparison: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Value must stay strictly below the tolerance.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            passed: value < tolerance,
            value: Some(value),
            tolerance: Some(tolerance),
            comparison: "lt",
            detail: None,
        }
    }

    /// Value must reach at least the threshold (convergence orders, dets).
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            passed: value >= threshold,
            value: Some(value),
            tolerance: Some(threshold),
            comparison: "ge",
            detail: None,
        }
    }

    pub fn boolean(name: impl Into<String>, passed: bool) -> Check {
        Check {
            name: name.into(),
            passed,
            value: None,
            tolerance: None,
            comparison: "exact",
            detail: None,
        }
    }

    /// A module error captured as a failed check.
    pub fn failure(name: impl Into<String>, error: impl std::fmt::Display) -> Check {
        Check {
            name: name.into(),
            passed: false,
            value: None,
            tolerance: None,
            comparison: "exact",
            detail: Some(error.to_string()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Check {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub experiment: String,
    pub seed: u64,
    pub resolution: usize,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl ScenarioReport {
    pub fn new(
        id: impl Into<String>,
        experiment: impl Into<String>,
        seed: u64,
        resolution: usize,
        checks: Vec<Check>,
    ) -> ScenarioReport {
        let pass = checks.iter().all(|c| c.passed);
        ScenarioReport {
            id: id.into(),
            experiment: experiment.into(),
            seed,
            resolution,
            pass,
            checks,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub scenarios: Vec<ScenarioReport>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, mut scenarios: Vec<ScenarioReport>) -> SuiteReport {
        scenarios.sort_by(|a, b| a.id.cmp(&b.id));
        let pass = scenarios.iter().all(|s| s.pass);
        SuiteReport {
            suite: suite.into(),
            pass,
            scenarios,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_sorts_scenarios_and_aggregates() {
        let b = ScenarioReport::new("b", "transport", 1, 64, vec![Check::boolean("x", true)]);
        let a = ScenarioReport::new(
            "a",
            "lift-path",
            1,
            64,
            vec![Check::below("err", 2.0, 1.0)],
        );
        let suite_report = SuiteReport::new("s", vec![b, a]);
        assert_eq!(suite_report.scenarios[0].id, "a");
        assert!(!suite_report.pass);
    }

    #[test]
    fn json_rendering_is_reproducible() {
        let r = ScenarioReport::new(
            "x",
            "trivialize",
            7,
            64,
            vec![Check::below("err", 1e-10, 1e-8)],
        );
        let s1 = SuiteReport::new("s", vec![r.clone()]).to_json();
        let s2 = SuiteReport::new("s", vec![r]).to_json();
        assert_eq!(s1, s2);
    }
}
