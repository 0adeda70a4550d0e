//! Scenario runner and verification harness: load a structured config,
//! execute named experiments against the geometry crate, and emit
//! machine-readable reports with one row per verified claim.

pub mod experiments;
pub mod report;
pub mod scenario;
pub mod suite;

pub use experiments::run_scenario;
pub use report::{Check, ScenarioReport, SuiteReport};
pub use scenario::{Experiment, Scenario, Suite};
pub use suite::{default_scenario, default_suite, verify_suite};
