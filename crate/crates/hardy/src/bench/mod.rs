//! Scenario catalog, runner and JSON reporting.
//!
//! Each scenario reproduces one inequality or constant: it bundles a geometry,
//! a weight problem, and a plan of checks (identity residuals, closed-form
//! weight matches, constant brackets, ODE/eigensolver values). Reports are
//! deterministic for fixed seeds and serialize to a stable JSON schema.

mod catalog;
mod report;
mod scenario;

pub use catalog::{catalog, find_scenario, list_scenarios, required_anchor_keys, ScenarioSummary};
pub use report::{emit_report, Anchor, CheckRecord, CheckValues, ScenarioReport, Verdict};
pub use scenario::{
    run_scenario, BenchError, Check, FamilySpec, IdentityCheck, RunConfig, Scenario, SeedMode,
};
