//! Stable JSON report schema.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "scenario_id": "...",
//!   "anchors": [{"ref": "...", "quote": "..."}],
//!   "checks": [{"kind", "inputs", "resolutions", "values": {...}, "verdict"}],
//!   "verdict": "PASS" | "FAIL",
//!   "seed": 42,
//!   "config_hash": "..."
//! }
//! ```
//!
//! Two runs with the same seeds and configuration produce identical JSON up to
//! the timestamp, which [`ScenarioReport::canonical_json`] masks.

use std::path::Path;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    /// Stable key naming the inequality or constant the scenario reproduces.
    #[serde(rename = "ref")]
    pub reference: String,
    /// One-line statement of the checked estimate.
    pub quote: String,
}

impl Anchor {
    pub fn new(reference: &str, quote: &str) -> Self {
        Anchor { reference: reference.to_string(), quote: quote.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

/// Numeric payload of one check; keys are stable, unused entries are null.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CheckValues {
    pub lhs: Option<f64>,
    pub weight_term: Option<f64>,
    pub remainder_term: Option<f64>,
    pub residual: Option<f64>,
    pub margin: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub kind: String,
    pub inputs: serde_json::Value,
    pub resolutions: Vec<u32>,
    pub values: CheckValues,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub scenario_id: String,
    pub anchors: Vec<Anchor>,
    pub checks: Vec<CheckRecord>,
    pub verdict: Verdict,
    pub seed: u64,
    pub config_hash: String,
    pub tool_version: String,
    pub generated_unix_ms: u64,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// JSON with the timestamp masked; used for determinism comparisons.
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.generated_unix_ms = 0;
        serde_json::to_string_pretty(&clone).expect("report serializes")
    }
}

/// FNV-1a over the canonical configuration string.
pub(crate) fn config_hash(canonical: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in canonical.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Write the report as pretty JSON; re-reading yields an equal structure.
pub fn emit_report(report: &ScenarioReport, path: &Path) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(path, json)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScenarioReport {
        ScenarioReport {
            schema_version: SCHEMA_VERSION,
            scenario_id: "classical-hardy-n3".into(),
            anchors: vec![Anchor::new("inverse-square", "lhs >= c * rhs")],
            checks: vec![CheckRecord {
                kind: "identity".into(),
                inputs: serde_json::json!({"seeds": 20}),
                resolutions: vec![32, 64],
                values: CheckValues { lhs: Some(1.0), residual: Some(1e-9), ..Default::default() },
                verdict: Verdict::Pass,
            }],
            verdict: Verdict::Pass,
            seed: 42,
            config_hash: config_hash("x"),
            tool_version: "0.1.0".into(),
            generated_unix_ms: 123,
        }
    }

    #[test]
    fn round_trip_is_structural_identity() {
        let r = sample();
        let json = serde_json::to_string(&r).unwrap();
        let back: ScenarioReport = serde_json::from_str(&json).unwrap();
        assert_eq!(r, back);
        assert!(json.contains("\"verdict\":\"PASS\""));
    }

    #[test]
    fn emit_and_read_back() {
        let dir = std::env::temp_dir().join("hardy-report-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("report.json");
        let r = sample();
        emit_report(&r, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back: ScenarioReport = serde_json::from_str(&text).unwrap();
        assert_eq!(r, back);
    }

    #[test]
    fn unwritable_path_errors() {
        let r = sample();
        assert!(emit_report(&r, Path::new("/nonexistent-dir-zzz/report.json")).is_err());
    }

    #[test]
    fn canonical_json_masks_timestamp() {
        let mut a = sample();
        let mut b = sample();
        a.generated_unix_ms = 1;
        b.generated_unix_ms = 2;
        assert_eq!(a.canonical_json(), b.canonical_json());
    }
}
