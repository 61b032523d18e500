//! JSON records of runs and suites.

use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;

/// Bumped whenever a CSV column or JSON key changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One check with its measured value against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    /// Passes when `value < tolerance`.
    pub fn below(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self::verdict(name, value < tolerance, Some(value), Some(tolerance), detail)
    }

    pub fn verdict(
        name: &str,
        pass: bool,
        value: Option<f64>,
        tolerance: Option<f64>,
        detail: impl Into<String>,
    ) -> Self {
        Check {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            value: value.filter(|v| v.is_finite()),
            tolerance,
            detail: detail.into(),
        }
    }

    pub fn skipped(name: &str, reason: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Skipped, value: None, tolerance: None, detail: reason.into() }
    }

    pub fn failed(name: &str, reason: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Fail, value: None, tolerance: None, detail: reason.into() }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    BlowUp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowUpInfo {
    pub t: f64,
    /// `null` when the state turned non-finite.
    pub max_ux: Option<f64>,
    pub last_valid_t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub code_version: String,
    pub scenario: Scenario,
    pub wall_time_s: f64,
    pub outcome: Outcome,
    pub blow_up: Option<BlowUpInfo>,
    pub steps: usize,
    pub snapshots: usize,
    pub diagnostics: Vec<Check>,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn all_passed(&self) -> bool {
        self.diagnostics.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.diagnostics.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub code_version: String,
    pub suite: String,
    pub wall_time_s: f64,
    pub workers: usize,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}
