//! The JSON report written by every CLI command.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::boundary::BoundaryClassification;
use crate::disc_index::{IndexReport, SlkResult, SLK_SIGN};
use crate::fields::BeltramiReport;
use crate::verify::{CrossValidation, OrbitRecord, PushoffResult};

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo { name: "bscope".into(), version: env!("CARGO_PKG_VERSION").into() }
    }
}

/// Sign and orientation conventions, echoed so a report can be read alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub slk_sign: i32,
    pub boundary_orientation: String,
    pub disc_normal: String,
    pub index_formula: String,
    pub foliation_rotation: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            slk_sign: SLK_SIGN,
            boundary_orientation: "g(X, γ') > 0".into(),
            disc_normal: "n = ∂u × ∂v, oriented by the boundary direction".into(),
            index_formula: "λ = 0: 0; transverse meridian: sign(λ)·slk + 1; otherwise sign(λ)".into(),
            foliation_rotation: "+90° in the disc".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRun {
    pub resolution: usize,
    pub sum_sigma_index: i32,
    pub oracle_slk: i32,
    pub implied_sign: Option<i32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub runs: Vec<CalibrationRun>,
    pub stable: bool,
    pub slk_sign: Option<i32>,
    pub matches_builtin: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub report_version: u32,
    pub tool: ToolInfo,
    pub command: String,
    pub conventions: Conventions,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<IndexReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slk: Option<SlkResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<PushoffResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beltrami: Option<BeltramiReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryClassification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbits: Option<Vec<OrbitRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_validation: Option<CrossValidation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl ReportDocument {
    pub fn new(command: &str, config: RunConfig) -> Self {
        ReportDocument {
            report_version: REPORT_VERSION,
            tool: ToolInfo::default(),
            command: command.into(),
            conventions: Conventions::default(),
            config,
            index: None,
            slk: None,
            oracle: None,
            beltrami: None,
            boundary: None,
            orbits: None,
            cross_validation: None,
            calibration: None,
            warnings: Vec::new(),
            timestamp: None,
        }
    }

    pub fn stamp(&mut self) {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        self.timestamp = Some(format!("unix:{secs}"));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
