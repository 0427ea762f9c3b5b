//! Versioned JSON result documents.
//!
//! Output is deterministic: struct fields serialize in declaration order and
//! floats use shortest-round-trip formatting, so identical inputs produce
//! byte-identical documents.

use caroc_core::bandwidth::{BandwidthSet, SelectionMethod};
use caroc_core::estimators::RocPoint;
use caroc_core::sim::{BandStudyResult, SimResult};
use caroc_core::AucBand;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BandwidthsOut {
    pub h1: f64,
    pub h2: f64,
    pub b1: f64,
    pub b2: f64,
    pub method: String,
}

impl From<&BandwidthSet> for BandwidthsOut {
    fn from(set: &BandwidthSet) -> Self {
        let method = match set.method {
            SelectionMethod::LooCv => "loo_cv",
            SelectionMethod::OracleIse => "oracle_ise",
            SelectionMethod::Fixed => "fixed",
        };
        BandwidthsOut { h1: set.h1, h2: set.h2, b1: set.b1, b2: set.b2, method: method.into() }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitOut {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BandOut {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub variance: Vec<f64>,
    pub level: f64,
    pub replicates_requested: usize,
    pub replicates_effective: usize,
    pub failed_replicates: usize,
}

impl From<&AucBand> for BandOut {
    fn from(b: &AucBand) -> Self {
        BandOut {
            lower: b.lower.clone(),
            upper: b.upper.clone(),
            variance: b.variance.clone(),
            level: b.level,
            replicates_requested: b.replicates_requested,
            replicates_effective: b.replicates_effective,
            failed_replicates: b.failed_replicates,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RocPointOut {
    pub threshold: f64,
    pub sensitivity: f64,
    pub one_minus_specificity: f64,
}

impl From<&RocPoint> for RocPointOut {
    fn from(p: &RocPoint) -> Self {
        RocPointOut {
            threshold: p.threshold,
            sensitivity: p.sensitivity,
            one_minus_specificity: p.one_minus_specificity,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RocOut {
    pub z: f64,
    pub points: Vec<RocPointOut>,
    pub area: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub youden_index: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub youden_threshold: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MseStudyOut {
    pub scenario: String,
    pub policy: String,
    pub m: usize,
    pub n: usize,
    pub estimators: Vec<String>,
    pub true_auc: Vec<f64>,
    /// mse[e][i]: estimator e at z_grid[i].
    pub mse: Vec<Vec<f64>>,
    pub integrated_mse: Vec<f64>,
    pub runs: usize,
    pub effective_runs: usize,
    pub failed_runs: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BandStudyOut {
    pub scenario: String,
    pub m: usize,
    pub n: usize,
    pub mc_lower: Vec<f64>,
    pub mc_upper: Vec<f64>,
    pub mc_variance: Vec<f64>,
    pub avg_boot_lower: Vec<f64>,
    pub avg_boot_upper: Vec<f64>,
    pub avg_boot_variance: Vec<f64>,
    pub runs: usize,
    pub effective_runs: usize,
    pub failed_runs: usize,
    pub bootstrap_replicates: usize,
    pub level: f64,
}

/// Top-level result document shared by every subcommand.
#[derive(Debug, Serialize, Deserialize)]
pub struct ResultDoc {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamp: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_response: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidths: Option<BandwidthsOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_bandwidths: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimates: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<BandOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roc: Option<RocOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse_study: Option<MseStudyOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_study: Option<BandStudyOut>,
}

impl ResultDoc {
    pub fn new(command: &str, seed: u64) -> Self {
        ResultDoc {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo::default(),
            command: command.into(),
            seed,
            estimator: None,
            order_p: None,
            kernel: None,
            clamp: None,
            log_response: None,
            bandwidths: None,
            kernel_bandwidths: None,
            z_grid: None,
            estimates: None,
            fit: None,
            band: None,
            roc: None,
            mse_study: None,
            band_study: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }
}

pub fn mse_study_out(
    scenario: &str,
    policy: &str,
    m: usize,
    n: usize,
    estimator_names: Vec<String>,
    res: &SimResult,
) -> MseStudyOut {
    MseStudyOut {
        scenario: scenario.into(),
        policy: policy.into(),
        m,
        n,
        estimators: estimator_names,
        true_auc: res.true_auc.clone(),
        mse: res.mse.clone(),
        integrated_mse: (0..res.mse.len()).map(|e| res.integrated_mse(e)).collect(),
        runs: res.runs,
        effective_runs: res.effective_runs,
        failed_runs: res.failed_runs,
    }
}

pub fn band_study_out(scenario: &str, m: usize, n: usize, res: &BandStudyResult) -> BandStudyOut {
    BandStudyOut {
        scenario: scenario.into(),
        m,
        n,
        mc_lower: res.mc_lower.clone(),
        mc_upper: res.mc_upper.clone(),
        mc_variance: res.mc_variance.clone(),
        avg_boot_lower: res.avg_boot_lower.clone(),
        avg_boot_upper: res.avg_boot_upper.clone(),
        avg_boot_variance: res.avg_boot_variance.clone(),
        runs: res.runs,
        effective_runs: res.effective_runs,
        failed_runs: res.failed_runs,
        bootstrap_replicates: res.bootstrap_replicates,
        level: res.level,
    }
}
