//! On-disk report shapes shared by `eval`, `xval` and `plot`.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    /// Absent when slack, threshold and margin were all given explicitly.
    pub diameter: Option<f64>,
    pub slack: f64,
    pub threshold: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaValue {
    pub alpha: f64,
    /// Null when no ground truth survived edge exclusion.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOut {
    pub pred: usize,
    pub gt: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSummary {
    pub name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub missing_prediction: bool,
    pub kept_gt_count: usize,
    pub kept_pred_count: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// One entry per alpha, in report order.
    pub error_sum: Vec<f64>,
    /// Matched pairs that survived edge exclusion.
    pub pairs: Vec<PairOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub images: usize,
    pub params: ResolvedParams,
    pub total_gt: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    pub localization_error: Vec<AlphaValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_image: Vec<ImageSummary>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let ctx = || format!("{}", path.display());
    let file = File::open(path).with_context(ctx)?;
    serde_json::from_reader(BufReader::new(file)).with_context(ctx)
}
