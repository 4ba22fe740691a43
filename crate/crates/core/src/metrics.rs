//! Localization error, per-image accounting, dataset aggregation and
//! cross-fold summaries.
//!
//! Per image, the evaluation runs: distance matrix, optimal matching,
//! near-edge exclusion, then classification of what survives:
//!
//! | outcome                         | counts        | error          |
//! |---------------------------------|---------------|----------------|
//! | matched, `d <= t`               | TP            | `eps(d)`       |
//! | matched, `d > t`                | FP + 1, FN + 1 | `eps(d)`      |
//! | unmatched ground truth          | FN            | 1              |
//! | unmatched prediction            | FP            | `alpha`        |
//!
//! with `eps(d) = max(0, min(1 + alpha, (d - s) / (t - s)))`. A far match
//! costs `eps(d)` alone: the ramp saturates at `1 + alpha`, exactly the cost
//! of one miss plus one spurious detection.

use serde::{Deserialize, Serialize};

use crate::assignment::{solve_assignment, Matching};
use crate::error::{Error, Result};
use crate::geometry::{distance_matrix, CentroidSet, ImageGeometry};

/// Parameters of the localization error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    /// Distance up to which a match is perfect.
    pub slack: f64,
    /// Distance at which a match counts as missed.
    pub threshold: f64,
    /// Cost of a spurious detection.
    pub alpha: f64,
    /// Ground truths closer than this to the border are ignored.
    pub edge_margin: f64,
}

impl MetricParams {
    /// Slack `0.25 D`, threshold `D` and margin `D` for average nucleus diameter `D`.
    pub fn from_diameter(diameter: f64, alpha: f64) -> Result<Self> {
        let params = Self {
            slack: 0.25 * diameter,
            threshold: diameter,
            alpha,
            edge_margin: diameter,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.slack, self.threshold, self.alpha, self.edge_margin]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Parameter("metric parameters must be finite".into()));
        }
        if !(0.0 <= self.slack && self.slack < self.threshold) {
            return Err(Error::Parameter(format!(
                "need 0 <= slack < threshold, got slack {} and threshold {}",
                self.slack, self.threshold
            )));
        }
        if self.alpha < 0.0 {
            return Err(Error::Parameter(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if self.edge_margin < 0.0 {
            return Err(Error::Parameter(format!(
                "edge margin must be >= 0, got {}",
                self.edge_margin
            )));
        }
        Ok(())
    }
}

/// `max(0, min(1 + alpha, (d - s) / (t - s)))`.
pub fn localization_error(distance: f64, params: &MetricParams) -> f64 {
    let ramp = (distance - params.slack) / (params.threshold - params.slack);
    ramp.min(1.0 + params.alpha).max(0.0)
}

/// Result of near-edge exclusion.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EdgeFilter {
    /// Ground truths kept for evaluation, ascending.
    pub kept_gts: Vec<usize>,
    /// Predictions dropped from evaluation, ascending.
    pub discarded_preds: Vec<usize>,
}

/// Drops ground truths within `margin` of the border together with their
/// matched predictions; unmatched predictions within the margin go too.
///
/// Membership uses a strict comparison: a point exactly `margin` away from
/// the nearest border pixel center is kept.
pub fn filter_near_edge(
    preds: &CentroidSet,
    gts: &CentroidSet,
    matching: &Matching,
    geometry: ImageGeometry,
    margin: f64,
) -> EdgeFilter {
    let near_edge = |p| geometry.edge_distance(p) < margin;
    let pred_of_gt = matching.pred_of_gt(gts.len());
    let gt_of_pred = matching.gt_of_pred(preds.len());

    let mut kept_gts = Vec::with_capacity(gts.len());
    let mut discard = vec![false; preds.len()];
    for (j, g) in gts.iter().enumerate() {
        if near_edge(g) {
            if let Some(i) = pred_of_gt[j] {
                discard[i] = true;
            }
        } else {
            kept_gts.push(j);
        }
    }
    for (i, p) in preds.iter().enumerate() {
        if gt_of_pred[i].is_none() && near_edge(p) {
            discard[i] = true;
        }
    }
    EdgeFilter {
        kept_gts,
        discarded_preds: (0..preds.len()).filter(|&i| discard[i]).collect(),
    }
}

/// Error attributed to one matched pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairError {
    pub pred: usize,
    pub gt: usize,
    pub distance: f64,
    pub error: f64,
}

/// Per-image accounting.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ImageEval {
    pub kept_gt_count: usize,
    /// Predictions that survived edge exclusion (`tp + fp`).
    pub kept_pred_count: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub error_sum: f64,
    pub per_pair_errors: Vec<PairError>,
}

/// Runs matching, edge exclusion and classification for one image.
pub fn evaluate_image(
    preds: &CentroidSet,
    gts: &CentroidSet,
    geometry: ImageGeometry,
    params: &MetricParams,
) -> Result<ImageEval> {
    params.validate()?;
    let costs = distance_matrix(preds, gts);
    let matching = solve_assignment(&costs)?;
    Ok(classify(preds, gts, &matching, geometry, params))
}

/// Classification step of [`evaluate_image`] for a precomputed matching.
pub fn classify(
    preds: &CentroidSet,
    gts: &CentroidSet,
    matching: &Matching,
    geometry: ImageGeometry,
    params: &MetricParams,
) -> ImageEval {
    let filter = filter_near_edge(preds, gts, matching, geometry, params.edge_margin);
    let mut gt_kept = vec![false; gts.len()];
    for &j in &filter.kept_gts {
        gt_kept[j] = true;
    }
    let mut pred_dropped = vec![false; preds.len()];
    for &i in &filter.discarded_preds {
        pred_dropped[i] = true;
    }

    let mut eval = ImageEval {
        kept_gt_count: filter.kept_gts.len(),
        kept_pred_count: preds.len() - filter.discarded_preds.len(),
        ..ImageEval::default()
    };

    let mut contributions = Vec::with_capacity(preds.len() + gts.len());
    for pair in &matching.pairs {
        if !gt_kept[pair.gt] {
            continue;
        }
        let error = localization_error(pair.distance, params);
        if pair.distance <= params.threshold {
            eval.tp += 1;
        } else {
            eval.fp += 1;
            eval.fn_ += 1;
        }
        contributions.push(error);
        eval.per_pair_errors.push(PairError {
            pred: pair.pred,
            gt: pair.gt,
            distance: pair.distance,
            error,
        });
    }
    for &j in &matching.unmatched_gts {
        if gt_kept[j] {
            eval.fn_ += 1;
            contributions.push(1.0);
        }
    }
    for &i in &matching.unmatched_preds {
        if !pred_dropped[i] {
            eval.fp += 1;
            contributions.push(params.alpha);
        }
    }
    eval.error_sum = order_free_sum(contributions);
    eval
}

/// Sum in ascending order, so the result depends only on the multiset of
/// terms and not on how images or detections were enumerated.
fn order_free_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

/// Dataset-level summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total_gt: usize,
    /// `None` when the dataset has no kept ground truth.
    pub localization_error: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub per_image: Vec<ImageEval>,
}

fn ratio_or_one(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F-score with the vacuous-case conventions
/// (P = 1 when nothing was predicted, R = 1 when nothing was expected,
/// F = 0 when P + R = 0).
pub fn precision_recall_f(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let precision = ratio_or_one(tp, tp + fp);
    let recall = ratio_or_one(tp, tp + fn_);
    let fscore = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, fscore)
}

/// Sums per-image results in the given order.
pub fn aggregate_dataset(evals: Vec<ImageEval>) -> EvalReport {
    let total_gt = evals.iter().map(|e| e.kept_gt_count).sum();
    let tp = evals.iter().map(|e| e.tp).sum();
    let fp = evals.iter().map(|e| e.fp).sum();
    let fn_ = evals.iter().map(|e| e.fn_).sum();
    let error_sum = order_free_sum(evals.iter().map(|e| e.error_sum).collect());
    let (precision, recall, fscore) = precision_recall_f(tp, fp, fn_);
    EvalReport {
        total_gt,
        localization_error: (total_gt > 0).then(|| error_sum / total_gt as f64),
        precision,
        recall,
        fscore,
        tp,
        fp,
        fn_,
        per_image: evals,
    }
}

/// Weighted mean and spread of one metric across folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub weighted_mean: f64,
    /// Unweighted population standard deviation of the fold values.
    pub std_dev: f64,
    /// `(value, weight)` per fold.
    pub fold_values: Vec<(f64, f64)>,
}

pub fn crossfold_aggregate(values: &[f64], weights: &[f64]) -> Result<FoldSummary> {
    if values.is_empty() {
        return Err(Error::Input("need at least one fold".into()));
    }
    if values.len() != weights.len() {
        return Err(Error::Input(format!(
            "{} fold values but {} weights",
            values.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::Input(format!("fold weights must be positive, got {w}")));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Input(format!("fold values must be finite, got {v}")));
    }

    let total_weight: f64 = weights.iter().sum();
    let weighted_mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total_weight;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std_dev = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(FoldSummary {
        weighted_mean,
        std_dev,
        fold_values: values.iter().copied().zip(weights.iter().copied()).collect(),
    })
}
