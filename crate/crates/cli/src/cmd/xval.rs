use std::path::PathBuf;

use anyhow::{bail, ensure, Result};
use clap::Args;
use cytoloc_core::{crossfold_aggregate, FoldSummary};
use serde::Serialize;

use crate::report::{read_json, EvalSummary};
use crate::{inputs, Ctx};

#[derive(Args)]
pub struct XvalArgs {
    /// One `eval` report per fold.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Summary JSON.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Serialize)]
struct MetricSummary {
    metric: String,
    #[serde(flatten)]
    summary: FoldSummary,
}

#[derive(Serialize)]
struct XvalSummary {
    folds: usize,
    /// Kept ground-truth count per fold.
    weights: Vec<usize>,
    metrics: Vec<MetricSummary>,
}

pub fn run(ctx: &Ctx, args: XvalArgs) -> Result<()> {
    let folds: Vec<EvalSummary> = args.reports.iter().map(|p| read_json(p)).collect::<Result<_>>()?;
    let alphas: Vec<f64> = folds[0].localization_error.iter().map(|a| a.alpha).collect();
    for (fold, path) in folds.iter().zip(&args.reports) {
        let these: Vec<f64> = fold.localization_error.iter().map(|a| a.alpha).collect();
        ensure!(
            these == alphas,
            "{}: alpha list {these:?} differs from {alphas:?} in {}",
            path.display(),
            args.reports[0].display()
        );
        ensure!(
            fold.total_gt > 0,
            "{}: fold has no kept ground truth",
            path.display()
        );
    }
    let weights: Vec<f64> = folds.iter().map(|f| f.total_gt as f64).collect();

    let mut series: Vec<(String, Vec<f64>)> = vec![
        ("precision".into(), folds.iter().map(|f| f.precision).collect()),
        ("recall".into(), folds.iter().map(|f| f.recall).collect()),
        ("fscore".into(), folds.iter().map(|f| f.fscore).collect()),
    ];
    for (k, alpha) in alphas.iter().enumerate() {
        let mut values = Vec::with_capacity(folds.len());
        for (fold, path) in folds.iter().zip(&args.reports) {
            let Some(v) = fold.localization_error[k].value else {
                bail!("{}: El(alpha={alpha}) is undefined", path.display());
            };
            values.push(v);
        }
        series.push((format!("el_alpha_{alpha}"), values));
    }

    let metrics = series
        .into_iter()
        .map(|(metric, values)| {
            Ok(MetricSummary {
                metric,
                summary: crossfold_aggregate(&values, &weights)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = XvalSummary {
        folds: folds.len(),
        weights: folds.iter().map(|f| f.total_gt).collect(),
        metrics,
    };
    inputs::write_json(&args.output, &summary)?;

    ctx.say(format_args!(
        "{} folds, weights {:?}",
        summary.folds, summary.weights
    ));
    for m in &summary.metrics {
        ctx.say(format_args!(
            "{:<16} {:.4} ± {:.4}",
            m.metric, m.summary.weighted_mean, m.summary.std_dev
        ));
    }
    Ok(())
}
