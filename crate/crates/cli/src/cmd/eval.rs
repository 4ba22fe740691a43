use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use cytoloc_core::formats::{read_centroids_file, read_polygons_file};
use cytoloc_core::metrics::classify;
use cytoloc_core::{
    aggregate_dataset, distance_matrix, estimate_avg_diameter, solve_assignment, CentroidSet, ImageEval,
    ImageGeometry, MetricParams,
};
use rayon::prelude::*;
use serde::Deserialize;

use crate::report::{AlphaValue, EvalSummary, ImageSummary, PairOut, ResolvedParams};
use crate::{inputs, Ctx};

#[derive(Args)]
pub struct EvalArgs {
    /// Directory of predicted centroid CSVs.
    #[arg(long, value_name = "DIR", required_unless_present = "manifest")]
    pred: Option<PathBuf>,
    /// Directory of ground-truth centroid CSVs with the same file names.
    #[arg(long, value_name = "DIR", required_unless_present = "manifest")]
    gt: Option<PathBuf>,
    /// JSON list of {"name", "pred", "gt"} entries instead of directory pairing.
    #[arg(long, value_name = "JSON", conflicts_with_all = ["pred", "gt"])]
    manifest: Option<PathBuf>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Average nucleus diameter in pixels.
    #[arg(long, conflicts_with = "polygons")]
    diameter: Option<f64>,
    /// Polygon JSON files to estimate the average diameter from.
    #[arg(long, value_name = "JSON", num_args = 1..)]
    polygons: Vec<PathBuf>,
    /// Zero-error radius [default: 0.25 x diameter].
    #[arg(long)]
    slack: Option<f64>,
    /// Match distance limit [default: diameter].
    #[arg(long)]
    threshold: Option<f64>,
    /// Border margin for ground truths [default: diameter].
    #[arg(long)]
    margin: Option<f64>,
    /// Spurious-detection costs, one El column each [default: 0.3,1].
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Evaluate ground truths without a prediction file as all missed.
    #[arg(long)]
    allow_missing: bool,
    /// Include per-image counts and matched pairs in the JSON.
    #[arg(long)]
    per_image: bool,
    /// Report JSON.
    #[arg(short, long)]
    output: PathBuf,
    /// One-row CSV summary.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    name: String,
    pred: Option<PathBuf>,
    gt: PathBuf,
}

struct Item {
    name: String,
    pred: Option<PathBuf>,
    gt: PathBuf,
}

/// Pairs by file stem. Returns the items sorted by name and the names of
/// predictions without ground truth.
fn pair_dirs(pred_dir: &Path, gt_dir: &Path) -> Result<(Vec<Item>, Vec<String>)> {
    let mut preds: BTreeMap<String, PathBuf> = inputs::list_dir(pred_dir, "csv")?
        .into_iter()
        .map(|p| (inputs::stem(&p), p))
        .collect();
    let mut items = Vec::new();
    for gt in inputs::list_dir(gt_dir, "csv")? {
        let name = inputs::stem(&gt);
        items.push(Item {
            pred: preds.remove(&name),
            name,
            gt,
        });
    }
    Ok((items, preds.into_keys().collect()))
}

fn read_manifest(path: &Path) -> Result<Vec<Item>> {
    let entries: Vec<ManifestEntry> = crate::report::read_json(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut items: Vec<Item> = entries
        .into_iter()
        .map(|e| Item {
            name: e.name,
            pred: e.pred.map(|p| base.join(p)).filter(|p| p.exists()),
            gt: base.join(e.gt),
        })
        .collect();
    items.sort_by(|a, b| a.name.cmp(&b.name));
    if let Some(w) = items.windows(2).find(|w| w[0].name == w[1].name) {
        bail!("{}: duplicate entry `{}`", path.display(), w[0].name);
    }
    Ok(items)
}

fn resolve_params(ctx: &Ctx, args: &EvalArgs) -> Result<(ResolvedParams, Vec<f64>)> {
    let cfg = &ctx.config;
    let slack = args.slack.or(cfg.slack);
    let threshold = args.threshold.or(cfg.threshold);
    let margin = args.margin.or(cfg.margin);

    let polygons = if args.polygons.is_empty() && args.diameter.is_none() {
        cfg.polygons.clone().unwrap_or_default()
    } else {
        args.polygons.clone()
    };
    let explicit = args.diameter.or(if args.polygons.is_empty() {
        cfg.diameter
    } else {
        None
    });
    ensure!(
        explicit.is_none() || polygons.is_empty(),
        "give either a diameter or polygons, not both"
    );
    let diameter = match explicit {
        Some(d) => Some(d),
        None if !polygons.is_empty() => {
            let mut all = Vec::new();
            for path in &polygons {
                all.extend(read_polygons_file(path).with_context(|| format!("{}", path.display()))?);
            }
            Some(estimate_avg_diameter(&all)?)
        }
        None => None,
    };
    if let Some(d) = diameter {
        ensure!(d.is_finite() && d > 0.0, "diameter must be positive, got {d}");
    }

    let derive = |v: Option<f64>, scale: f64, name: &str| -> Result<f64> {
        match (v, diameter) {
            (Some(v), _) => Ok(v),
            (None, Some(d)) => Ok(scale * d),
            (None, None) => bail!("{name} needs --diameter or --polygons (or an explicit --{name})"),
        }
    };
    let params = ResolvedParams {
        diameter,
        slack: derive(slack, 0.25, "slack")?,
        threshold: derive(threshold, 1.0, "threshold")?,
        margin: derive(margin, 1.0, "margin")?,
    };

    let alphas = if !args.alpha.is_empty() {
        args.alpha.clone()
    } else {
        cfg.alphas.clone().unwrap_or_else(|| vec![0.3, 1.0])
    };
    ensure!(!alphas.is_empty(), "the alpha list is empty");
    for &alpha in &alphas {
        metric_params(&params, alpha).validate()?;
    }
    Ok((params, alphas))
}

fn metric_params(p: &ResolvedParams, alpha: f64) -> MetricParams {
    MetricParams {
        slack: p.slack,
        threshold: p.threshold,
        alpha,
        edge_margin: p.margin,
    }
}

fn read_set(path: &Path) -> Result<CentroidSet> {
    read_centroids_file(path).with_context(|| format!("{}", path.display()))
}

/// One `ImageEval` per alpha; the matching does not depend on alpha.
fn evaluate(item: &Item, geometry: ImageGeometry, params: &[MetricParams]) -> Result<Vec<ImageEval>> {
    let gts = read_set(&item.gt)?;
    let preds = match &item.pred {
        Some(p) => read_set(p)?,
        None => CentroidSet::empty(),
    };
    for (set, path) in [(&gts, Some(&item.gt)), (&preds, item.pred.as_ref())] {
        if let (Some(i), Some(path)) = (set.iter().position(|p| !geometry.contains(p)), path) {
            let p = set.points()[i];
            bail!(
                "{}: line {}: centroid ({}, {}) outside the {}x{} image",
                path.display(),
                i + 2,
                p.x,
                p.y,
                geometry.width,
                geometry.height
            );
        }
    }
    let matching = solve_assignment(&distance_matrix(&preds, &gts))?;
    Ok(params
        .iter()
        .map(|p| classify(&preds, &gts, &matching, geometry, p))
        .collect())
}

fn csv_number(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn run(ctx: &Ctx, args: EvalArgs) -> Result<()> {
    let geometry = ctx.config.geometry(args.width, args.height)?;
    let (resolved, alphas) = resolve_params(ctx, &args)?;
    let params: Vec<MetricParams> = alphas.iter().map(|&a| metric_params(&resolved, a)).collect();

    let (items, orphans) = match (&args.manifest, &args.pred, &args.gt) {
        (Some(m), _, _) => (read_manifest(m)?, Vec::new()),
        (None, Some(p), Some(g)) => pair_dirs(p, g)?,
        _ => bail!("give --pred and --gt, or --manifest"),
    };
    ensure!(!items.is_empty(), "no ground-truth files to evaluate");

    let missing: Vec<&Item> = items.iter().filter(|i| i.pred.is_none()).collect();
    if !missing.is_empty() || !orphans.is_empty() {
        let mut lines: Vec<String> = missing
            .iter()
            .map(|i| format!("  no prediction for {} ({})", i.name, i.gt.display()))
            .collect();
        lines.extend(
            orphans
                .iter()
                .map(|n| format!("  no ground truth for prediction {n}")),
        );
        if args.allow_missing {
            if !ctx.quiet {
                eprintln!("warning: unpaired files\n{}", lines.join("\n"));
            }
        } else {
            bail!(
                "unpaired files (use --allow-missing to score missing predictions as all missed):\n{}",
                lines.join("\n")
            );
        }
    }

    let results: Vec<Result<Vec<ImageEval>>> = ctx.pool()?.install(|| {
        items
            .par_iter()
            .map(|item| evaluate(item, geometry, &params))
            .collect()
    });
    let per_item = inputs::collect(results)?;

    let reports: Vec<_> = (0..alphas.len())
        .map(|k| aggregate_dataset(per_item.iter().map(|evals| evals[k].clone()).collect()))
        .collect();
    let first = &reports[0];
    let per_image = if args.per_image {
        items
            .iter()
            .zip(&per_item)
            .map(|(item, evals)| ImageSummary {
                name: item.name.clone(),
                missing_prediction: item.pred.is_none(),
                kept_gt_count: evals[0].kept_gt_count,
                kept_pred_count: evals[0].kept_pred_count,
                tp: evals[0].tp,
                fp: evals[0].fp,
                fn_: evals[0].fn_,
                error_sum: evals.iter().map(|e| e.error_sum).collect(),
                pairs: evals[0]
                    .per_pair_errors
                    .iter()
                    .map(|p| PairOut {
                        pred: p.pred,
                        gt: p.gt,
                        distance: p.distance,
                    })
                    .collect(),
            })
            .collect()
    } else {
        Vec::new()
    };
    let summary = EvalSummary {
        images: items.len(),
        params: resolved,
        total_gt: first.total_gt,
        tp: first.tp,
        fp: first.fp,
        fn_: first.fn_,
        precision: first.precision,
        recall: first.recall,
        fscore: first.fscore,
        localization_error: alphas
            .iter()
            .zip(&reports)
            .map(|(&alpha, r)| AlphaValue {
                alpha,
                value: r.localization_error,
            })
            .collect(),
        per_image,
    };
    inputs::write_json(&args.output, &summary)?;

    if let Some(path) = &args.csv {
        let mut header = vec![
            "images",
            "total_gt",
            "tp",
            "fp",
            "fn",
            "precision",
            "recall",
            "fscore",
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        let mut row = vec![
            summary.images.to_string(),
            summary.total_gt.to_string(),
            summary.tp.to_string(),
            summary.fp.to_string(),
            summary.fn_.to_string(),
            summary.precision.to_string(),
            summary.recall.to_string(),
            summary.fscore.to_string(),
        ];
        for a in &summary.localization_error {
            header.push(format!("el_alpha_{}", a.alpha));
            row.push(csv_number(a.value));
        }
        inputs::write_text(path, &format!("{}\n{}\n", header.join(","), row.join(",")))?;
    }

    ctx.say(format_args!(
        "{} images, {} ground truths kept: TP {}, FP {}, FN {}",
        summary.images, summary.total_gt, summary.tp, summary.fp, summary.fn_
    ));
    ctx.say(format_args!(
        "P {:.4}  R {:.4}  F {:.4}",
        summary.precision, summary.recall, summary.fscore
    ));
    let els: Vec<String> = summary
        .localization_error
        .iter()
        .map(|a| match a.value {
            Some(v) => format!("El(alpha={}) {v:.4}", a.alpha),
            None => format!("El(alpha={}) undefined", a.alpha),
        })
        .collect();
    ctx.say(els.join("  "));
    Ok(())
}
