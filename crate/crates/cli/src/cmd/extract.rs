use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{ArgGroup, Args};
use cytoloc_core::formats::{read_label_mask_file, read_pfm_file, write_centroids_file};
use cytoloc_core::mask_to_centroids;
use rayon::prelude::*;

use super::{describe_extractor, GtMode, MapExtractArgs};
use crate::{inputs, Ctx};

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["fcrn", "ifcrn", "mask"])))]
pub struct ExtractArgs {
    /// Threshold PFM maps and take component centroids.
    #[arg(long)]
    fcrn: bool,
    /// Take local maxima of PFM maps.
    #[arg(long)]
    ifcrn: bool,
    /// One centroid per label of 16-bit PGM masks.
    #[arg(long)]
    mask: bool,
    #[command(flatten)]
    params: MapExtractArgs,
    /// Output directory; defaults to each input's directory.
    #[arg(short, long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Maps or masks, or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

pub fn run(ctx: &Ctx, args: ExtractArgs) -> Result<()> {
    let extractor = match (args.fcrn, args.ifcrn) {
        (true, _) => Some(args.params.extractor(GtMode::Fcrn)?),
        (_, true) => Some(args.params.extractor(GtMode::Ifcrn)?),
        _ => None,
    };
    let files = inputs::expand(&args.inputs, if extractor.is_some() { "pfm" } else { "pgm" })?;
    let outputs = inputs::output_paths(&files, args.out_dir.as_deref(), "csv")?;

    let results: Vec<Result<usize>> = ctx.pool()?.install(|| {
        files
            .par_iter()
            .zip(&outputs)
            .map(|(input, output)| {
                let at_input = || format!("{}", input.display());
                let centroids = match &extractor {
                    Some(e) => e.extract(&read_pfm_file(input).with_context(at_input)?)?,
                    None => mask_to_centroids(&read_label_mask_file(input).with_context(at_input)?),
                };
                write_centroids_file(output, &centroids).with_context(|| format!("{}", output.display()))?;
                Ok(centroids.len())
            })
            .collect()
    });
    let counts = inputs::collect(results)?;
    let how = extractor
        .as_ref()
        .map_or_else(|| "label masks".to_string(), describe_extractor);
    ctx.say(format_args!(
        "extracted {} centroids from {} inputs ({how})",
        counts.iter().sum::<usize>(),
        counts.len()
    ));
    Ok(())
}
