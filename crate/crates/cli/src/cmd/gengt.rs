use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{ArgGroup, Args};
use cytoloc_core::formats::{read_centroids_file, write_pfm_file};
use rayon::prelude::*;

use super::{GtMode, RenderArgs};
use crate::{inputs, Ctx};

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["fcrn", "ifcrn"])))]
pub struct GengtArgs {
    /// Dilated disk, blurred (threshold extraction).
    #[arg(long)]
    fcrn: bool,
    /// Peak-one Gaussians on a downsampled grid (maxima extraction).
    #[arg(long)]
    ifcrn: bool,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[command(flatten)]
    render: RenderArgs,
    /// Output directory; defaults to each input's directory.
    #[arg(short, long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Centroid CSVs, or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

pub fn run(ctx: &Ctx, args: GengtArgs) -> Result<()> {
    let mode = if args.fcrn { GtMode::Fcrn } else { GtMode::Ifcrn };
    let renderer = args.render.resolve(mode, &ctx.config)?;
    let geometry = ctx.config.geometry(args.width, args.height)?;
    let files = inputs::expand(&args.inputs, "csv")?;
    let outputs = inputs::output_paths(&files, args.out_dir.as_deref(), "pfm")?;

    let results: Vec<Result<usize>> = ctx.pool()?.install(|| {
        files
            .par_iter()
            .zip(&outputs)
            .map(|(input, output)| {
                let centroids = read_centroids_file(input).with_context(|| format!("{}", input.display()))?;
                let map = renderer
                    .render(&centroids, geometry)
                    .with_context(|| format!("{}", input.display()))?;
                write_pfm_file(output, &map).with_context(|| format!("{}", output.display()))?;
                Ok(centroids.len())
            })
            .collect()
    });
    let counts = inputs::collect(results)?;
    ctx.say(format_args!(
        "rendered {} maps ({} centroids, {}x{}, {})",
        counts.len(),
        counts.iter().sum::<usize>(),
        geometry.width,
        geometry.height,
        renderer.describe()
    ));
    Ok(())
}
