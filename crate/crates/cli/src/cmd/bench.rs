use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{ArgGroup, Args};
use cytoloc_core::benchmark_extraction;
use cytoloc_core::formats::read_pfm_file;

use super::{describe_extractor, GtMode, MapExtractArgs};
use crate::{inputs, Ctx};

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["fcrn", "ifcrn"])))]
pub struct BenchArgs {
    /// Time threshold + connected-component extraction.
    #[arg(long)]
    fcrn: bool,
    /// Time local-maxima extraction.
    #[arg(long)]
    ifcrn: bool,
    #[command(flatten)]
    params: MapExtractArgs,
    /// Timed passes after the warm-up pass.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Report JSON.
    #[arg(short, long)]
    output: PathBuf,
    /// PFM maps, or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

pub fn run(ctx: &Ctx, args: BenchArgs) -> Result<()> {
    let extractor = args
        .params
        .extractor(if args.fcrn { GtMode::Fcrn } else { GtMode::Ifcrn })?;
    let files = inputs::expand(&args.inputs, "pfm")?;
    let maps = files
        .iter()
        .map(|p| read_pfm_file(p).with_context(|| format!("{}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let threads = (ctx.jobs > 1).then_some(ctx.jobs);
    let report = benchmark_extraction(&maps, &extractor, args.repeats, threads)?;
    inputs::write_json(&args.output, &report)?;
    ctx.say(format_args!(
        "{} ({})",
        report.summary(),
        describe_extractor(&extractor)
    ));
    Ok(())
}
