use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use cytoloc_core::formats::{write_centroids_file, write_pfm_file};
use cytoloc_core::synth::rng_from_seed;
use cytoloc_core::{generate_scene, perturb, PerturbParams, SceneParams};
use rand::Rng;
use rayon::prelude::*;

use super::{GtMode, RenderArgs};
use crate::Ctx;

#[derive(Args)]
pub struct SynthArgs {
    /// Number of scenes.
    #[arg(long, default_value_t = 1)]
    scenes: usize,
    /// Centroids per scene.
    #[arg(long)]
    points: usize,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Minimum distance between centroids.
    #[arg(long, default_value_t = 24.0)]
    separation: f64,
    /// Minimum distance from the image border.
    #[arg(long, default_value_t = 0.0)]
    edge_buffer: f64,
    /// Also write a rendered map per scene to maps/.
    #[arg(long, value_enum, value_name = "MODE")]
    render: Option<GtMode>,
    #[command(flatten)]
    render_params: RenderArgs,
    /// Gaussian jitter of simulated predictions, in pixels.
    #[arg(long)]
    jitter: Option<f64>,
    /// Probability of dropping each centroid from the predictions.
    #[arg(long)]
    drop: Option<f64>,
    /// Expected spurious predictions per centroid.
    #[arg(long)]
    spurious: Option<f64>,
    /// Output directory; scenes go to gt/, predictions to pred/.
    #[arg(short, long, value_name = "DIR")]
    out_dir: PathBuf,
}

pub fn run(ctx: &Ctx, args: SynthArgs) -> Result<()> {
    let geometry = ctx.config.geometry(args.width, args.height)?;
    let renderer = args
        .render
        .map(|mode| args.render_params.resolve(mode, &ctx.config))
        .transpose()?;
    let perturbation =
        (args.jitter.is_some() || args.drop.is_some() || args.spurious.is_some()).then(|| PerturbParams {
            jitter_sigma: args.jitter.unwrap_or(0.0),
            drop_rate: args.drop.unwrap_or(0.0),
            spurious_rate: args.spurious.unwrap_or(0.0),
            seed: 0,
        });

    let gt_dir = args.out_dir.join("gt");
    let pred_dir = args.out_dir.join("pred");
    let map_dir = args.out_dir.join("maps");
    let mut dirs = vec![&gt_dir];
    if perturbation.is_some() {
        dirs.push(&pred_dir);
    }
    if renderer.is_some() {
        dirs.push(&map_dir);
    }
    for d in dirs {
        fs::create_dir_all(d).with_context(|| format!("{}", d.display()))?;
    }

    // Per-scene seeds are drawn up front so output does not depend on --jobs.
    let mut rng = rng_from_seed(ctx.seed);
    let seeds: Vec<(u64, u64)> = (0..args.scenes).map(|_| (rng.random(), rng.random())).collect();
    let digits = args.scenes.saturating_sub(1).to_string().len().max(3);

    let results: Vec<Result<usize>> = ctx.pool()?.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(i, &(scene_seed, perturb_seed))| {
                let name = format!("scene_{i:0digits$}");
                let scene = generate_scene(&SceneParams {
                    n: args.points,
                    geometry,
                    min_separation: args.separation,
                    edge_buffer: args.edge_buffer,
                    seed: scene_seed,
                })
                .with_context(|| name.clone())?;
                let path = gt_dir.join(format!("{name}.csv"));
                write_centroids_file(&path, &scene).with_context(|| format!("{}", path.display()))?;
                if let Some(p) = &perturbation {
                    let preds = perturb(
                        &scene,
                        geometry,
                        &PerturbParams {
                            seed: perturb_seed,
                            ..*p
                        },
                    )?;
                    let path = pred_dir.join(format!("{name}.csv"));
                    write_centroids_file(&path, &preds).with_context(|| format!("{}", path.display()))?;
                }
                if let Some(r) = &renderer {
                    let path = map_dir.join(format!("{name}.pfm"));
                    write_pfm_file(&path, &r.render(&scene, geometry)?)
                        .with_context(|| format!("{}", path.display()))?;
                }
                Ok(scene.len())
            })
            .collect()
    });
    let counts = crate::inputs::collect(results)?;
    ctx.say(format_args!(
        "wrote {} scenes ({} centroids, {}x{}, seed {}) to {}",
        counts.len(),
        counts.iter().sum::<usize>(),
        geometry.width,
        geometry.height,
        ctx.seed,
        args.out_dir.display()
    ));
    Ok(())
}
