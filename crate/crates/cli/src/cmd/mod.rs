pub mod bench;
pub mod eval;
pub mod extract;
pub mod gengt;
pub mod plot;
pub mod synth;
pub mod xval;

use anyhow::{anyhow, bail, Result};
use clap::{Args, ValueEnum};
use cytoloc_core::{
    render_fcrn_gt, render_ifcrn_gt, CentroidSet, Connectivity, DensityMap, Error, Extractor, FcrnGtParams,
    IfcrnGtParams, ImageGeometry, MaximaExtractParams, ThresholdExtractParams,
};

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GtMode {
    Fcrn,
    Ifcrn,
}

/// Rendering flags shared by `gengt` and `synth`.
#[derive(Args, Debug, Clone)]
pub struct RenderArgs {
    /// Disk radius in pixels for the FCRN target.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Gaussian sigma; for IFCRN it is measured on the downsampled grid.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// IFCRN downsampling factor [default: 4].
    #[arg(long)]
    pub factor: Option<usize>,
}

pub enum Renderer {
    Fcrn(FcrnGtParams),
    Ifcrn(IfcrnGtParams),
}

impl RenderArgs {
    pub fn resolve(&self, mode: GtMode, config: &RunConfig) -> Result<Renderer> {
        match mode {
            GtMode::Fcrn => {
                let base = config.fcrn;
                let radius = self.radius.or(base.map(|p| p.dilation_radius));
                let sigma = self.sigma.or(base.map(|p| p.sigma));
                let (Some(dilation_radius), Some(sigma)) = (radius, sigma) else {
                    bail!("FCRN targets need --radius and --sigma (or \"fcrn\" in the config)");
                };
                let p = FcrnGtParams {
                    dilation_radius,
                    sigma,
                };
                p.validate()?;
                Ok(Renderer::Fcrn(p))
            }
            GtMode::Ifcrn => {
                let base = config.ifcrn.unwrap_or_default();
                let p = IfcrnGtParams {
                    sigma: self.sigma.unwrap_or(base.sigma),
                    downsample_factor: self.factor.unwrap_or(base.downsample_factor),
                };
                p.validate()?;
                Ok(Renderer::Ifcrn(p))
            }
        }
    }
}

impl Renderer {
    /// Renders, naming out-of-bounds centroids by CSV line.
    pub fn render(&self, centroids: &CentroidSet, geometry: ImageGeometry) -> Result<DensityMap> {
        let out = match self {
            Renderer::Fcrn(p) => render_fcrn_gt(centroids, geometry, p),
            Renderer::Ifcrn(p) => render_ifcrn_gt(centroids, geometry, p),
        };
        out.map_err(|e| match e {
            Error::OutOfBounds {
                width,
                height,
                indices,
            } => {
                const SHOWN: usize = 5;
                let mut rows: Vec<String> = indices
                    .iter()
                    .take(SHOWN)
                    .map(|&i| {
                        let p = centroids.points()[i];
                        format!("line {} ({}, {})", i + 2, p.x, p.y)
                    })
                    .collect();
                if indices.len() > SHOWN {
                    rows.push(format!("and {} more", indices.len() - SHOWN));
                }
                anyhow!(
                    "centroid outside the {width}x{height} image at {}",
                    rows.join(", ")
                )
            }
            other => other.into(),
        })
    }

    pub fn describe(&self) -> String {
        match self {
            Renderer::Fcrn(p) => format!("fcrn, radius {}, sigma {}", p.dilation_radius, p.sigma),
            Renderer::Ifcrn(p) => format!("ifcrn, sigma {}, factor {}", p.sigma, p.downsample_factor),
        }
    }
}

fn parse_connectivity(s: &str) -> Result<Connectivity, String> {
    let n: u8 = s.parse().map_err(|_| format!("expected 4 or 8, got `{s}`"))?;
    Connectivity::try_from(n).map_err(|e| e.to_string())
}

/// Density-map extraction flags shared by `extract` and `bench`.
#[derive(Args, Debug, Clone)]
pub struct MapExtractArgs {
    /// Foreground threshold for --fcrn.
    #[arg(short = 'T', long, default_value_t = ThresholdExtractParams::CNSEG_THRESHOLD)]
    pub threshold: f64,
    /// Pixel connectivity for --fcrn components (4 or 8).
    #[arg(long, default_value = "8", value_parser = parse_connectivity)]
    pub connectivity: Connectivity,
    /// Smallest component kept by --fcrn, in pixels.
    #[arg(long, default_value_t = 1)]
    pub min_area: usize,
    /// Minimum peak height for --ifcrn.
    #[arg(short = 'H', long, default_value_t = MaximaExtractParams::TUNED_HEIGHT)]
    pub min_height: f64,
    /// Map-to-image scale for --ifcrn coordinates.
    #[arg(long, default_value_t = 4)]
    pub scale: usize,
}

impl MapExtractArgs {
    pub fn extractor(&self, mode: GtMode) -> Result<Extractor> {
        let e = match mode {
            GtMode::Fcrn => Extractor::ThresholdCc(ThresholdExtractParams {
                threshold: self.threshold,
                connectivity: self.connectivity,
                min_component_area: self.min_area,
            }),
            GtMode::Ifcrn => Extractor::LocalMaxima(MaximaExtractParams::new(self.min_height, self.scale)),
        };
        e.validate()?;
        Ok(e)
    }
}

pub fn describe_extractor(e: &Extractor) -> String {
    match e {
        Extractor::ThresholdCc(p) => format!("threshold {}", p.threshold),
        Extractor::LocalMaxima(p) => format!("maxima height {}, scale {}", p.height, p.scale_factor),
    }
}
