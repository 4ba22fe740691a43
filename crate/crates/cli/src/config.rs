use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cytoloc_core::{FcrnGtParams, IfcrnGtParams, ImageGeometry};
use serde::Deserialize;

/// Optional defaults read from `--config`. Every field can also be given
/// on the command line, which wins.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    /// Average nucleus diameter in pixels.
    pub diameter: Option<f64>,
    /// Polygon JSON files to estimate the diameter from.
    pub polygons: Option<Vec<PathBuf>>,
    pub slack: Option<f64>,
    pub threshold: Option<f64>,
    pub margin: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub fcrn: Option<FcrnGtParams>,
    pub ifcrn: Option<IfcrnGtParams>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).with_context(|| format!("{}", path.display()))?;
        serde_json::from_reader(BufReader::new(file)).with_context(|| format!("{}", path.display()))
    }

    pub fn geometry(&self, width: Option<usize>, height: Option<usize>) -> Result<ImageGeometry> {
        let Some(w) = width.or(self.width) else {
            bail!("image width is required (--width or \"width\" in the config)");
        };
        let Some(h) = height.or(self.height) else {
            bail!("image height is required (--height or \"height\" in the config)");
        };
        Ok(ImageGeometry::new(w, h)?)
    }
}
