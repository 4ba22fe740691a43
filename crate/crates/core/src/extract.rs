//! Turning rasters into centroid sets.
//!
//! Three front doors, one per kind of model output:
//!
//! * [`extract_threshold_cc`] for regression maps read with a global
//!   threshold (foreground is `value >= T`) and connected components;
//! * [`extract_local_maxima`] for maps read at local maxima above a minimum
//!   height, optionally on a downsampled grid;
//! * [`mask_to_centroids`] for instance label masks from segmentation models.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::density::{to_full_resolution, DensityMap};
use crate::error::{Error, Result};
use crate::geometry::{CentroidSet, ImageGeometry, Point2D};

/// Pixel neighborhood used for components and maxima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Connectivity {
    #[serde(rename = "4")]
    Four,
    #[default]
    #[serde(rename = "8")]
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(i64, i64)] {
        const FOUR: [(i64, i64); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(i64, i64); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            _ => Err(Error::Parameter(format!("connectivity must be 4 or 8, got {n}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdExtractParams {
    pub threshold: f64,
    #[serde(default)]
    pub connectivity: Connectivity,
    #[serde(default = "default_min_area")]
    pub min_component_area: usize,
}

fn default_min_area() -> usize {
    1
}

impl ThresholdExtractParams {
    /// Operating point tuned on the cervical-cell (CNSeg) validation data.
    pub const CNSEG_THRESHOLD: f64 = 0.58;
    /// Operating point tuned on the oral-cancer validation data.
    pub const OC_THRESHOLD: f64 = 0.65;

    pub fn new(threshold: f64) -> Self {
        Self {
            threshold,
            connectivity: Connectivity::Eight,
            min_component_area: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Parameter(format!(
                "threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        if self.min_component_area < 1 {
            return Err(Error::Parameter("min_component_area must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for ThresholdExtractParams {
    fn default() -> Self {
        Self::new(Self::CNSEG_THRESHOLD)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximaExtractParams {
    pub height: f64,
    /// Upscale factor from the map grid back to full resolution.
    #[serde(default = "default_scale_factor")]
    pub scale_factor: usize,
}

fn default_scale_factor() -> usize {
    4
}

impl MaximaExtractParams {
    pub const TUNED_HEIGHT: f64 = 0.4;

    pub fn new(height: f64, scale_factor: usize) -> Self {
        Self { height, scale_factor }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.height > 0.0 && self.height <= 1.0) {
            return Err(Error::Parameter(format!(
                "maxima height must lie in (0, 1], got {}",
                self.height
            )));
        }
        if self.scale_factor < 1 {
            return Err(Error::Parameter("scale factor must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for MaximaExtractParams {
    fn default() -> Self {
        Self::new(Self::TUNED_HEIGHT, default_scale_factor())
    }
}

/// Flood-fills 'member' pixels into components, seeding in raster order.
/// `joins(a, b)` decides whether neighboring member pixels belong together.
/// Returns, per component, the pixel-mean position and pixel count.
fn components(
    width: usize,
    height: usize,
    connectivity: Connectivity,
    member: impl Fn(usize) -> bool,
    joins: impl Fn(usize, usize) -> bool,
) -> Vec<(Point2D, usize)> {
    let (w, h) = (width as i64, height as i64);
    let mut seen = vec![false; width * height];
    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    for start in 0..width * height {
        if seen[start] || !member(start) {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let (mut sx, mut sy, mut n) = (0u64, 0u64, 0usize);
        while let Some(k) = queue.pop_front() {
            let (x, y) = ((k % width) as i64, (k / width) as i64);
            sx += x as u64;
            sy += y as u64;
            n += 1;
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let nk = (ny * w + nx) as usize;
                if !seen[nk] && member(nk) && joins(k, nk) {
                    seen[nk] = true;
                    queue.push_back(nk);
                }
            }
        }
        out.push((Point2D::new(sx as f64 / n as f64, sy as f64 / n as f64), n));
    }
    out
}

/// Global threshold, connected components, pixel-mean centroid per component.
///
/// Components are emitted in raster order of their first pixel.
pub fn extract_threshold_cc(map: &DensityMap, params: &ThresholdExtractParams) -> Result<CentroidSet> {
    params.validate()?;
    let values = map.values();
    let t = params.threshold;
    let found = components(
        map.width(),
        map.height(),
        params.connectivity,
        |k| f64::from(values[k]) >= t,
        |_, _| true,
    );
    Ok(CentroidSet::from_finite(
        found
            .into_iter()
            .filter(|&(_, n)| n >= params.min_component_area)
            .map(|(p, _)| p)
            .collect(),
    ))
}

/// Local maxima of height at least `h`, mapped back to full resolution.
///
/// A pixel qualifies when its value is `>= h` and `>=` each of its eight
/// neighbors. Qualifying pixels that touch and share the same value form a
/// plateau and produce a single detection at the plateau's pixel mean.
pub fn extract_local_maxima(map: &DensityMap, params: &MaximaExtractParams) -> Result<CentroidSet> {
    params.validate()?;
    let (w, h) = (map.width() as i64, map.height() as i64);
    let values = map.values();
    let floor = params.height;

    let candidate: Vec<bool> = (0..values.len())
        .map(|k| {
            let v = values[k];
            if f64::from(v) < floor {
                return false;
            }
            let (x, y) = (k as i64 % w, k as i64 / w);
            Connectivity::Eight.offsets().iter().all(|&(dx, dy)| {
                let (nx, ny) = (x + dx, y + dy);
                nx < 0 || ny < 0 || nx >= w || ny >= h || v >= values[(ny * w + nx) as usize]
            })
        })
        .collect();

    let found = components(
        map.width(),
        map.height(),
        Connectivity::Eight,
        |k| candidate[k],
        |a, b| values[a] == values[b],
    );
    let f = params.scale_factor;
    Ok(CentroidSet::from_finite(
        found
            .into_iter()
            .map(|(p, _)| Point2D::new(to_full_resolution(p.x, f), to_full_resolution(p.y, f)))
            .collect(),
    ))
}

/// Instance label raster; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    geometry: ImageGeometry,
    labels: Vec<u16>,
}

impl LabelMask {
    pub fn new(geometry: ImageGeometry, labels: Vec<u16>) -> Result<Self> {
        if labels.len() != geometry.pixel_count() {
            return Err(Error::Input(format!(
                "{}x{} mask needs {} labels, got {}",
                geometry.width,
                geometry.height,
                geometry.pixel_count(),
                labels.len()
            )));
        }
        Ok(Self { geometry, labels })
    }

    pub fn geometry(&self) -> ImageGeometry {
        self.geometry
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.labels[y * self.geometry.width + x]
    }

    /// Number of distinct nonzero labels.
    pub fn instance_count(&self) -> usize {
        let mut present = vec![false; usize::from(u16::MAX) + 1];
        for &l in &self.labels {
            present[usize::from(l)] = true;
        }
        present[1..].iter().filter(|&&p| p).count()
    }
}

/// Pixel-mean centroid of every nonzero label, in ascending label order.
pub fn mask_to_centroids(mask: &LabelMask) -> CentroidSet {
    let mut sums: BTreeMap<u16, (u64, u64, u64)> = BTreeMap::new();
    let w = mask.geometry.width;
    for (k, &label) in mask.labels.iter().enumerate() {
        if label == 0 {
            continue;
        }
        let e = sums.entry(label).or_default();
        e.0 += (k % w) as u64;
        e.1 += (k / w) as u64;
        e.2 += 1;
    }
    CentroidSet::from_finite(
        sums.values()
            .map(|&(sx, sy, n)| Point2D::new(sx as f64 / n as f64, sy as f64 / n as f64))
            .collect(),
    )
}
