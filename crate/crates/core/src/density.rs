//! Density rasters and the fuzzy ground-truth renderers.
//!
//! Two renderings are provided:
//!
//! * [`render_fcrn_gt`]: binary centroid mask, disk dilation, then a
//!   sum-normalized Gaussian blur. Values stay in `[0, 1]`, and a global
//!   threshold on the result recovers one blob per nucleus.
//! * [`render_ifcrn_gt`]: one peak-normalized Gaussian per nucleus on a
//!   downsampled grid, composed with an elementwise maximum, so every
//!   isolated nucleus yields a peak of exactly 1.
//!
//! Gaussian kernels are truncated at `ceil(3 sigma)` and borders are
//! zero-padded throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CentroidSet, ImageGeometry, Point2D};

/// Single-channel float raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    geometry: ImageGeometry,
    values: Vec<f32>,
}

impl DensityMap {
    pub fn zeros(geometry: ImageGeometry) -> Self {
        Self {
            geometry,
            values: vec![0.0; geometry.pixel_count()],
        }
    }

    pub fn from_values(geometry: ImageGeometry, values: Vec<f32>) -> Result<Self> {
        if values.len() != geometry.pixel_count() {
            return Err(Error::Input(format!(
                "{}x{} map needs {} values, got {}",
                geometry.width,
                geometry.height,
                geometry.pixel_count(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite value at pixel {k}")));
        }
        Ok(Self { geometry, values })
    }

    pub fn from_fn(geometry: ImageGeometry, mut f: impl FnMut(usize, usize) -> f32) -> Result<Self> {
        let mut values = Vec::with_capacity(geometry.pixel_count());
        for y in 0..geometry.height {
            for x in 0..geometry.width {
                values.push(f(x, y));
            }
        }
        Self::from_values(geometry, values)
    }

    pub fn geometry(&self) -> ImageGeometry {
        self.geometry
    }

    pub fn width(&self) -> usize {
        self.geometry.width
    }

    pub fn height(&self) -> usize {
        self.geometry.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.geometry.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f32) {
        assert!(value.is_finite(), "density values must be finite");
        let w = self.geometry.width;
        self.values[y * w + x] = value;
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().map(|&v| f64::from(v)).sum()
    }

    /// Largest value and its `(x, y)` position; the first in raster order on ties.
    pub fn argmax(&self) -> (usize, usize, f32) {
        let mut best = (0, self.values[0]);
        for (k, &v) in self.values.iter().enumerate() {
            if v > best.1 {
                best = (k, v);
            }
        }
        (best.0 % self.width(), best.0 / self.width(), best.1)
    }
}

/// How a Gaussian kernel is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelNormalization {
    /// The 2D kernel sums to 1 (mass preserving).
    SumOne,
    /// The 2D kernel's center tap is 1.
    PeakOne,
}

/// Truncation radius for a Gaussian of the given sigma.
pub fn kernel_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil() as usize
}

/// One-dimensional taps `exp(-k^2 / (2 sigma^2))` for `k` in `-R..=R`.
///
/// With [`KernelNormalization::SumOne`] the 1D taps sum to 1 (so the outer
/// product does too); with [`KernelNormalization::PeakOne`] the center tap is
/// 1 (so the 2D center is too).
pub fn gaussian_kernel(sigma: f64, normalization: KernelNormalization) -> Result<Vec<f64>> {
    check_sigma(sigma)?;
    let radius = kernel_radius(sigma) as i64;
    let denom = 2.0 * sigma * sigma;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / denom).exp())
        .collect();
    if normalization == KernelNormalization::SumOne {
        let total: f64 = taps.iter().sum();
        taps.iter_mut().for_each(|t| *t /= total);
    }
    Ok(taps)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

/// Separable Gaussian convolution with zero-padded borders.
pub fn gaussian_blur(map: &DensityMap, sigma: f64, normalization: KernelNormalization) -> Result<DensityMap> {
    let taps = gaussian_kernel(sigma, normalization)?;
    let radius = taps.len() / 2;
    let (w, h) = (map.width(), map.height());

    // Horizontal pass into an f64 buffer.
    let mut horiz = vec![0.0f64; w * h];
    for y in 0..h {
        let row = &map.values[y * w..(y + 1) * w];
        let out = &mut horiz[y * w..(y + 1) * w];
        for (x, o) in out.iter_mut().enumerate() {
            let lo = x.saturating_sub(radius);
            let hi = (x + radius).min(w - 1);
            *o = row[lo..=hi]
                .iter()
                .zip(&taps[lo + radius - x..])
                .map(|(&v, &t)| t * f64::from(v))
                .sum();
        }
    }

    // Vertical pass.
    let mut values = vec![0.0f32; w * h];
    for y in 0..h {
        let lo = y.saturating_sub(radius);
        let hi = (y + radius).min(h - 1);
        let out = &mut values[y * w..(y + 1) * w];
        let mut acc = vec![0.0f64; w];
        for sy in lo..=hi {
            let t = taps[sy + radius - y];
            for (a, &v) in acc.iter_mut().zip(&horiz[sy * w..(sy + 1) * w]) {
                *a += t * v;
            }
        }
        for (o, a) in out.iter_mut().zip(acc) {
            *o = a as f32;
        }
    }

    Ok(DensityMap {
        geometry: map.geometry,
        values,
    })
}

/// Integer offsets of the discrete disk `dx^2 + dy^2 <= r^2`.
pub fn disk_offsets(radius: f64) -> Vec<(i64, i64)> {
    let r = radius.max(0.0);
    let reach = r.floor() as i64;
    let r2 = r * r;
    let mut out = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            if ((dx * dx + dy * dy) as f64) <= r2 {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Binary dilation with the discrete disk of the given radius.
///
/// Any nonzero input pixel counts as foreground; output values are 0 or 1.
pub fn dilate_disk(mask: &DensityMap, radius: f64) -> Result<DensityMap> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::Parameter(format!(
            "dilation radius must be >= 0, got {radius}"
        )));
    }
    let offsets = disk_offsets(radius);
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut out = DensityMap::zeros(mask.geometry);
    for y in 0..h {
        for x in 0..w {
            if mask.values[(y * w + x) as usize] == 0.0 {
                continue;
            }
            for &(dx, dy) in &offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx >= 0 && ny >= 0 && nx < w && ny < h {
                    out.values[(ny * w + nx) as usize] = 1.0;
                }
            }
        }
    }
    Ok(out)
}

/// Block-mean downsampling by an integer factor.
///
/// Sizes that are not multiples of `factor` are zero-padded up to the next
/// multiple; the output geometry is `ceil(width / factor) x ceil(height / factor)`.
pub fn downsample(map: &DensityMap, factor: usize) -> Result<DensityMap> {
    if factor < 1 {
        return Err(Error::Parameter("downsample factor must be >= 1".into()));
    }
    if factor == 1 {
        return Ok(map.clone());
    }
    let geometry = downsampled_geometry(map.geometry, factor);
    let mut sums = vec![0.0f64; geometry.pixel_count()];
    for y in 0..map.height() {
        for x in 0..map.width() {
            sums[(y / factor) * geometry.width + x / factor] += f64::from(map.get(x, y));
        }
    }
    let norm = (factor * factor) as f64;
    Ok(DensityMap {
        geometry,
        values: sums.into_iter().map(|s| (s / norm) as f32).collect(),
    })
}

pub fn downsampled_geometry(geometry: ImageGeometry, factor: usize) -> ImageGeometry {
    ImageGeometry {
        width: geometry.width.div_ceil(factor),
        height: geometry.height.div_ceil(factor),
    }
}

/// Full-resolution coordinate to block-center-aligned downsampled coordinate.
pub fn to_downsampled(coord: f64, factor: usize) -> f64 {
    (coord + 0.5) / factor as f64 - 0.5
}

/// Inverse of [`to_downsampled`].
pub fn to_full_resolution(coord: f64, factor: usize) -> f64 {
    factor as f64 * (coord + 0.5) - 0.5
}

/// Nearest pixel index; halves round up so `-0.5` maps to pixel 0.
fn nearest_pixel(coord: f64) -> i64 {
    (coord + 0.5).floor() as i64
}

fn check_in_bounds(centroids: &CentroidSet, geometry: ImageGeometry) -> Result<()> {
    let indices: Vec<usize> = centroids
        .iter()
        .enumerate()
        .filter(|(_, p)| !geometry.contains(p))
        .map(|(i, _)| i)
        .collect();
    if indices.is_empty() {
        Ok(())
    } else {
        Err(Error::OutOfBounds {
            width: geometry.width,
            height: geometry.height,
            indices,
        })
    }
}

/// Parameters of the dilate-then-blur ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcrnGtParams {
    /// Disk radius in pixels. No default: there is no canonical value.
    pub dilation_radius: f64,
    pub sigma: f64,
}

impl FcrnGtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dilation_radius.is_finite() && self.dilation_radius >= 0.0) {
            return Err(Error::Parameter(format!(
                "dilation radius must be >= 0, got {}",
                self.dilation_radius
            )));
        }
        check_sigma(self.sigma)
    }
}

/// Parameters of the blur-only, downsampled ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfcrnGtParams {
    /// Gaussian sigma in output-grid (downsampled) pixels.
    pub sigma: f64,
    pub downsample_factor: usize,
}

impl Default for IfcrnGtParams {
    fn default() -> Self {
        Self {
            sigma: 3.0,
            downsample_factor: 4,
        }
    }
}

impl IfcrnGtParams {
    pub fn validate(&self) -> Result<()> {
        check_sigma(self.sigma)?;
        if self.downsample_factor < 1 {
            return Err(Error::Parameter("downsample factor must be >= 1".into()));
        }
        Ok(())
    }
}

/// Mask with a 1 at every rounded centroid, dilated by a disk and blurred
/// with a sum-one Gaussian.
pub fn render_fcrn_gt(
    centroids: &CentroidSet,
    geometry: ImageGeometry,
    params: &FcrnGtParams,
) -> Result<DensityMap> {
    params.validate()?;
    check_in_bounds(centroids, geometry)?;
    let mut mask = DensityMap::zeros(geometry);
    for p in centroids {
        let (x, y) = (nearest_pixel(p.x) as usize, nearest_pixel(p.y) as usize);
        mask.values[y * geometry.width + x] = 1.0;
    }
    let dilated = dilate_disk(&mask, params.dilation_radius)?;
    let mut out = gaussian_blur(&dilated, params.sigma, KernelNormalization::SumOne)?;
    // Kernel sums can land a rounding step above 1.
    out.values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    Ok(out)
}

/// Downsampled grid position of a full-resolution centroid.
pub fn grid_position(p: &Point2D, factor: usize) -> (i64, i64) {
    (
        nearest_pixel(to_downsampled(p.x, factor)),
        nearest_pixel(to_downsampled(p.y, factor)),
    )
}

/// One peak-one Gaussian per centroid on the downsampled grid, composed by
/// elementwise maximum.
pub fn render_ifcrn_gt(
    centroids: &CentroidSet,
    geometry: ImageGeometry,
    params: &IfcrnGtParams,
) -> Result<DensityMap> {
    params.validate()?;
    check_in_bounds(centroids, geometry)?;
    let grid = downsampled_geometry(geometry, params.downsample_factor);
    let stamp = gaussian_kernel(params.sigma, KernelNormalization::PeakOne)?;
    let radius = (stamp.len() / 2) as i64;
    let (w, h) = (grid.width as i64, grid.height as i64);

    let mut out = DensityMap::zeros(grid);
    for p in centroids {
        let (cx, cy) = grid_position(p, params.downsample_factor);
        for dy in -radius..=radius {
            let y = cy + dy;
            if y < 0 || y >= h {
                continue;
            }
            let ty = stamp[(dy + radius) as usize];
            for dx in -radius..=radius {
                let x = cx + dx;
                if x < 0 || x >= w {
                    continue;
                }
                let v = (ty * stamp[(dx + radius) as usize]) as f32;
                let cell = &mut out.values[(y * w + x) as usize];
                if v > *cell {
                    *cell = v;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(w: usize, h: usize) -> ImageGeometry {
        ImageGeometry::new(w, h).unwrap()
    }

    fn impulse(g: ImageGeometry, x: usize, y: usize) -> DensityMap {
        let mut m = DensityMap::zeros(g);
        m.set(x, y, 1.0);
        m
    }

    fn pts(coords: &[(f64, f64)]) -> CentroidSet {
        CentroidSet::new(coords.iter().map(|&(x, y)| Point2D::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn blur_of_zeros_is_zero() {
        let out = gaussian_blur(&DensityMap::zeros(geom(20, 10)), 2.0, KernelNormalization::SumOne).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn peak_one_impulse_keeps_unit_center() {
        let out = gaussian_blur(&impulse(geom(31, 31), 15, 15), 3.0, KernelNormalization::PeakOne).unwrap();
        assert_eq!(out.get(15, 15), 1.0);
        assert_eq!(out.argmax(), (15, 15, 1.0));
    }

    #[test]
    fn sum_one_preserves_interior_constant() {
        let g = geom(40, 40);
        let ones = DensityMap::from_fn(g, |_, _| 1.0).unwrap();
        let out = gaussian_blur(&ones, 2.5, KernelNormalization::SumOne).unwrap();
        let r = kernel_radius(2.5);
        for y in r..40 - r {
            for x in r..40 - r {
                assert!((out.get(x, y) - 1.0).abs() <= 1e-6, "{}", out.get(x, y));
            }
        }
        // Zero padding loses mass at the border.
        assert!(out.get(0, 0) < 0.5);
    }

    #[test]
    fn bad_sigma() {
        let m = DensityMap::zeros(geom(4, 4));
        assert!(matches!(
            gaussian_blur(&m, 0.0, KernelNormalization::SumOne),
            Err(Error::Parameter(_))
        ));
        assert!(gaussian_blur(&m, -1.0, KernelNormalization::PeakOne).is_err());
    }

    #[test]
    fn dilation_radius_zero_is_identity() {
        let m = impulse(geom(8, 8), 3, 4);
        assert_eq!(dilate_disk(&m, 0.0).unwrap(), m);
    }

    #[test]
    fn dilation_radius_two_has_thirteen_pixels() {
        // Integer points with dx^2 + dy^2 <= 4: 1 + 4 (axis 1) + 4 (diag) + 4 (axis 2) = 13.
        let out = dilate_disk(&impulse(geom(21, 21), 10, 10), 2.0).unwrap();
        assert_eq!(out.sum(), 13.0);
        assert_eq!(out.get(12, 10), 1.0);
        assert_eq!(out.get(11, 11), 1.0);
        assert_eq!(out.get(12, 11), 0.0);
    }

    #[test]
    fn dilating_empty_mask() {
        let m = DensityMap::zeros(geom(5, 5));
        assert_eq!(dilate_disk(&m, 3.0).unwrap(), m);
    }

    #[test]
    fn downsample_examples() {
        let m = DensityMap::from_fn(geom(4, 4), |x, y| (x + y) as f32).unwrap();
        assert_eq!(downsample(&m, 1).unwrap(), m);

        let c = DensityMap::from_fn(geom(4, 4), |_, _| 0.7).unwrap();
        let d = downsample(&c, 4).unwrap();
        assert_eq!(d.geometry(), geom(1, 1));
        assert!((d.get(0, 0) - 0.7).abs() < 1e-7);

        let d = downsample(&impulse(geom(4, 4), 1, 2), 4).unwrap();
        assert_eq!(d.get(0, 0), 1.0 / 16.0);

        assert!(matches!(downsample(&m, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn downsample_pads_ragged_sizes() {
        let ones = DensityMap::from_fn(geom(5, 3), |_, _| 1.0).unwrap();
        let d = downsample(&ones, 2).unwrap();
        assert_eq!(d.geometry(), geom(3, 2));
        assert_eq!(d.get(0, 0), 1.0);
        assert_eq!(d.get(2, 0), 0.5);
        assert_eq!(d.get(2, 1), 0.25);
    }

    #[test]
    fn coordinate_mapping_round_trips() {
        for f in 1..6 {
            for k in -3..20 {
                let x = k as f64 * 0.37;
                assert!((to_full_resolution(to_downsampled(x, f), f) - x).abs() < 1e-12);
            }
        }
        assert_eq!(to_downsampled(32.0, 4), 7.625);
    }

    #[test]
    fn fcrn_empty_is_zero() {
        let params = FcrnGtParams {
            dilation_radius: 3.0,
            sigma: 2.0,
        };
        let out = render_fcrn_gt(&CentroidSet::empty(), geom(32, 32), &params).unwrap();
        assert_eq!(out.sum(), 0.0);
    }

    #[test]
    fn fcrn_single_centroid_conserves_disk_mass() {
        for &(r, sigma) in &[(0.0, 1.0), (2.0, 1.5), (4.0, 3.0), (5.5, 2.0)] {
            let params = FcrnGtParams {
                dilation_radius: r,
                sigma,
            };
            let out = render_fcrn_gt(&pts(&[(32.2, 31.8)]), geom(64, 64), &params).unwrap();
            let disk = disk_offsets(r).len() as f64;
            assert!(
                (out.sum() - disk).abs() < 1e-4,
                "r={r} sigma={sigma}: {} vs {disk}",
                out.sum()
            );
            assert!(out.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn fcrn_disjoint_supports_superpose() {
        let params = FcrnGtParams {
            dilation_radius: 3.0,
            sigma: 2.0,
        };
        // 2 (r + 3 sigma) = 18; use 20.
        let g = geom(64, 40);
        let both = render_fcrn_gt(&pts(&[(15.0, 20.0), (35.0, 20.0)]), g, &params).unwrap();
        let a = render_fcrn_gt(&pts(&[(15.0, 20.0)]), g, &params).unwrap();
        let b = render_fcrn_gt(&pts(&[(35.0, 20.0)]), g, &params).unwrap();
        for k in 0..g.pixel_count() {
            assert_eq!(both.values()[k], a.values()[k] + b.values()[k]);
        }
    }

    #[test]
    fn fcrn_out_of_bounds_lists_indices() {
        let params = FcrnGtParams {
            dilation_radius: 1.0,
            sigma: 1.0,
        };
        let err = render_fcrn_gt(
            &pts(&[(1.0, 1.0), (40.0, 1.0), (1.0, -3.0)]),
            geom(32, 32),
            &params,
        )
        .unwrap_err();
        match err {
            Error::OutOfBounds { indices, .. } => assert_eq!(indices, vec![1, 2]),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn ifcrn_peak_at_centroid() {
        let params = IfcrnGtParams {
            sigma: 3.0,
            downsample_factor: 1,
        };
        let out = render_ifcrn_gt(&pts(&[(32.0, 32.0)]), geom(64, 64), &params).unwrap();
        assert_eq!(out.argmax(), (32, 32, 1.0));
    }

    #[test]
    fn ifcrn_downsampled_peak() {
        // (32 + 0.5) / 4 - 0.5 = 7.625 -> grid 8.
        let out = render_ifcrn_gt(&pts(&[(32.0, 32.0)]), geom(64, 64), &IfcrnGtParams::default()).unwrap();
        assert_eq!(out.geometry(), geom(16, 16));
        assert_eq!(out.argmax(), (8, 8, 1.0));
    }

    #[test]
    fn ifcrn_empty_and_overlap() {
        let params = IfcrnGtParams {
            sigma: 3.0,
            downsample_factor: 1,
        };
        let out = render_ifcrn_gt(&CentroidSet::empty(), geom(16, 16), &params).unwrap();
        assert_eq!(out.sum(), 0.0);

        let out = render_ifcrn_gt(&pts(&[(10.0, 10.0), (12.0, 10.0)]), geom(32, 32), &params).unwrap();
        assert!(out.values().iter().all(|&v| v <= 1.0));
        assert_eq!(out.get(10, 10), 1.0);
        assert_eq!(out.get(12, 10), 1.0);
    }
}
