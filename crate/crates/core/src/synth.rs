//! Seeded synthetic scenes and controlled corruptions.
//!
//! All randomness comes from ChaCha8 seeded with the caller's 64-bit seed,
//! so identical parameters give identical output on every platform.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CentroidSet, ImageGeometry, Point2D};

/// Consecutive rejected darts tolerated before giving up on a point.
pub const RETRY_BUDGET: usize = 10_000;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub n: usize,
    pub geometry: ImageGeometry,
    pub min_separation: f64,
    pub edge_buffer: f64,
    pub seed: u64,
}

/// Uniform position at least `buffer` from every border pixel center.
fn sample_interior(rng: &mut ChaCha8Rng, geometry: ImageGeometry, buffer: f64) -> Option<Point2D> {
    let (x_lo, x_hi) = (buffer, (geometry.width - 1) as f64 - buffer);
    let (y_lo, y_hi) = (buffer, (geometry.height - 1) as f64 - buffer);
    if x_lo > x_hi || y_lo > y_hi {
        return None;
    }
    Some(Point2D::new(
        x_lo + rng.random::<f64>() * (x_hi - x_lo),
        y_lo + rng.random::<f64>() * (y_hi - y_lo),
    ))
}

/// Dart throwing: accept a uniform candidate when it keeps `min_dist` from
/// everything in `avoid` and everything placed so far.
fn throw_darts(
    rng: &mut ChaCha8Rng,
    n: usize,
    geometry: ImageGeometry,
    buffer: f64,
    min_dist: f64,
    avoid: &[Point2D],
    avoid_dist: f64,
) -> Result<Vec<Point2D>> {
    let mut placed: Vec<Point2D> = Vec::with_capacity(n);
    while placed.len() < n {
        let mut accepted = false;
        for _ in 0..RETRY_BUDGET {
            let Some(p) = sample_interior(rng, geometry, buffer) else {
                break;
            };
            let clear = placed.iter().all(|q| p.distance(q) >= min_dist)
                && avoid.iter().all(|q| p.distance(q) >= avoid_dist);
            if clear {
                placed.push(p);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::InfeasibleScene {
                placed: placed.len(),
                requested: n,
            });
        }
    }
    Ok(placed)
}

/// `n` points with pairwise distance `>= min_separation`, all at least
/// `edge_buffer` from every border.
pub fn generate_scene(params: &SceneParams) -> Result<CentroidSet> {
    if !(params.min_separation >= 0.0 && params.edge_buffer >= 0.0) {
        return Err(Error::Parameter("separation and edge buffer must be >= 0".into()));
    }
    let mut rng = rng_from_seed(params.seed);
    let points = throw_darts(
        &mut rng,
        params.n,
        params.geometry,
        params.edge_buffer,
        params.min_separation,
        &[],
        0.0,
    )?;
    Ok(CentroidSet::from_finite(points))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbParams {
    pub jitter_sigma: f64,
    pub drop_rate: f64,
    /// Expected spurious detections per input point.
    pub spurious_rate: f64,
    pub seed: u64,
}

impl PerturbParams {
    pub fn identity(seed: u64) -> Self {
        Self {
            jitter_sigma: 0.0,
            drop_rate: 0.0,
            spurious_rate: 0.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.jitter_sigma.is_finite() && self.jitter_sigma >= 0.0) {
            return Err(Error::Parameter(format!(
                "jitter sigma must be >= 0, got {}",
                self.jitter_sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.drop_rate) {
            return Err(Error::Parameter(format!(
                "drop rate must lie in [0, 1], got {}",
                self.drop_rate
            )));
        }
        if !(self.spurious_rate.is_finite() && self.spurious_rate >= 0.0) {
            return Err(Error::Parameter(format!(
                "spurious rate must be >= 0, got {}",
                self.spurious_rate
            )));
        }
        Ok(())
    }
}

/// Simulated detector output: each point is dropped with probability
/// `drop_rate` or else displaced by isotropic Gaussian jitter (clamped to
/// the image); then `Poisson(spurious_rate * n)` uniform spurious points are
/// appended.
pub fn perturb(gt: &CentroidSet, geometry: ImageGeometry, params: &PerturbParams) -> Result<CentroidSet> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let jitter = Normal::new(0.0, params.jitter_sigma).map_err(|e| Error::Parameter(e.to_string()))?;
    let (max_x, max_y) = ((geometry.width - 1) as f64, (geometry.height - 1) as f64);

    let mut out = Vec::with_capacity(gt.len());
    for p in gt {
        if rng.random::<f64>() < params.drop_rate {
            continue;
        }
        if params.jitter_sigma > 0.0 {
            let dx = jitter.sample(&mut rng);
            let dy = jitter.sample(&mut rng);
            out.push(Point2D::new(
                (p.x + dx).clamp(0.0, max_x),
                (p.y + dy).clamp(0.0, max_y),
            ));
        } else {
            out.push(*p);
        }
    }

    let lambda = params.spurious_rate * gt.len() as f64;
    if lambda > 0.0 {
        let count = Poisson::new(lambda)
            .map_err(|e| Error::Parameter(e.to_string()))?
            .sample(&mut rng) as usize;
        for _ in 0..count {
            out.push(sample_interior(&mut rng, geometry, 0.0).expect("geometry is at least 1x1"));
        }
    }
    Ok(CentroidSet::from_finite(out))
}

/// Exact corruption: `drops` ground truths removed and `spurious` points
/// added, the latter kept at least `clearance` from every ground truth and
/// `edge_buffer` from the borders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionParams {
    pub drops: usize,
    pub spurious: usize,
    pub clearance: f64,
    pub edge_buffer: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corruption {
    /// Surviving ground truths in their original order, then the spurious points.
    pub predictions: CentroidSet,
    /// Indices of the removed ground truths, ascending.
    pub dropped: Vec<usize>,
}

pub fn corrupt(gt: &CentroidSet, geometry: ImageGeometry, params: &CorruptionParams) -> Result<Corruption> {
    if params.drops > gt.len() {
        return Err(Error::Parameter(format!(
            "cannot drop {} of {} points",
            params.drops,
            gt.len()
        )));
    }
    let mut rng = rng_from_seed(params.seed);
    let mut dropped = sample(&mut rng, gt.len(), params.drops).into_vec();
    dropped.sort_unstable();

    let mut keep = vec![true; gt.len()];
    for &i in &dropped {
        keep[i] = false;
    }
    let mut points: Vec<Point2D> = gt
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(p, _)| *p)
        .collect();
    points.extend(throw_darts(
        &mut rng,
        params.spurious,
        geometry,
        params.edge_buffer,
        0.0,
        gt.points(),
        params.clearance,
    )?);
    Ok(Corruption {
        predictions: CentroidSet::from_finite(points),
        dropped,
    })
}
