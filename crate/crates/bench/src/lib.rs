//! Fixtures shared by the criterion benches.

use cytoloc_core::synth::rng_from_seed;
use cytoloc_core::{
    generate_scene, perturb, render_fcrn_gt, render_ifcrn_gt, CentroidSet, DensityMap, DistanceMatrix,
    FcrnGtParams, IfcrnGtParams, ImageGeometry, PerturbParams, SceneParams,
};

pub const SIDE: usize = 512;

pub fn geometry() -> ImageGeometry {
    ImageGeometry::new(SIDE, SIDE).expect("non-empty")
}

/// `n` centroids at least 24 px apart and 12 px from the border.
pub fn scene(n: usize, seed: u64) -> CentroidSet {
    generate_scene(&SceneParams {
        n,
        geometry: geometry(),
        min_separation: 24.0,
        edge_buffer: 12.0,
        seed,
    })
    .expect("scene fits")
}

/// Jittered, thinned copy of `gt` with a few spurious points.
pub fn predictions(gt: &CentroidSet, seed: u64) -> CentroidSet {
    let params = PerturbParams {
        jitter_sigma: 2.0,
        drop_rate: 0.1,
        spurious_rate: 0.1,
        seed,
    };
    perturb(gt, geometry(), &params).expect("valid params")
}

pub fn fcrn_params() -> FcrnGtParams {
    FcrnGtParams {
        dilation_radius: 5.0,
        sigma: 3.0,
    }
}

pub fn ifcrn_params() -> IfcrnGtParams {
    IfcrnGtParams {
        sigma: 3.0,
        downsample_factor: 1,
    }
}

pub fn fcrn_maps(count: usize, nuclei: usize) -> Vec<DensityMap> {
    (0..count as u64)
        .map(|s| render_fcrn_gt(&scene(nuclei, s), geometry(), &fcrn_params()).expect("in bounds"))
        .collect()
}

pub fn ifcrn_maps(count: usize, nuclei: usize) -> Vec<DensityMap> {
    (0..count as u64)
        .map(|s| render_ifcrn_gt(&scene(nuclei, s), geometry(), &ifcrn_params()).expect("in bounds"))
        .collect()
}

/// Square matrix of uniform costs in [0, 100).
pub fn random_costs(n: usize, seed: u64) -> DistanceMatrix {
    use rand::Rng;
    let mut rng = rng_from_seed(seed);
    let values = (0..n * n).map(|_| rng.random::<f64>() * 100.0).collect();
    DistanceMatrix::new(n, n, values).expect("finite, non-negative")
}
