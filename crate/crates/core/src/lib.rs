//! Evaluation toolkit for centroid-based cell detection.
//!
//! The crate covers everything around a detector except the network itself:
//!
//! - [`geometry`]: points, polygons, image extents, distance matrices;
//! - [`density`]: fuzzy ground-truth rendering and raster primitives;
//! - [`extract`]: density maps and label masks to centroids;
//! - [`assignment`]: optimal prediction/ground-truth matching;
//! - [`metrics`]: localization error, precision/recall, fold summaries;
//! - [`synth`]: seeded scenes and corruptions for end-to-end checks;
//! - [`bench`]: extraction throughput in nuclei per second;
//! - [`formats`]: centroid CSV, polygon JSON, PFM and PGM codecs.
//!
//! ```
//! use cytoloc_core::{evaluate_image, CentroidSet, ImageGeometry, MetricParams, Point2D};
//!
//! let gts = CentroidSet::new(vec![Point2D::new(40.0, 40.0), Point2D::new(80.0, 60.0)])?;
//! let preds = CentroidSet::new(vec![Point2D::new(41.0, 40.0)])?;
//! let params = MetricParams::from_diameter(12.0, 0.3)?;
//! let eval = evaluate_image(&preds, &gts, ImageGeometry::new(128, 128)?, &params)?;
//! assert_eq!((eval.tp, eval.fp, eval.fn_), (1, 0, 1));
//! # Ok::<(), cytoloc_core::Error>(())
//! ```

pub mod assignment;
pub mod bench;
pub mod density;
pub mod error;
pub mod extract;
pub mod formats;
pub mod geometry;
pub mod metrics;
pub mod synth;

pub use assignment::{brute_force_assignment, solve_assignment, MatchedPair, Matching};
pub use bench::{benchmark_extraction, BenchReport, Extractor};
pub use density::{
    dilate_disk, downsample, gaussian_blur, render_fcrn_gt, render_ifcrn_gt, DensityMap, FcrnGtParams,
    IfcrnGtParams, KernelNormalization,
};
pub use error::{Error, Result};
pub use extract::{
    extract_local_maxima, extract_threshold_cc, mask_to_centroids, Connectivity, LabelMask,
    MaximaExtractParams, ThresholdExtractParams,
};
pub use geometry::{
    distance_matrix, estimate_avg_diameter, polygon_centroid, CentroidSet, DistanceMatrix, ImageGeometry,
    Point2D, Polygon,
};
pub use metrics::{
    aggregate_dataset, crossfold_aggregate, evaluate_image, filter_near_edge, localization_error, EvalReport,
    FoldSummary, ImageEval, MetricParams,
};
pub use synth::{corrupt, generate_scene, perturb, CorruptionParams, PerturbParams, SceneParams};
