//! Throughput measurement for the extraction stage, in nuclei per second.
//!
//! Maps are held in memory, so only post-processing is timed. One untimed
//! warm-up pass precedes `repeats` timed passes, and the rate uses the
//! median pass time.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensityMap;
use crate::error::{Error, Result};
use crate::extract::{
    extract_local_maxima, extract_threshold_cc, MaximaExtractParams, ThresholdExtractParams,
};
use crate::geometry::CentroidSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Extractor {
    ThresholdCc(ThresholdExtractParams),
    LocalMaxima(MaximaExtractParams),
}

impl Extractor {
    pub fn validate(&self) -> Result<()> {
        match self {
            Extractor::ThresholdCc(p) => p.validate(),
            Extractor::LocalMaxima(p) => p.validate(),
        }
    }

    pub fn extract(&self, map: &DensityMap) -> Result<CentroidSet> {
        match self {
            Extractor::ThresholdCc(p) => extract_threshold_cc(map, p),
            Extractor::LocalMaxima(p) => extract_local_maxima(map, p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub extractor: Extractor,
    pub maps: usize,
    /// Detections produced by one pass.
    pub total_nuclei: usize,
    /// Sum of the timed passes.
    pub wall_seconds: f64,
    pub median_seconds: f64,
    /// `total_nuclei / median_seconds`; 0 when nothing was detected.
    pub nuclei_per_second: f64,
    pub per_repeat_seconds: Vec<f64>,
    pub repeats: usize,
    /// 1 unless per-map extraction ran on a thread pool.
    pub threads: usize,
}

impl BenchReport {
    pub fn summary(&self) -> String {
        format!(
            "{} nuclei in {} maps, median {:.6} s over {} repeats ({} thread{}): {:.1} nuclei/s",
            self.total_nuclei,
            self.maps,
            self.median_seconds,
            self.repeats,
            self.threads,
            if self.threads == 1 { "" } else { "s" },
            self.nuclei_per_second
        )
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn run_pass(maps: &[DensityMap], extractor: &Extractor, pool: Option<&rayon::ThreadPool>) -> Result<usize> {
    match pool {
        None => maps.iter().map(|m| extractor.extract(m).map(|c| c.len())).sum(),
        Some(pool) => pool.install(|| {
            maps.par_iter()
                .map(|m| extractor.extract(m).map(|c| c.len()))
                .collect::<Result<Vec<_>>>()
                .map(|counts| counts.into_iter().sum())
        }),
    }
}

/// Times extraction over `maps`. `threads` of `None` (or `Some(1)`) runs
/// single-threaded.
pub fn benchmark_extraction(
    maps: &[DensityMap],
    extractor: &Extractor,
    repeats: usize,
    threads: Option<usize>,
) -> Result<BenchReport> {
    if maps.is_empty() {
        return Err(Error::NothingToBenchmark);
    }
    if repeats < 1 {
        return Err(Error::Parameter("repeats must be >= 1".into()));
    }
    extractor.validate()?;

    let threads = threads.unwrap_or(1).max(1);
    let pool = if threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Parameter(e.to_string()))?,
        )
    } else {
        None
    };

    let total_nuclei = run_pass(maps, extractor, pool.as_ref())?;
    let mut per_repeat_seconds = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        let count = run_pass(maps, extractor, pool.as_ref())?;
        per_repeat_seconds.push(start.elapsed().as_secs_f64());
        if count != total_nuclei {
            return Err(Error::Input(format!(
                "extraction is not deterministic: {count} vs {total_nuclei} detections"
            )));
        }
    }

    let median_seconds = median(&per_repeat_seconds);
    let nuclei_per_second = if total_nuclei == 0 || median_seconds <= 0.0 {
        0.0
    } else {
        total_nuclei as f64 / median_seconds
    };
    Ok(BenchReport {
        extractor: *extractor,
        maps: maps.len(),
        total_nuclei,
        wall_seconds: per_repeat_seconds.iter().sum(),
        median_seconds,
        nuclei_per_second,
        per_repeat_seconds,
        repeats,
        threads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{render_ifcrn_gt, IfcrnGtParams};
    use crate::geometry::{ImageGeometry, Point2D};

    #[test]
    fn empty_input() {
        let e = Extractor::LocalMaxima(MaximaExtractParams::default());
        assert!(matches!(
            benchmark_extraction(&[], &e, 3, None),
            Err(Error::NothingToBenchmark)
        ));
        assert_eq!(Error::NothingToBenchmark.to_string(), "nothing to benchmark");
    }

    #[test]
    fn zero_maps_give_zero_rate() {
        let g = ImageGeometry::new(64, 64).unwrap();
        let maps = vec![DensityMap::zeros(g); 3];
        let e = Extractor::ThresholdCc(ThresholdExtractParams::default());
        let r = benchmark_extraction(&maps, &e, 4, None).unwrap();
        assert_eq!(r.total_nuclei, 0);
        assert_eq!(r.nuclei_per_second, 0.0);
        assert_eq!(r.per_repeat_seconds.len(), 4);
    }

    #[test]
    fn parallel_matches_serial_count() {
        let g = ImageGeometry::new(128, 128).unwrap();
        let src = CentroidSet::new(vec![Point2D::new(30.0, 30.0), Point2D::new(90.0, 80.0)]).unwrap();
        let map = render_ifcrn_gt(
            &src,
            g,
            &IfcrnGtParams {
                sigma: 3.0,
                downsample_factor: 1,
            },
        )
        .unwrap();
        let maps = vec![map; 8];
        let e = Extractor::LocalMaxima(MaximaExtractParams::new(0.4, 1));
        let serial = benchmark_extraction(&maps, &e, 2, None).unwrap();
        let parallel = benchmark_extraction(&maps, &e, 2, Some(3)).unwrap();
        assert_eq!(serial.total_nuclei, 16);
        assert_eq!(parallel.total_nuclei, 16);
        assert_eq!(parallel.threads, 3);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
