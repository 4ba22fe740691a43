use cytoloc_core::density::kernel_radius;
use cytoloc_core::{
    gaussian_blur, render_fcrn_gt, render_ifcrn_gt, CentroidSet, DensityMap, FcrnGtParams, IfcrnGtParams,
    ImageGeometry, KernelNormalization, Point2D,
};
use proptest::prelude::*;

/// Textbook 2D convolution with the outer-product kernel and zero padding.
fn direct_blur(map: &DensityMap, sigma: f64, norm: KernelNormalization) -> Vec<f64> {
    let r = kernel_radius(sigma) as i64;
    let mut k2 = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            k2.push((-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    if norm == KernelNormalization::SumOne {
        let s: f64 = k2.iter().sum();
        k2.iter_mut().for_each(|v| *v /= s);
    }
    let (w, h) = (map.width() as i64, map.height() as i64);
    let side = 2 * r + 1;
    let mut out = vec![0.0; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (sx, sy) = (x + dx, y + dy);
                    if sx >= 0 && sy >= 0 && sx < w && sy < h {
                        acc += k2[((dy + r) * side + dx + r) as usize]
                            * f64::from(map.get(sx as usize, sy as usize));
                    }
                }
            }
            out[(y * w + x) as usize] = acc;
        }
    }
    out
}

fn map16() -> impl Strategy<Value = DensityMap> {
    prop::collection::vec(-1.0f32..1.0, 256)
        .prop_map(|v| DensityMap::from_values(ImageGeometry::new(16, 16).unwrap(), v).unwrap())
}

fn norm() -> impl Strategy<Value = KernelNormalization> {
    prop_oneof![
        Just(KernelNormalization::SumOne),
        Just(KernelNormalization::PeakOne)
    ]
}

fn scene(max: usize) -> impl Strategy<Value = Vec<Point2D>> {
    prop::collection::vec((0.0..95.0f64, 0.0..79.0f64), 0..max)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point2D::new(x, y)).collect())
}

proptest! {
    #[test]
    fn separable_equals_direct(map in map16(), sigma in 0.3..3.0f64, norm in norm()) {
        let fast = gaussian_blur(&map, sigma, norm).unwrap();
        let slow = direct_blur(&map, sigma, norm);
        for (a, b) in fast.values().iter().zip(&slow) {
            prop_assert!((f64::from(*a) - b).abs() <= 1e-5, "{} vs {}", a, b);
        }
    }

    #[test]
    fn blur_is_linear(a in map16(), b in map16(), ca in -2.0..2.0f32, cb in -2.0..2.0f32, sigma in 0.5..2.5f64, norm in norm()) {
        let g = a.geometry();
        let mix = DensityMap::from_values(g, a.values().iter().zip(b.values()).map(|(x, y)| ca * x + cb * y).collect()).unwrap();
        let lhs = gaussian_blur(&mix, sigma, norm).unwrap();
        let ba = gaussian_blur(&a, sigma, norm).unwrap();
        let bb = gaussian_blur(&b, sigma, norm).unwrap();
        for k in 0..g.pixel_count() {
            let rhs = ca * ba.values()[k] + cb * bb.values()[k];
            prop_assert!((lhs.values()[k] - rhs).abs() <= 1e-5);
        }
    }

    #[test]
    fn renderings_are_permutation_invariant_and_bounded(pts in scene(20), seed in any::<u64>()) {
        let g = ImageGeometry::new(96, 80).unwrap();
        let mut shuffled = pts.clone();
        // Deterministic Fisher-Yates from the seed.
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = CentroidSet::new(pts).unwrap();
        let b = CentroidSet::new(shuffled).unwrap();

        let fp = FcrnGtParams { dilation_radius: 2.5, sigma: 1.5 };
        let fa = render_fcrn_gt(&a, g, &fp).unwrap();
        prop_assert_eq!(&fa, &render_fcrn_gt(&b, g, &fp).unwrap());
        prop_assert!(fa.values().iter().all(|v| (0.0..=1.0).contains(v)));

        for f in [1, 4] {
            let ip = IfcrnGtParams { sigma: 3.0, downsample_factor: f };
            let ia = render_ifcrn_gt(&a, g, &ip).unwrap();
            prop_assert_eq!(&ia, &render_ifcrn_gt(&b, g, &ip).unwrap());
            prop_assert!(ia.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
