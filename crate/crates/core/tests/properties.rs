use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use woodmask_core::agreement::pairwise_agreement;
use woodmask_core::metrics::{
    class_metrics, confusion, evaluate_pair, model_score, pixel_diff, EdgeCase, EdgeCasePolicy,
    Fraction, PixelDiffTarget,
};
use woodmask_core::split::split;
use woodmask_core::stats::sample_area_percent;
use woodmask_core::{
    cast_rot_maybe, clip_to_crosscut, flatten, remove_small_artifacts, BinaryMask, ClassHierarchy,
    ClassId, Connectivity, DatasetManifest, Geometry, LabelMask, MorphologyParams,
    RegionAnnotation, Rle, SampleRecord, Subset,
};

fn random_mask(rng: &mut ChaCha8Rng, w: u32, h: u32, classes: u8) -> LabelMask {
    let mut v = vec![0u8; (w * h) as usize];
    for i in 0..v.len() {
        let r: f64 = rng.random();
        v[i] = if r < 0.6 && i % w as usize > 0 {
            v[i - 1]
        } else if r < 0.85 && i >= w as usize {
            v[i - w as usize]
        } else {
            rng.random_range(0..classes)
        };
    }
    LabelMask::from_raw(w, h, &v).unwrap()
}

fn random_regions(rng: &mut ChaCha8Rng, n: usize, w: u32, h: u32) -> Vec<RegionAnnotation> {
    (0..n)
        .map(|_| {
            let class = ClassId::FOREGROUND[rng.random_range(0..6)];
            let k = rng.random_range(3..8);
            let pts = (0..k)
                .map(|_| [rng.random_range(0.0..=w as f64), rng.random_range(0.0..=h as f64)])
                .collect();
            RegionAnnotation::polygon(class, pts, "t")
        })
        .collect()
}

fn no_rot_maybe(m: &LabelMask) -> bool {
    !m.contains(ClassId::RotMaybe)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn flatten_ignores_region_order(seed: u64, n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut regions = random_regions(&mut rng, n, 24, 18);
        let h = ClassHierarchy::default();
        let first = flatten(&regions, &h, 24, 18).unwrap();
        regions.shuffle(&mut rng);
        prop_assert_eq!(flatten(&regions, &h, 24, 18).unwrap(), first);
    }

    #[test]
    fn reflattening_mask_regions_is_identity(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let regions = random_regions(&mut rng, 5, 20, 20);
        let h = ClassHierarchy::default();
        let mask = flatten(&regions, &h, 20, 20).unwrap();
        let derived: Vec<RegionAnnotation> = ClassId::FOREGROUND
            .iter()
            .filter(|&&c| mask.contains(c))
            .map(|&c| RegionAnnotation {
                id: None,
                class: c,
                geometry: Geometry::Rle(Rle::from_binary_mask(&mask.class_mask(c))),
                annotator: "t".into(),
                source: woodmask_core::RegionSource::Human,
            })
            .collect();
        prop_assert_eq!(flatten(&derived, &h, 20, 20).unwrap(), mask);
    }

    #[test]
    fn clip_is_idempotent(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_mask(&mut rng, 16, 12, 7);
        let bits = (0..16 * 12).map(|_| rng.random_bool(0.7)).collect();
        let support = BinaryMask::from_bits(16, 12, bits).unwrap();
        let once = clip_to_crosscut(&m, &support).unwrap();
        prop_assert_eq!(clip_to_crosscut(&once, &support).unwrap(), once);
    }

    #[test]
    fn morphology_is_idempotent(seed: u64, eight: bool, min_object in 1u64..30, min_hole in 1u64..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_mask(&mut rng, 32, 32, 7);
        let params = MorphologyParams {
            min_hole_area: min_hole,
            min_object_area: min_object,
            connectivity: if eight { Connectivity::Eight } else { Connectivity::Four },
        };
        let h = ClassHierarchy::default();
        let once = remove_small_artifacts(&m, &params, &h);
        prop_assert_eq!(remove_small_artifacts(&once, &params, &h), once);
    }

    #[test]
    fn cast_conserves_other_classes(seed: u64, to_rot: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_mask(&mut rng, 16, 16, 7);
        let target = if to_rot { ClassId::Rot } else { ClassId::Crosscut };
        let out = cast_rot_maybe(&m, target).unwrap();
        prop_assert!(no_rot_maybe(&out));
        let (before, after) = (m.class_counts(), out.class_counts());
        for c in ClassId::ALL {
            let expect = match c {
                ClassId::RotMaybe => 0,
                c if c == target => before[c.index()] + before[ClassId::RotMaybe.index()],
                c => before[c.index()],
            };
            prop_assert_eq!(after[c.index()], expect);
        }
    }

    #[test]
    fn f1_iou_identity(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gt = random_mask(&mut rng, 12, 12, 7);
        let pred = random_mask(&mut rng, 12, 12, 7);
        let e = evaluate_pair(&gt, &pred, &EdgeCasePolicy::default()).unwrap();
        for m in e.classes.iter().filter(|m| m.edge_case == EdgeCase::Normal) {
            // f1 = 2 iou / (1 + iou)
            let (n, d) = (m.iou.numer(), m.iou.denom());
            prop_assert_eq!(m.f1, Fraction::new(2 * n, d + n));
        }
    }

    #[test]
    fn swapping_masks_transposes(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gt = random_mask(&mut rng, 10, 10, 7);
        let pred = random_mask(&mut rng, 10, 10, 7);
        let p = EdgeCasePolicy::default();
        let ab = evaluate_pair(&gt, &pred, &p).unwrap();
        let ba = evaluate_pair(&pred, &gt, &p).unwrap();
        prop_assert_eq!(ab.confusion.transpose(), ba.confusion);
        for (x, y) in ab.classes.iter().zip(&ba.classes) {
            prop_assert_eq!(x.precision, y.recall);
            prop_assert_eq!(x.recall, y.precision);
            prop_assert_eq!((x.f1, x.iou, x.kappa, x.accuracy), (y.f1, y.iou, y.kappa, y.accuracy));
        }
        prop_assert_eq!(ab.kappa_multiclass, ba.kappa_multiclass);
    }

    #[test]
    fn pixel_diff_class_sum_is_bounded(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gt = random_mask(&mut rng, 10, 10, 7);
        let pred = random_mask(&mut rng, 10, 10, 7);
        let cm = confusion(&gt, &pred).unwrap();
        if let Some(all) = pixel_diff(&cm, PixelDiffTarget::All) {
            let sum = ClassId::FOREGROUND.iter().fold(Fraction::ZERO, |acc, &c| {
                let v = pixel_diff(&cm, PixelDiffTarget::Class(c)).unwrap();
                Fraction::new(
                    acc.numer() * v.denom() + v.numer() * acc.denom(),
                    acc.denom() * v.denom(),
                )
            });
            prop_assert!(all <= sum);
            prop_assert!(sum <= Fraction::new(2 * all.numer(), all.denom()));
        }
    }

    #[test]
    fn model_score_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, d in 0.0f64..0.5) {
        let base = model_score(a, b, c);
        prop_assert!(model_score(a + d, b, c) >= base);
        prop_assert!(model_score(a, b + d, c) >= base);
        prop_assert!(model_score(a, b, c + d) >= base);
    }

    #[test]
    fn area_percentages_sum_to_one_hundred(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_mask(&mut rng, 16, 16, 7);
        if let Some(p) = sample_area_percent(&m) {
            prop_assert!((p.iter().sum::<f64>() - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn split_partitions_the_data_subset(seed: u64, n in 1usize..60, extra in 0usize..6) {
        let mut samples: Vec<SampleRecord> = (0..n)
            .map(|i| SampleRecord::new(format!("d{i:03}"), format!("d{i}.png"), 4, 4, Subset::Data))
            .collect();
        for i in 0..extra {
            let subset = if i % 2 == 0 { Subset::Warmup } else { Subset::Examples };
            samples.push(SampleRecord::new(format!("w{i}"), format!("w{i}.png"), 4, 4, subset));
        }
        let m = DatasetManifest::new(samples);
        let a = split(&m, seed).unwrap();
        prop_assert_eq!(a.assignments.len(), n);
        prop_assert!(a.assignments.keys().all(|k| k.starts_with('d')));
        prop_assert_eq!(a.counts().iter().sum::<usize>(), n);
        prop_assert_eq!(split(&m, seed).unwrap(), a);
    }

    #[test]
    fn agreement_iou_is_metrics_iou(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = EdgeCasePolicy::default();
        let mut a = BTreeMap::new();
        let mut b = BTreeMap::new();
        let mut sums = [0.0f64; 7];
        for i in 0..3 {
            let x = random_mask(&mut rng, 8, 8, 7);
            let y = random_mask(&mut rng, 8, 8, 7);
            let cm = confusion(&x, &y).unwrap();
            for c in ClassId::ALL {
                sums[c.index()] += class_metrics(&cm, c, &p).iou.to_f64();
            }
            a.insert(format!("s{i}"), x);
            b.insert(format!("s{i}"), y);
        }
        let r = pairwise_agreement(&a, &b, &p).unwrap();
        for c in ClassId::ALL {
            prop_assert!((r.iou[c.index()] - sums[c.index()] / 3.0).abs() < 1e-12);
        }
        prop_assert!(r.kappa.iter().all(|k| (-1.0..=1.0).contains(k)));
        prop_assert_eq!(pairwise_agreement(&b, &a, &p).unwrap(), r);
    }
}

#[test]
fn no_operation_emits_invalid_class_ids() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = ClassHierarchy::default();
    let regions = random_regions(&mut rng, 6, 30, 30);
    let m = flatten(&regions, &h, 30, 30).unwrap();
    let cleaned = remove_small_artifacts(&m, &MorphologyParams::default(), &h);
    let cast = cast_rot_maybe(&cleaned, ClassId::Rot).unwrap();
    for mask in [m, cleaned, cast] {
        assert!(mask.to_raw().iter().all(|&v| v < 7));
    }
}
