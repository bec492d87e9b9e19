use std::collections::BTreeSet;

use proptest::prelude::*;

use stm::evaluation::{compute_cmc, make_folds};
use stm::features::{augment, extract_hog, AugmentationPolicy, GrayImage, HogParams};
use stm::identification::{build_gallery, identify};
use stm::io::{decode_model, encode_model, parse_manifest, DatasetManifest, ManifestRules};
use stm::model_core::{HyperParams, RealMatrix};
use stm::shared_transform::SharedTransformModel;

fn matrix(rows: usize, cols: usize, values: &[f64]) -> RealMatrix {
    RealMatrix::from_column_slice(rows, cols, &values[..rows * cols]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn folds_partition_subjects(count in 2usize..60, folds_frac in 0.0f64..1.0, seed: u64) {
        let n_folds = 2 + ((count - 2) as f64 * folds_frac) as usize;
        let subjects: Vec<String> = (0..count).map(|i| format!("p{i:02}")).collect();
        let splits = make_folds(&subjects, n_folds, seed).unwrap();
        prop_assert_eq!(splits.len(), n_folds);
        let mut seen = BTreeSet::new();
        let sizes: Vec<usize> = splits.iter().map(|f| f.test_subjects.len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for f in &splits {
            let test: BTreeSet<_> = f.test_subjects.iter().collect();
            let train: BTreeSet<_> = f.train_subjects.iter().collect();
            prop_assert!(test.is_disjoint(&train));
            prop_assert_eq!(test.len() + train.len(), count);
            for id in &f.test_subjects {
                prop_assert!(seen.insert(id.clone()));
            }
        }
        prop_assert_eq!(seen.len(), count);
        prop_assert_eq!(&splits, &make_folds(&subjects, n_folds, seed).unwrap());
    }

    #[test]
    fn cmc_counts_fractions(ids in 1usize..40, raw in proptest::collection::vec(0usize..1000, 1..50)) {
        let ranks: Vec<usize> = raw.iter().map(|r| r % ids + 1).collect();
        let c = compute_cmc(&ranks, ids).unwrap();
        prop_assert_eq!(c.accuracy_at_rank.len(), ids);
        prop_assert!(c.accuracy_at_rank.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*c.accuracy_at_rank.last().unwrap(), 1.0);
        for k in 1..=ids {
            let hits = ranks.iter().filter(|&&r| r <= k).count();
            prop_assert_eq!(c.at(k), hits as f64 / ranks.len() as f64);
        }
        prop_assert!(compute_cmc(&[ids + 1], ids).is_err());
    }

    #[test]
    fn ranked_lists_are_sorted_and_complete(
        n in 1usize..8,
        tau_frac in 0.0f64..1.0,
        images in 1usize..20,
        label_ids in proptest::collection::vec(0usize..6, 20),
        values in proptest::collection::vec(-3.0f64..3.0, 8 * 8 + 8 * 20 + 8),
    ) {
        let tau = 1 + ((n - 1) as f64 * tau_frac) as usize;
        let mut t = matrix(n, n, &values);
        // keep the transform well away from singular
        t = RealMatrix::new(t.as_matrix() + nalgebra::DMatrix::identity(n, n) * 10.0).unwrap();
        let hyper = HyperParams { tau, ..HyperParams::for_dim(n) };
        let model = SharedTransformModel::new(t, hyper, "precomputed").unwrap();
        let feats = matrix(n, images, &values[64..]);
        let labels: Vec<String> = label_ids[..images].iter().map(|i| format!("id{i}")).collect();
        let distinct: BTreeSet<_> = labels.iter().cloned().collect();
        let gallery = build_gallery(&model, &feats, labels, "precomputed").unwrap();
        prop_assert!(gallery.codes().column_iter().all(|c| c.iter().filter(|v| **v != 0.0).count() <= tau));
        let probe = &values[64 + 160..64 + 160 + n];
        let ranked = identify(&model, probe, &gallery).unwrap();
        let listed: BTreeSet<_> = ranked.entries.iter().map(|e| e.identity.clone()).collect();
        prop_assert_eq!(listed.len(), ranked.len());
        prop_assert_eq!(listed, distinct);
        prop_assert!(ranked.entries.iter().all(|e| e.distance.is_finite() && e.distance >= 0.0));
        prop_assert!(ranked.entries.windows(2).all(|w| w[0].distance <= w[1].distance));
    }

    #[test]
    fn model_files_round_trip(n in 1usize..7, values in proptest::collection::vec(-5.0f64..5.0, 36), lambda3 in 0.0f64..4.0, provenance in "[ -~]{0,40}") {
        let t = RealMatrix::new(matrix(n, n, &values).as_matrix() + nalgebra::DMatrix::identity(n, n) * 20.0).unwrap();
        let hyper = HyperParams { lambda3, ..HyperParams::for_dim(n) };
        let model = SharedTransformModel::new(t, hyper, "raw:size=4").unwrap();
        let back = decode_model(&encode_model(&model, &provenance)).unwrap();
        prop_assert_eq!(back.parameter_count(), n * n);
        prop_assert_eq!(&back.model, &model);
        prop_assert_eq!(back.provenance, provenance);
    }

    #[test]
    fn manifests_round_trip(pairs in 1usize..20, distractors in 0usize..5) {
        let mut text = String::from("subject_id,modality,image_path\n");
        for i in 0..pairs {
            text += &format!("s{i},skull,skull {i}.pgm\ns{i},face,\"face,{i}.pgm\"\n");
        }
        for i in 0..distractors {
            text += &format!("d{i},distractor_face,d{i}.pgm\n");
        }
        let m = parse_manifest(text.as_bytes(), None, ManifestRules::MatedPairs).unwrap();
        prop_assert_eq!(m.mated_pairs().len(), pairs);
        prop_assert_eq!(m.distractors().len(), distractors);
        let again: DatasetManifest = parse_manifest(m.to_csv().as_bytes(), None, ManifestRules::MatedPairs).unwrap();
        prop_assert_eq!(again, m);
    }

    #[test]
    fn augmentation_preserves_shape(w in 1usize..20, h in 1usize..20, seed: u8, flip: bool) {
        let img = GrayImage::from_fn(w, h, |x, y| ((x * 31 + y * 17) as u8).wrapping_add(seed)).unwrap();
        let policy = AugmentationPolicy { flip, ..AugmentationPolicy::default() };
        let out = augment(&img, &policy);
        prop_assert_eq!(out.len(), policy.variant_count());
        prop_assert_eq!(&out[0], &img);
        prop_assert!(out.iter().all(|v| v.width() == w && v.height() == h));
    }

    #[test]
    fn hog_ignores_uniform_brightness_shift(seed: u64, shift in 1u8..60) {
        let img = GrayImage::from_fn(64, 64, |x, y| {
            let v = ((x as u64 * 2654435761) ^ (y as u64 * 40503) ^ seed) % 190;
            v as u8 + 3
        }).unwrap();
        let brighter = img.map(|p| p + shift);
        let p = HogParams::default();
        let a = extract_hog(&img, &p).unwrap();
        prop_assert_eq!(&a, &extract_hog(&brighter, &p).unwrap());
        prop_assert!(a.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
    }
}
