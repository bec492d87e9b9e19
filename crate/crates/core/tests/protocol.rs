use std::path::Path;

use stm::evaluation::{
    dataset_from_manifest, run_protocol_on_dataset, run_raw_baseline, synth_generate, EvalReport,
    PairedDataset, Protocol, ProtocolConfig, SyntheticConfig,
};
use stm::features::{save_pgm, AugmentationPolicy, FeatureSpec, GrayImage};
use stm::io::{load_manifest, reports, ManifestRules};
use stm::model_core::HyperParams;
use stm::shared_transform::{fit, InitPolicy};

/// Five-fold rank-1 mean of the shared-transform pipeline on the default
/// synthetic data with folds seeded by 7.
const GOLDEN_SYNTHETIC_RANK1: f64 = 0.825;

fn synthetic(n_subjects: usize, n_distractors: usize) -> PairedDataset {
    let data = synth_generate(&SyntheticConfig {
        n_subjects,
        n_distractors,
        ..SyntheticConfig::default()
    })
    .unwrap();
    PairedDataset::from_synthetic(&data, "precomputed")
}

fn quick_hyper() -> HyperParams {
    HyperParams {
        max_iters: 10,
        ..HyperParams::for_dim(32)
    }
}

fn run(data: &PairedDataset, protocol: Protocol, seed: u64) -> EvalReport {
    let pc = ProtocolConfig {
        protocol,
        seed,
        ..ProtocolConfig::default()
    };
    run_protocol_on_dataset(data, &pc, &quick_hyper(), InitPolicy::Identity).unwrap()
}

#[test]
fn ten_subjects_give_two_identity_curves() {
    let report = run(&synthetic(10, 0), Protocol::P1, 1);
    assert_eq!(report.folds.len(), 5);
    for f in &report.folds {
        assert_eq!(f.test_subjects.len(), 2);
        assert_eq!(f.cmc.accuracy_at_rank.len(), 2);
        assert_eq!(f.cmc.accuracy_at_rank[1], 1.0);
        assert!(f.fit.is_some());
    }
    assert_eq!(report.std_convention, "population");
}

#[test]
fn p2_without_distractors_matches_p1() {
    let data = synthetic(15, 0);
    let p1 = run(&data, Protocol::P1, 4);
    let p2 = run(&data, Protocol::P2, 4);
    assert_eq!(p2.extended_gallery_size, 0);
    assert_eq!(p1.folds, p2.folds);
    assert_eq!(p1.rank1_mean.to_bits(), p2.rank1_mean.to_bits());
    assert_eq!(p1.rank5_std.to_bits(), p2.rank5_std.to_bits());
}

#[test]
fn p2_gallery_adds_every_distractor() {
    let data = synthetic(15, 12);
    let p2 = run(&data, Protocol::P2, 2);
    assert_eq!(p2.extended_gallery_size, 12);
    for f in &p2.folds {
        assert_eq!(f.gallery_identities, f.test_subjects.len() + 12);
        assert_eq!(*f.cmc.accuracy_at_rank.last().unwrap(), 1.0);
    }
    let p1 = run(&data, Protocol::P1, 2);
    assert!(p2.rank1_mean <= p1.rank1_mean);
}

#[test]
fn reports_are_reproducible_byte_for_byte() {
    let data = synthetic(20, 5);
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run_id in 0..2 {
        let report = run(&data, Protocol::P2, 9);
        let base = dir.path().join(format!("r{run_id}"));
        std::fs::create_dir_all(&base).unwrap();
        reports::write_summary(&report, &base.join("summary.csv")).unwrap();
        reports::write_cmc(&report, &base.join("cmc.csv")).unwrap();
        reports::write_fold_traces(&report, &base.join("trace.csv")).unwrap();
        let bytes: Vec<Vec<u8>> = ["summary.csv", "cmc.csv", "trace.csv"]
            .iter()
            .map(|f| std::fs::read(base.join(f)).unwrap())
            .collect();
        outputs.push((report, bytes));
    }
    assert_eq!(outputs[0], outputs[1]);
    let summary = String::from_utf8(outputs[0].1[0].clone()).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "protocol,fold,rank1,rank5");
    assert_eq!(lines.len(), 1 + 5 + 2);
    assert!(lines[6].starts_with("P2,mean,"));
    assert!(lines[7].starts_with("P2,std,"));
}

/// Squared distance between hard-thresholded codes, written out longhand.
fn oracle_code(t: &stm::model_core::RealMatrix, x: &[f64], tau: usize) -> Vec<f64> {
    let n = x.len();
    let proj: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| t[(i, j)] * x[j]).sum())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| proj[b].abs().total_cmp(&proj[a].abs()).then(a.cmp(&b)));
    let mut out = vec![0.0; n];
    for &i in order.iter().take(tau) {
        out[i] = proj[i];
    }
    out
}

#[test]
fn default_synthetic_rank1_is_frozen_and_matches_brute_force() {
    let data = synthetic(40, 0);
    let hyper = HyperParams::for_dim(32);
    let pc = ProtocolConfig {
        seed: 7,
        ..ProtocolConfig::default()
    };
    let report = run_protocol_on_dataset(&data, &pc, &hyper, InitPolicy::Identity).unwrap();
    assert_eq!(
        report.rank1_mean.to_bits(),
        GOLDEN_SYNTHETIC_RANK1.to_bits(),
        "{}",
        report.rank1_mean
    );
    assert!(report.rank1_mean > run_raw_baseline(&data, &pc).unwrap().rank1_mean);

    let by_id = |id: &str| data.subjects.iter().find(|s| s.id == id).unwrap();
    for fold in &report.folds {
        let (xs, xd) = data.training_matrices(&fold.train_subjects).unwrap();
        let (model, _) = fit(&xs, &xd, &hyper, InitPolicy::Identity).unwrap();
        let t = model.transform();
        for (probe_id, &rank) in fold.test_subjects.iter().zip(&fold.ranks) {
            let p = oracle_code(t, &by_id(probe_id).skull_probe, hyper.tau);
            let mut scored: Vec<(f64, &String)> = fold
                .test_subjects
                .iter()
                .map(|gid| {
                    let g = oracle_code(t, &by_id(gid).face_gallery, hyper.tau);
                    (g.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum(), gid)
                })
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
            let oracle_rank = 1 + scored.iter().position(|(_, id)| *id == probe_id).unwrap();
            assert_eq!(
                rank, oracle_rank,
                "fold {} probe {probe_id}",
                fold.fold_index
            );
        }
    }
}

fn write_subject_images(dir: &Path, id: usize) -> (String, String) {
    let skull =
        GrayImage::from_fn(24, 20, |x, y| ((x * (id + 3) + y * 7) % 200) as u8 + 20).unwrap();
    let face =
        GrayImage::from_fn(30, 30, |x, y| ((x * 5 + y * (id + 2)) % 180) as u8 + 40).unwrap();
    let (s, f) = (format!("skull_{id}.pgm"), format!("face_{id}.pgm"));
    save_pgm(&skull, &dir.join(&s)).unwrap();
    save_pgm(&face, &dir.join(&f)).unwrap();
    (s, f)
}

#[test]
fn image_manifest_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("subject_id,modality,image_path\n");
    for id in 0..6 {
        let (s, f) = write_subject_images(dir.path(), id);
        text += &format!("subj{id},skull,{s}\nsubj{id},face,{f}\n");
    }
    save_pgm(
        &GrayImage::filled(16, 16, 90).unwrap(),
        &dir.path().join("other.pgm"),
    )
    .unwrap();
    text += "zzz,distractor_face,other.pgm\n";
    let manifest_path = dir.path().join("manifest.csv");
    std::fs::write(&manifest_path, &text).unwrap();

    let manifest = load_manifest(&manifest_path, ManifestRules::MatedPairs).unwrap();
    let spec = FeatureSpec::Raw { size: 8 };
    let policy = AugmentationPolicy::default();
    let data = dataset_from_manifest(&manifest, None, &spec, &policy).unwrap();
    assert_eq!(data.subjects.len(), 6);
    assert_eq!(data.distractors.len(), 1);
    assert_eq!(data.feature_space_tag, "raw:size=8");
    for s in &data.subjects {
        assert_eq!(s.skull_train.len(), 10);
        assert_eq!(s.face_train.len(), 10);
        assert_eq!(s.skull_probe, s.skull_train[0]);
        assert_eq!(s.skull_probe.len(), 64);
    }
    let (xs, xd) = data.training_matrices(&data.subject_ids()).unwrap();
    assert_eq!((xs.cols(), xd.cols()), (60, 60));

    let pc = ProtocolConfig {
        protocol: Protocol::P2,
        n_folds: 3,
        seed: 1,
        ..ProtocolConfig::default()
    };
    let hyper = HyperParams {
        max_iters: 5,
        ..HyperParams::for_dim(64)
    };
    let report = run_protocol_on_dataset(&data, &pc, &hyper, InitPolicy::Identity).unwrap();
    assert_eq!(report.folds.len(), 3);
    assert!(report.folds.iter().all(|f| f.gallery_identities == 3));
}

#[test]
fn invalid_datasets_are_rejected() {
    let mut data = synthetic(6, 1);
    data.distractors[0].0 = data.subjects[0].id.clone();
    assert!(run_raw_baseline(&data, &ProtocolConfig::default()).is_err());

    let mut data = synthetic(6, 0);
    data.subjects[2].face_gallery.pop();
    assert!(run_raw_baseline(&data, &ProtocolConfig::default()).is_err());

    let data = synthetic(4, 0);
    assert!(run_raw_baseline(&data, &ProtocolConfig::default()).is_err());
}
