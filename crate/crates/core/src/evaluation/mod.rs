//! Fold construction, synthetic data, CMC curves and the cross-validated
//! identification protocols.

mod cmc;
mod folds;
mod protocol;
mod synth;

use rayon::prelude::*;

pub use cmc::{compute_cmc, mean_and_population_std, CmcCurve};
pub use folds::{make_folds, FoldSplit};
pub use protocol::{
    run_protocol_on_dataset, run_raw_baseline, EvalReport, FoldResult, PairedDataset, Protocol,
    ProtocolConfig, SubjectSamples,
};
pub use synth::{gaussian_matrix, synth_generate, SyntheticConfig, SyntheticData};

use crate::error::Result;
use crate::features::{AugmentationPolicy, FeatureSpec};
use crate::io::DatasetManifest;

/// Extracts features for every mated pair in `manifest`.
///
/// Training vectors carry every augmentation variant; probe and gallery
/// vectors come from the unmodified images. Distractor faces from `manifest`
/// and every face in `extended` join the distractor set.
pub fn dataset_from_manifest(
    manifest: &DatasetManifest,
    extended: Option<&DatasetManifest>,
    spec: &FeatureSpec,
    augmentation: &AugmentationPolicy,
) -> Result<PairedDataset> {
    spec.validate()?;
    let subjects = manifest
        .mated_pairs()
        .par_iter()
        .map(|pair| {
            let skull_train = spec.load(&pair.skull, Some(augmentation))?;
            let face_train = spec.load(&pair.face, Some(augmentation))?;
            Ok(SubjectSamples {
                id: pair.subject_id.clone(),
                skull_probe: skull_train[0].clone(),
                face_gallery: face_train[0].clone(),
                skull_train,
                face_train,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut extra = manifest.distractors();
    if let Some(ext) = extended {
        extra.extend(ext.gallery_faces());
    }
    let distractors = extra
        .par_iter()
        .map(|(id, path)| Ok((id.clone(), spec.load(path, None)?.remove(0))))
        .collect::<Result<Vec<_>>>()?;

    let data = PairedDataset {
        subjects,
        distractors,
        feature_space_tag: spec.tag(),
    };
    data.validate()?;
    Ok(data)
}
