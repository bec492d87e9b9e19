//! Cross-validated identification protocols.
//!
//! P1 matches each test skull against the faces of the fold's test subjects.
//! P2 adds every distractor face to that gallery.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cmc::{compute_cmc, mean_and_population_std, CmcCurve};
use super::folds::{make_folds, FoldSplit};
use super::synth::SyntheticData;
use crate::error::{Error, Result};
use crate::identification::{build_gallery, identify, rank_of_true_match};
use crate::model_core::{HyperParams, RealMatrix};
use crate::shared_transform::{fit, FitReport, InitPolicy, SharedTransformModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    P1,
    P2,
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Protocol::P1 => f.write_str("P1"),
            Protocol::P2 => f.write_str("P2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub protocol: Protocol,
    #[serde(default = "default_folds")]
    pub n_folds: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extended_gallery_manifest: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_folds() -> usize {
    5
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            protocol: Protocol::P1,
            n_folds: 5,
            extended_gallery_manifest: None,
            seed: 0,
        }
    }
}

/// Feature vectors for one mated subject.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectSamples {
    pub id: String,
    /// Training-side skull vectors (augmented variants, original first).
    pub skull_train: Vec<Vec<f64>>,
    /// Training-side face vectors, variant `j` mated with `skull_train[j]`.
    pub face_train: Vec<Vec<f64>>,
    /// Unaugmented skull vector used as the probe.
    pub skull_probe: Vec<f64>,
    /// Unaugmented face vector enrolled in the gallery.
    pub face_gallery: Vec<f64>,
}

/// Feature-level view of a mated-pair dataset plus optional distractor faces.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDataset {
    pub subjects: Vec<SubjectSamples>,
    pub distractors: Vec<(String, Vec<f64>)>,
    pub feature_space_tag: String,
}

impl PairedDataset {
    pub fn from_synthetic(data: &SyntheticData, tag: impl Into<String>) -> Self {
        let subjects = data
            .labels
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let s = data.xs.column_vec(i);
                let d = data.xd.column_vec(i);
                SubjectSamples {
                    id: id.clone(),
                    skull_train: vec![s.clone()],
                    face_train: vec![d.clone()],
                    skull_probe: s,
                    face_gallery: d,
                }
            })
            .collect();
        let distractors = match &data.distractors {
            Some(m) => data
                .distractor_labels
                .iter()
                .enumerate()
                .map(|(i, id)| (id.clone(), m.column_vec(i)))
                .collect(),
            None => Vec::new(),
        };
        PairedDataset {
            subjects,
            distractors,
            feature_space_tag: tag.into(),
        }
    }

    pub fn feature_dim(&self) -> Result<usize> {
        let first = self
            .subjects
            .first()
            .ok_or_else(|| Error::EmptyInput("dataset has no mated subjects".into()))?;
        Ok(first.skull_probe.len())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.feature_dim()?;
        let mut seen = BTreeSet::new();
        for s in &self.subjects {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::ManifestContent(format!(
                    "subject `{}` appears twice",
                    s.id
                )));
            }
            if s.skull_train.len() != s.face_train.len() || s.skull_train.is_empty() {
                return Err(Error::Pairing(format!(
                    "subject `{}` has {} skull and {} face training variants",
                    s.id,
                    s.skull_train.len(),
                    s.face_train.len()
                )));
            }
            let lens = s
                .skull_train
                .iter()
                .chain(&s.face_train)
                .chain([&s.skull_probe, &s.face_gallery]);
            if lens.into_iter().any(|v| v.len() != n) {
                return Err(Error::FeatureSpace(format!(
                    "subject `{}` has features whose length differs from {n}",
                    s.id
                )));
            }
        }
        for (id, v) in &self.distractors {
            if seen.contains(id.as_str()) {
                return Err(Error::ManifestContent(format!(
                    "distractor identity `{id}` collides with a mated subject"
                )));
            }
            if v.len() != n {
                return Err(Error::FeatureSpace(format!(
                    "distractor `{id}` has {} features, expected {n}",
                    v.len()
                )));
            }
        }
        Ok(())
    }

    /// Stacks the training variants of `ids`, skull and face side by side in
    /// the same column order.
    pub fn training_matrices(&self, ids: &[String]) -> Result<(RealMatrix, RealMatrix)> {
        let by_id = self.subject_map();
        let mut skull = Vec::new();
        let mut face = Vec::new();
        for id in ids {
            let s = by_id
                .get(id.as_str())
                .ok_or_else(|| Error::NotEnrolled(id.clone()))?;
            skull.extend(s.skull_train.iter().cloned());
            face.extend(s.face_train.iter().cloned());
        }
        Ok((
            RealMatrix::from_columns(&skull)?,
            RealMatrix::from_columns(&face)?,
        ))
    }

    pub fn subject_ids(&self) -> Vec<String> {
        self.subjects.iter().map(|s| s.id.clone()).collect()
    }

    fn subject_map(&self) -> BTreeMap<&str, &SubjectSamples> {
        self.subjects.iter().map(|s| (s.id.as_str(), s)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold_index: usize,
    pub train_subjects: Vec<String>,
    pub test_subjects: Vec<String>,
    pub gallery_identities: usize,
    /// Rank of the true identity for each test subject, in `test_subjects` order.
    pub ranks: Vec<usize>,
    pub cmc: CmcCurve,
    pub rank1: f64,
    pub rank5: f64,
    pub fit: Option<FitReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub n_folds: usize,
    pub seed: u64,
    pub method: String,
    pub extended_gallery_size: usize,
    /// Always `"population"`: divisor is the number of folds.
    pub std_convention: &'static str,
    pub folds: Vec<FoldResult>,
    pub rank1_mean: f64,
    pub rank1_std: f64,
    pub rank5_mean: f64,
    pub rank5_std: f64,
}

/// Fits one model per fold and scores the held-out subjects.
pub fn run_protocol_on_dataset(
    data: &PairedDataset,
    config: &ProtocolConfig,
    hyper: &HyperParams,
    init: InitPolicy,
) -> Result<EvalReport> {
    data.validate()?;
    hyper.validate(data.feature_dim()?)?;
    let splits = splits_for(data, config)?;
    let folds = splits
        .par_iter()
        .map(|split| {
            let (xs, xd) = data.training_matrices(&split.train_subjects)?;
            let (model, report) = fit(&xs, &xd, hyper, init)?;
            let model = model.with_feature_space_tag(data.feature_space_tag.clone());
            score_fold(data, config, split, &model, Some(report))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(data, config, "shared_transform", folds))
}

/// Same folds and galleries, matched directly on the input features.
pub fn run_raw_baseline(data: &PairedDataset, config: &ProtocolConfig) -> Result<EvalReport> {
    data.validate()?;
    let n = data.feature_dim()?;
    let hyper = HyperParams {
        tau: n,
        ..HyperParams::for_dim(n)
    };
    let model = SharedTransformModel::new(
        RealMatrix::identity(n)?,
        hyper,
        data.feature_space_tag.clone(),
    )?;
    let folds = splits_for(data, config)?
        .iter()
        .map(|split| score_fold(data, config, split, &model, None))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(data, config, "raw_features", folds))
}

fn splits_for(data: &PairedDataset, config: &ProtocolConfig) -> Result<Vec<FoldSplit>> {
    make_folds(&data.subject_ids(), config.n_folds, config.seed)
}

fn score_fold(
    data: &PairedDataset,
    config: &ProtocolConfig,
    split: &FoldSplit,
    model: &SharedTransformModel,
    fit: Option<FitReport>,
) -> Result<FoldResult> {
    let by_id = data.subject_map();
    let mut columns = Vec::new();
    let mut labels = Vec::new();
    for id in &split.test_subjects {
        columns.push(by_id[id.as_str()].face_gallery.clone());
        labels.push(id.clone());
    }
    if config.protocol == Protocol::P2 {
        for (id, v) in &data.distractors {
            columns.push(v.clone());
            labels.push(id.clone());
        }
    }
    let gallery = build_gallery(
        model,
        &RealMatrix::from_columns(&columns)?,
        labels,
        &data.feature_space_tag,
    )?;
    let gallery_identities = gallery.identity_count();

    let ranks = split
        .test_subjects
        .iter()
        .map(|id| {
            let ranked = identify(model, &by_id[id.as_str()].skull_probe, &gallery)?;
            rank_of_true_match(&ranked, id)
        })
        .collect::<Result<Vec<_>>>()?;
    let cmc = compute_cmc(&ranks, gallery_identities)?;
    Ok(FoldResult {
        fold_index: split.fold_index,
        train_subjects: split.train_subjects.clone(),
        test_subjects: split.test_subjects.clone(),
        gallery_identities,
        rank1: cmc.at(1),
        rank5: cmc.at(5),
        ranks,
        cmc,
        fit,
    })
}

fn assemble(
    data: &PairedDataset,
    config: &ProtocolConfig,
    method: &str,
    folds: Vec<FoldResult>,
) -> EvalReport {
    let r1: Vec<f64> = folds.iter().map(|f| f.rank1).collect();
    let r5: Vec<f64> = folds.iter().map(|f| f.rank5).collect();
    let (rank1_mean, rank1_std) = mean_and_population_std(&r1);
    let (rank5_mean, rank5_std) = mean_and_population_std(&r5);
    EvalReport {
        protocol: config.protocol,
        n_folds: config.n_folds,
        seed: config.seed,
        method: method.to_string(),
        extended_gallery_size: match config.protocol {
            Protocol::P1 => 0,
            Protocol::P2 => data.distractors.len(),
        },
        std_convention: "population",
        folds,
        rank1_mean,
        rank1_std,
        rank5_mean,
        rank5_std,
    }
}
