//! Gallery enrollment and closed-set identification by minimum squared
//! Euclidean distance between sparse codes.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model_core::RealMatrix;
use crate::shared_transform::SharedTransformModel;

/// Encoded gallery: one code column per enrolled image.
#[derive(Debug, Clone, PartialEq)]
pub struct Gallery {
    codes: RealMatrix,
    labels: Vec<String>,
    feature_space_tag: String,
}

impl Gallery {
    pub fn codes(&self) -> &RealMatrix {
        &self.codes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn feature_space_tag(&self) -> &str {
        &self.feature_space_tag
    }

    /// Number of distinct enrolled identities.
    pub fn identity_count(&self) -> usize {
        let mut ids: Vec<&String> = self.labels.iter().collect();
        ids.sort();
        ids.dedup();
        ids.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEntry {
    pub identity: String,
    pub distance: f64,
}

/// Identities in ascending distance order, each listed once.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedList {
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn top(&self) -> Option<&RankedEntry> {
        self.entries.first()
    }
}

/// Encodes gallery features (one column per image) with the model.
///
/// `features_tag` names the extractor that produced `features`; it must match
/// the model's feature space.
pub fn build_gallery(
    model: &SharedTransformModel,
    features: &RealMatrix,
    labels: Vec<String>,
    features_tag: &str,
) -> Result<Gallery> {
    if labels.len() != features.cols() {
        return Err(Error::Dimension(format!(
            "{} labels for {} gallery columns",
            labels.len(),
            features.cols()
        )));
    }
    if features_tag != model.feature_space_tag() {
        return Err(Error::FeatureSpace(format!(
            "gallery features are `{features_tag}` but the model was trained on `{}`",
            model.feature_space_tag()
        )));
    }
    Ok(Gallery {
        codes: model.encode(features)?,
        labels,
        feature_space_tag: features_tag.to_string(),
    })
}

/// Ranks every gallery identity against one probe feature vector.
pub fn identify(
    model: &SharedTransformModel,
    probe: &[f64],
    gallery: &Gallery,
) -> Result<RankedList> {
    if gallery.labels.is_empty() {
        return Err(Error::EmptyGallery);
    }
    if gallery.feature_space_tag != model.feature_space_tag() {
        return Err(Error::FeatureSpace(format!(
            "gallery is `{}` but the model is `{}`",
            gallery.feature_space_tag,
            model.feature_space_tag()
        )));
    }
    if probe.len() != model.feature_dim() {
        return Err(Error::Dimension(format!(
            "probe has {} features, model expects {}",
            probe.len(),
            model.feature_dim()
        )));
    }
    let code = model.encode_vector(probe)?;
    Ok(rank_codes(&code, gallery))
}

/// Ranking of a precomputed probe code.
pub fn rank_codes(code: &[f64], gallery: &Gallery) -> RankedList {
    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for (col, label) in gallery.codes.column_iter().zip(&gallery.labels) {
        let d: f64 = col.iter().zip(code).map(|(g, p)| (g - p) * (g - p)).sum();
        best.entry(label.as_str())
            .and_modify(|cur| {
                if d < *cur {
                    *cur = d;
                }
            })
            .or_insert(d);
    }
    let mut entries: Vec<RankedEntry> = best
        .into_iter()
        .map(|(identity, distance)| RankedEntry {
            identity: identity.to_string(),
            distance,
        })
        .collect();
    // BTreeMap order is lexicographic; a stable sort keeps it among equal distances
    entries.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    RankedList { entries }
}

/// 1-based position of `true_identity` in `ranked`.
pub fn rank_of_true_match(ranked: &RankedList, true_identity: &str) -> Result<usize> {
    ranked
        .entries
        .iter()
        .position(|e| e.identity == true_identity)
        .map(|p| p + 1)
        .ok_or_else(|| Error::NotEnrolled(true_identity.to_string()))
}
