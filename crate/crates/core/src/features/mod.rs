//! Image loading, raw-pixel and HOG feature extraction, and training-time
//! augmentation.

mod augment;
mod hog;
mod image;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use augment::{augment, AugmentationPolicy};
pub use hog::{cell_histograms, extract_hog, HogParams};
pub use image::{decode_pgm, load_gray, resize_to_canonical, save_pgm, GrayImage};

use crate::error::{Error, Result};

/// Resize to `size × size`, flatten row-major and scale to `[0, 1]`.
pub fn extract_raw(img: &GrayImage, size: usize) -> Result<Vec<f64>> {
    let img = resize_to_canonical(img, size, size)?;
    Ok(img.pixels().iter().map(|&p| p as f64 / 255.0).collect())
}

/// Which features a pipeline feeds into the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureSpec {
    Raw {
        #[serde(default = "default_raw_size")]
        size: usize,
    },
    Hog(HogParams),
    /// Feature vectors stored as whitespace/comma separated text files.
    Precomputed,
}

fn default_raw_size() -> usize {
    64
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec::Hog(HogParams::default())
    }
}

impl FeatureSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FeatureSpec::Raw { size: 0 } => {
                Err(Error::Config("raw feature size must be positive".into()))
            }
            FeatureSpec::Hog(p) => p.validate(),
            _ => Ok(()),
        }
    }

    /// Feature length, when the feature kind alone determines it.
    pub fn dim(&self) -> Option<usize> {
        match self {
            FeatureSpec::Raw { size } => Some(size * size),
            FeatureSpec::Hog(p) => Some(p.descriptor_len()),
            FeatureSpec::Precomputed => None,
        }
    }

    /// Canonical text label stored with models so encodings can be matched to
    /// the extractor that produced their training data.
    pub fn tag(&self) -> String {
        match self {
            FeatureSpec::Raw { size } => format!("raw:size={size}"),
            FeatureSpec::Hog(p) => format!(
                "hog:size={},cell={},block={},stride={},bins={},clip={}",
                p.canonical_size,
                p.cell_size,
                p.block_size,
                p.block_stride,
                p.orientation_bins,
                p.clip
            ),
            FeatureSpec::Precomputed => "precomputed".to_string(),
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        let bad = || Error::FeatureSpace(format!("unrecognized feature-space tag `{tag}`"));
        let (kind, rest) = tag.split_once(':').unwrap_or((tag, ""));
        let field = |name: &str| -> Result<&str> {
            rest.split(',')
                .find_map(|kv| kv.strip_prefix(name).and_then(|v| v.strip_prefix('=')))
                .ok_or_else(bad)
        };
        let spec = match kind {
            "raw" => FeatureSpec::Raw {
                size: field("size")?.parse().map_err(|_| bad())?,
            },
            "hog" => FeatureSpec::Hog(HogParams {
                canonical_size: field("size")?.parse().map_err(|_| bad())?,
                cell_size: field("cell")?.parse().map_err(|_| bad())?,
                block_size: field("block")?.parse().map_err(|_| bad())?,
                block_stride: field("stride")?.parse().map_err(|_| bad())?,
                orientation_bins: field("bins")?.parse().map_err(|_| bad())?,
                clip: field("clip")?.parse().map_err(|_| bad())?,
            }),
            "precomputed" => FeatureSpec::Precomputed,
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn extract(&self, img: &GrayImage) -> Result<Vec<f64>> {
        match self {
            FeatureSpec::Raw { size } => extract_raw(img, *size),
            FeatureSpec::Hog(p) => extract_hog(img, p),
            FeatureSpec::Precomputed => Err(Error::FeatureSpace(
                "precomputed features cannot be extracted from an image".into(),
            )),
        }
    }

    /// Features for the file at `path`; with `augmentation`, one vector per
    /// augmented variant (original first). Precomputed vectors are never
    /// augmented.
    pub fn load(
        &self,
        path: &Path,
        augmentation: Option<&AugmentationPolicy>,
    ) -> Result<Vec<Vec<f64>>> {
        match self {
            FeatureSpec::Precomputed => Ok(vec![load_feature_file(path)?]),
            _ => {
                let img = load_gray(path)?;
                match augmentation {
                    Some(policy) => augment(&img, policy)
                        .iter()
                        .map(|v| self.extract(v))
                        .collect(),
                    None => Ok(vec![self.extract(&img)?]),
                }
            }
        }
    }
}

pub fn load_feature_file(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let values: std::result::Result<Vec<f64>, _> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::parse::<f64>)
        .collect();
    let values = values.map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: format!("bad feature value: {e}"),
    })?;
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Image {
            path: path.to_path_buf(),
            message: "feature file must hold at least one finite value".into(),
        });
    }
    Ok(values)
}

pub fn save_feature_file(values: &[f64], path: &Path) -> Result<()> {
    let text: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
    fs::write(path, text.join("\n") + "\n").map_err(|e| Error::io(path, e))
}
