use serde::{Deserialize, Serialize};

use super::image::GrayImage;

/// Mirror / brightness / contrast variants generated for training images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentationPolicy {
    pub flip: bool,
    pub brightness_deltas: Vec<i32>,
    pub contrast_factors: Vec<f64>,
}

impl Default for AugmentationPolicy {
    fn default() -> Self {
        AugmentationPolicy {
            flip: true,
            brightness_deltas: vec![25, -25],
            contrast_factors: vec![1.25, 0.8],
        }
    }
}

impl AugmentationPolicy {
    pub fn none() -> Self {
        AugmentationPolicy {
            flip: false,
            brightness_deltas: Vec::new(),
            contrast_factors: Vec::new(),
        }
    }

    pub fn variant_count(&self) -> usize {
        (1 + self.flip as usize) * (1 + self.brightness_deltas.len() + self.contrast_factors.len())
    }
}

/// `{original, mirror} × {identity, brightness deltas…, contrast factors…}`,
/// original first.
pub fn augment(img: &GrayImage, policy: &AugmentationPolicy) -> Vec<GrayImage> {
    let mut bases = vec![img.clone()];
    if policy.flip {
        bases.push(img.flip_horizontal());
    }
    let mut out = Vec::with_capacity(policy.variant_count());
    for base in &bases {
        out.push(base.clone());
        for &delta in &policy.brightness_deltas {
            out.push(base.map(|p| (p as i32 + delta).clamp(0, 255) as u8));
        }
        for &factor in &policy.contrast_factors {
            out.push(base.map(|p| {
                (128.0 + factor * (p as f64 - 128.0))
                    .round()
                    .clamp(0.0, 255.0) as u8
            }));
        }
    }
    out
}
