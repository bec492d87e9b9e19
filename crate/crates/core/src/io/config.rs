use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{Protocol, ProtocolConfig, SyntheticConfig};
use crate::features::{AugmentationPolicy, FeatureSpec};
use crate::model_core::{default_tau, HyperParams};
use crate::shared_transform::InitPolicy;

/// Hyperparameters as written in a config file; `tau` defaults to half the
/// feature dimension once that is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl Default for HyperConfig {
    fn default() -> Self {
        let h = HyperParams::for_dim(1);
        HyperConfig {
            lambda1: h.lambda1,
            lambda2: h.lambda2,
            lambda3: h.lambda3,
            tau: None,
            max_iters: h.max_iters,
            rel_tol: h.rel_tol,
        }
    }
}

impl HyperConfig {
    pub fn resolve(&self, n: usize) -> Result<HyperParams> {
        let h = HyperParams {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            lambda3: self.lambda3,
            tau: self.tau.unwrap_or_else(|| default_tau(n)),
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
        };
        h.validate(n)?;
        Ok(h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub protocol: Protocol,
    pub n_folds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extended_gallery_manifest: Option<PathBuf>,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        ProtocolSection {
            protocol: Protocol::P1,
            n_folds: 5,
            extended_gallery_manifest: None,
        }
    }
}

/// Everything a CLI run depends on. Echoed verbatim into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub hyper: HyperConfig,
    pub init: InitPolicy,
    pub features: FeatureSpec,
    pub augmentation: AugmentationPolicy,
    pub protocol: ProtocolSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: None,
            hyper: HyperConfig::default(),
            init: InitPolicy::Identity,
            features: FeatureSpec::default(),
            augmentation: AugmentationPolicy::default(),
            protocol: ProtocolSection::default(),
            synthetic: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration is always representable as TOML")
    }

    /// Checks everything that does not depend on the data.
    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        // The upper bound on tau needs the feature dimension, checked at fit time.
        self.hyper.resolve(usize::MAX).map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        if self.protocol.n_folds < 2 {
            return Err(Error::Config(format!(
                "n_folds must be at least 2 (got {})",
                self.protocol.n_folds
            )));
        }
        for (i, f) in self.augmentation.contrast_factors.iter().enumerate() {
            if !(f.is_finite() && *f >= 0.0) {
                return Err(Error::Config(format!(
                    "contrast factor #{i} must be nonnegative"
                )));
            }
        }
        if let Some(s) = &self.synthetic {
            s.validate()?;
        }
        Ok(())
    }

    pub fn protocol_config(&self) -> ProtocolConfig {
        ProtocolConfig {
            protocol: self.protocol.protocol,
            n_folds: self.protocol.n_folds,
            extended_gallery_manifest: self.protocol.extended_gallery_manifest.clone(),
            seed: self.seed,
        }
    }
}
