//! Seeded two-domain data: each subject has a latent vector observed through a
//! different linear map per domain, plus noise.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_core::RealMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_subjects: usize,
    /// Latent dimension `k`.
    pub latent_dim: usize,
    /// Observed dimension `n`.
    pub feature_dim: usize,
    pub noise_sigma_skull: f64,
    pub noise_sigma_face: f64,
    /// Blend between the two mixing maps: the face map is
    /// `√(1 − g²)·Ms + g·E` with `E` independent of `Ms`. `0` gives identical
    /// maps; the default `1` draws the face map independently.
    pub domain_gap: f64,
    /// Extra face-only identities for extended-gallery runs.
    pub n_distractors: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_subjects: 40,
            latent_dim: 8,
            feature_dim: 32,
            noise_sigma_skull: 0.05,
            noise_sigma_face: 0.05,
            domain_gap: 1.0,
            n_distractors: 0,
            seed: 7,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 || self.latent_dim == 0 || self.feature_dim == 0 {
            return Err(Error::Config("synthetic sizes must be positive".into()));
        }
        if self.latent_dim > self.feature_dim {
            return Err(Error::Config(format!(
                "latent dimension {} exceeds feature dimension {}",
                self.latent_dim, self.feature_dim
            )));
        }
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.noise_sigma_skull) || !ok(self.noise_sigma_face) {
            return Err(Error::Config("noise sigmas must be nonnegative".into()));
        }
        if !(0.0..=1.0).contains(&self.domain_gap) {
            return Err(Error::Config(format!(
                "domain_gap must lie in [0, 1] (got {})",
                self.domain_gap
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    /// Skull-domain samples, one column per subject.
    pub xs: RealMatrix,
    /// Face-domain samples, aligned with `xs`.
    pub xd: RealMatrix,
    pub labels: Vec<String>,
    /// Face-only distractor samples, if any were requested.
    pub distractors: Option<RealMatrix>,
    pub distractor_labels: Vec<String>,
}

/// Column-major standard normal fill.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn synth_generate(cfg: &SyntheticConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    let (n, k) = (cfg.feature_dim, cfg.latent_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mix_s = gaussian_matrix(n, k, &mut rng);
    let extra = gaussian_matrix(n, k, &mut rng);
    let keep = (1.0 - cfg.domain_gap * cfg.domain_gap).sqrt();
    let mix_d = &mix_s * keep + &extra * cfg.domain_gap;
    for (name, m) in [("skull", &mix_s), ("face", &mix_d)] {
        let sv = m.singular_values();
        if sv.min() <= 1e-10 * sv.max() {
            return Err(Error::Numeric(format!(
                "{name} mixing matrix is rank deficient"
            )));
        }
    }

    let mut skull_cols = Vec::with_capacity(cfg.n_subjects);
    let mut face_cols = Vec::with_capacity(cfg.n_subjects);
    for _ in 0..cfg.n_subjects {
        let z = gaussian_matrix(k, 1, &mut rng);
        let es = gaussian_matrix(n, 1, &mut rng);
        let ed = gaussian_matrix(n, 1, &mut rng);
        skull_cols.push(unit(&mix_s * &z + es * cfg.noise_sigma_skull));
        face_cols.push(unit(&mix_d * &z + ed * cfg.noise_sigma_face));
    }
    let mut distractor_cols = Vec::with_capacity(cfg.n_distractors);
    for _ in 0..cfg.n_distractors {
        let z = gaussian_matrix(k, 1, &mut rng);
        let ed = gaussian_matrix(n, 1, &mut rng);
        distractor_cols.push(unit(&mix_d * &z + ed * cfg.noise_sigma_face));
    }

    Ok(SyntheticData {
        xs: RealMatrix::from_columns(&skull_cols)?,
        xd: RealMatrix::from_columns(&face_cols)?,
        labels: (0..cfg.n_subjects).map(|i| format!("s{i:04}")).collect(),
        distractors: if distractor_cols.is_empty() {
            None
        } else {
            Some(RealMatrix::from_columns(&distractor_cols)?)
        },
        distractor_labels: (0..cfg.n_distractors).map(|i| format!("d{i:04}")).collect(),
    })
}

fn unit(v: DMatrix<f64>) -> Vec<f64> {
    let v = DVector::from_column_slice(v.as_slice());
    let norm = v.norm();
    if norm > 0.0 {
        (v / norm).iter().copied().collect()
    } else {
        v.iter().copied().collect()
    }
}
