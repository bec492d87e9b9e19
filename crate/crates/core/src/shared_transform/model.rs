use crate::error::{Error, Result};
use crate::model_core::{hard_threshold, log_abs_det, HyperParams, RealMatrix};

/// A fitted shared transform together with the settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedTransformModel {
    transform: RealMatrix,
    hyper: HyperParams,
    feature_space_tag: String,
}

impl SharedTransformModel {
    pub fn new(
        transform: RealMatrix,
        hyper: HyperParams,
        feature_space_tag: impl Into<String>,
    ) -> Result<Self> {
        if transform.rows() != transform.cols() {
            return Err(Error::Dimension(format!(
                "transform must be square, got {}x{}",
                transform.rows(),
                transform.cols()
            )));
        }
        if !log_abs_det(&transform).is_finite() {
            return Err(Error::Numeric("transform is singular".into()));
        }
        hyper.validate(transform.rows())?;
        Ok(SharedTransformModel {
            transform,
            hyper,
            feature_space_tag: feature_space_tag.into(),
        })
    }

    pub fn with_feature_space_tag(mut self, tag: impl Into<String>) -> Self {
        self.feature_space_tag = tag.into();
        self
    }

    pub fn transform(&self) -> &RealMatrix {
        &self.transform
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    pub fn feature_dim(&self) -> usize {
        self.transform.rows()
    }

    pub fn feature_space_tag(&self) -> &str {
        &self.feature_space_tag
    }

    /// Number of learned parameters: the entries of the single `n×n` transform.
    pub fn parameter_count(&self) -> usize {
        self.transform.len()
    }

    /// Sparse codes `hard_threshold(T·X)` for samples stored as columns of `x`.
    pub fn encode(&self, x: &RealMatrix) -> Result<RealMatrix> {
        if x.rows() != self.feature_dim() {
            return Err(Error::FeatureSpace(format!(
                "model expects {} features per sample, got {}",
                self.feature_dim(),
                x.rows()
            )));
        }
        hard_threshold(&self.transform.matmul(x)?, &self.hyper.sparsity()?)
    }

    /// Encodes a single sample.
    pub fn encode_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        let col = RealMatrix::from_column_slice(x.len(), 1, x)?;
        Ok(self.encode(&col)?.column_vec(0))
    }
}

/// Shorthand for the stateless encoding operation.
pub fn encode(model: &SharedTransformModel, x: &RealMatrix) -> Result<RealMatrix> {
    model.encode(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::random_matrix;

    #[test]
    fn identity_model_with_full_tau_is_passthrough() {
        let mut h = HyperParams::for_dim(5);
        h.tau = 5;
        let m = SharedTransformModel::new(RealMatrix::identity(5).unwrap(), h, "raw").unwrap();
        let x = random_matrix(5, 3, 9);
        assert_eq!(m.encode(&x).unwrap(), x);
        assert_eq!(m.parameter_count(), 25);
    }

    #[test]
    fn codes_respect_tau_and_dimension() {
        let h = HyperParams::for_dim(6);
        let m = SharedTransformModel::new(random_matrix(6, 6, 1), h, "raw").unwrap();
        let codes = m.encode(&random_matrix(6, 10, 2)).unwrap();
        assert!(h.sparsity().unwrap().admits(&codes));
        assert!(matches!(
            m.encode(&random_matrix(5, 1, 3)),
            Err(Error::FeatureSpace(_))
        ));
        assert_eq!(m.encode_vector(&[1.0; 6]).unwrap().len(), 6);
    }

    #[test]
    fn rejects_singular_transform() {
        let t = RealMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(SharedTransformModel::new(t, HyperParams::for_dim(2), "x").is_err());
    }
}
