//! Matrix type, sparsity operator, objectives and the closed-form transform
//! update shared by every fitting procedure.

mod matrix;
mod objective;
mod sparsity;
mod transform;

use serde::{Deserialize, Serialize};

pub use matrix::RealMatrix;
pub use objective::{log_abs_det, shared_objective, tl_objective};
pub use sparsity::{hard_threshold, SparsityPolicy, SparsityScope};
pub use transform::{transform_gradient, update_transform};

use crate::error::{Error, Result};

/// Weights, sparsity level and stopping rule for fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Frobenius regularizer weight.
    pub lambda1: f64,
    /// Log-determinant regularizer weight.
    pub lambda2: f64,
    /// Cross-domain coupling weight.
    pub lambda3: f64,
    /// Nonzeros kept per code column.
    pub tau: usize,
    pub max_iters: usize,
    /// Relative objective change below which fitting stops.
    pub rel_tol: f64,
}

impl HyperParams {
    /// Shipped defaults for feature dimension `n`; `tau = ceil(n / 2)`.
    pub fn for_dim(n: usize) -> Self {
        HyperParams {
            lambda1: 1.0,
            lambda2: 1.0,
            lambda3: 0.5,
            tau: default_tau(n),
            max_iters: 50,
            rel_tol: 1e-6,
        }
    }

    /// Checks the parameters against a feature dimension.
    pub fn validate(&self, n: usize) -> Result<()> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !(self.lambda1 > 0.0 && self.lambda1.is_finite())
            || !(self.lambda2 > 0.0 && self.lambda2.is_finite())
        {
            return Err(Error::IllPosed(format!(
                "lambda1 and lambda2 must be positive (got {}, {})",
                self.lambda1, self.lambda2
            )));
        }
        if !finite_nonneg(self.lambda3) {
            return Err(Error::Config(format!(
                "lambda3 must be nonnegative (got {})",
                self.lambda3
            )));
        }
        if self.tau == 0 || self.tau > n {
            return Err(Error::Config(format!(
                "tau must lie in 1..={n} (got {})",
                self.tau
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Config(format!(
                "rel_tol must be positive (got {})",
                self.rel_tol
            )));
        }
        Ok(())
    }

    pub fn sparsity(&self) -> Result<SparsityPolicy> {
        SparsityPolicy::per_column(self.tau)
    }
}

pub fn default_tau(n: usize) -> usize {
    n.div_ceil(2).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_use_half_dimension() {
        assert_eq!(HyperParams::for_dim(32).tau, 16);
        assert_eq!(HyperParams::for_dim(7).tau, 4);
        assert_eq!(HyperParams::for_dim(1).tau, 1);
    }

    #[test]
    fn validation() {
        let h = HyperParams::for_dim(8);
        assert!(h.validate(8).is_ok());
        assert!(h.validate(3).is_err());
        assert!(HyperParams { lambda1: 0.0, ..h }.validate(8).is_err());
        assert!(HyperParams { lambda3: -1.0, ..h }.validate(8).is_err());
        assert!(HyperParams { rel_tol: 0.0, ..h }.validate(8).is_err());
    }
}
