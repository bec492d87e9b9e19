use serde::{Deserialize, Serialize};

use super::RealMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SparsityScope {
    PerColumn,
}

/// The `‖a‖₀ ≤ tau` constraint applied to code matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparsityPolicy {
    pub scope: SparsityScope,
    pub tau: usize,
}

impl SparsityPolicy {
    pub fn per_column(tau: usize) -> Result<Self> {
        if tau == 0 {
            return Err(Error::Config("sparsity tau must be positive".into()));
        }
        Ok(SparsityPolicy {
            scope: SparsityScope::PerColumn,
            tau,
        })
    }

    /// True if `m` satisfies the constraint.
    pub fn admits(&self, m: &RealMatrix) -> bool {
        match self.scope {
            SparsityScope::PerColumn => m
                .column_iter()
                .all(|c| c.iter().filter(|v| **v != 0.0).count() <= self.tau),
        }
    }
}

/// Keeps the `tau` largest-magnitude entries of every column and zeroes the rest.
///
/// Kept entries are copied verbatim. Equal magnitudes are resolved in favour of
/// the smaller row index.
pub fn hard_threshold(m: &RealMatrix, policy: &SparsityPolicy) -> Result<RealMatrix> {
    let SparsityScope::PerColumn = policy.scope;
    let rows = m.rows();
    if policy.tau > rows {
        return Err(Error::Dimension(format!(
            "tau = {} exceeds column length {rows}",
            policy.tau
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("hard_threshold input"));
    }
    let mut out = m.as_matrix().clone();
    if policy.tau == rows {
        return RealMatrix::new(out);
    }
    let mut order: Vec<usize> = (0..rows).collect();
    for mut col in out.column_iter_mut() {
        order.sort_unstable();
        // descending magnitude, ascending row index on ties
        order.sort_by(|&a, &b| col[b].abs().total_cmp(&col[a].abs()).then(a.cmp(&b)));
        for &r in &order[policy.tau..] {
            col[r] = 0.0;
        }
    }
    RealMatrix::new(out)
}
