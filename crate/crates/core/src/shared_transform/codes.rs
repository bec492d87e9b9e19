use crate::error::{Error, Result};
use crate::model_core::{hard_threshold, RealMatrix, SparsityPolicy};

/// Exact sparse minimizer of `‖T·Xs − As‖²_F + λ3‖Ad − As‖²_F` over `As`.
///
/// The unconstrained minimizer is the weighted average
/// `(T·Xs + λ3·Ad) / (1 + λ3)`; the objective is entrywise separable with
/// equal curvature, so hard thresholding that average is globally optimal
/// under the per-column constraint.
pub fn update_code_skull(
    t: &RealMatrix,
    xs: &RealMatrix,
    a_d: &RealMatrix,
    lambda3: f64,
    policy: &SparsityPolicy,
) -> Result<RealMatrix> {
    coupled_code(t, xs, a_d, lambda3, policy)
}

/// Face-side counterpart of [`update_code_skull`]: minimizes
/// `‖T·Xd − Ad‖²_F + λ3‖Ad − As‖²_F` over `Ad`.
pub fn update_code_face(
    t: &RealMatrix,
    xd: &RealMatrix,
    a_s: &RealMatrix,
    lambda3: f64,
    policy: &SparsityPolicy,
) -> Result<RealMatrix> {
    coupled_code(t, xd, a_s, lambda3, policy)
}

fn coupled_code(
    t: &RealMatrix,
    x: &RealMatrix,
    partner: &RealMatrix,
    lambda3: f64,
    policy: &SparsityPolicy,
) -> Result<RealMatrix> {
    if !(lambda3 >= 0.0 && lambda3.is_finite()) {
        return Err(Error::Config(format!(
            "lambda3 must be nonnegative (got {lambda3})"
        )));
    }
    let projected = t.matmul(x)?;
    if projected.shape() != partner.shape() {
        return Err(Error::Dimension(format!(
            "projected codes are {}x{} but partner codes are {}x{}",
            projected.rows(),
            projected.cols(),
            partner.rows(),
            partner.cols()
        )));
    }
    // m + κ(p − m) with κ = λ3/(1+λ3): equals m exactly when p == m or λ3 == 0
    let kappa = lambda3 / (1.0 + lambda3);
    let mut avg = projected.into_inner();
    avg.zip_apply(partner.as_matrix(), |m, p| *m += kappa * (p - *m));
    hard_threshold(&RealMatrix::new(avg)?, policy)
}
