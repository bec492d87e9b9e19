use super::{HyperParams, RealMatrix};
use crate::error::{Error, Result};

/// `ln |det m|`, or `-inf` when `m` is singular.
pub fn log_abs_det(m: &RealMatrix) -> f64 {
    debug_assert_eq!(m.rows(), m.cols());
    let lu = m.as_matrix().clone().lu();
    let u = lu.u();
    (0..u.nrows()).map(|i| u[(i, i)].abs().ln()).sum()
}

/// `‖TX − A‖²_F + λ1‖T‖²_F − λ2·ln|det T|`.
///
/// A singular `T` yields `f64::INFINITY`; callers that iterate on the value
/// treat a non-finite objective as a numeric failure.
pub fn tl_objective(
    t: &RealMatrix,
    x: &RealMatrix,
    a: &RealMatrix,
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    check_square(t)?;
    check_same_shape("X", x, "A", a)?;
    if t.cols() != x.rows() {
        return Err(Error::Dimension(format!(
            "transform is {}x{} but samples have {} rows",
            t.rows(),
            t.cols(),
            x.rows()
        )));
    }
    let fit = residual_sq(t, x, a);
    regularized(t, fit, lambda1, lambda2)
}

/// Full shared-transform objective over mated pairs: the two fidelity terms,
/// both regularizers and `λ3‖Ad − As‖²_F`.
pub fn shared_objective(
    t: &RealMatrix,
    xs: &RealMatrix,
    xd: &RealMatrix,
    a_s: &RealMatrix,
    a_d: &RealMatrix,
    hyper: &HyperParams,
) -> Result<f64> {
    check_square(t)?;
    if xs.cols() != xd.cols() {
        return Err(Error::Pairing(format!(
            "{} skull samples vs {} face samples",
            xs.cols(),
            xd.cols()
        )));
    }
    check_same_shape("Xs", xs, "As", a_s)?;
    check_same_shape("Xd", xd, "Ad", a_d)?;
    check_same_shape("Xs", xs, "Xd", xd)?;
    if t.cols() != xs.rows() {
        return Err(Error::Dimension(format!(
            "transform is {}x{} but samples have {} rows",
            t.rows(),
            t.cols(),
            xs.rows()
        )));
    }
    let fit = residual_sq(t, xs, a_s) + residual_sq(t, xd, a_d);
    let coupling: f64 = a_d
        .iter()
        .zip(a_s.iter())
        .map(|(d, s)| (d - s) * (d - s))
        .sum();
    let base = regularized(t, fit, hyper.lambda1, hyper.lambda2)?;
    Ok(base + hyper.lambda3 * coupling)
}

fn residual_sq(t: &RealMatrix, x: &RealMatrix, a: &RealMatrix) -> f64 {
    let tx = t.as_matrix() * x.as_matrix();
    tx.iter()
        .zip(a.iter())
        .map(|(p, q)| (p - q) * (p - q))
        .sum()
}

fn regularized(t: &RealMatrix, fit: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    let logdet = log_abs_det(t);
    if !logdet.is_finite() {
        return Ok(f64::INFINITY);
    }
    let value = fit + lambda1 * t.frobenius_sq() - lambda2 * logdet;
    if value.is_nan() {
        return Err(Error::NonFinite("objective"));
    }
    Ok(value)
}

fn check_square(t: &RealMatrix) -> Result<()> {
    if t.rows() != t.cols() {
        return Err(Error::Dimension(format!(
            "transform must be square, got {}x{}",
            t.rows(),
            t.cols()
        )));
    }
    Ok(())
}

fn check_same_shape(an: &str, a: &RealMatrix, bn: &str, b: &RealMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "{an} is {}x{} but {bn} is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}
