//! Closed-form transform update.
//!
//! For fixed codes `A`, the problem
//!
//! ```text
//! min_T ‖TX − A‖²_F + λ1‖T‖²_F − λ2·ln|det T|
//! ```
//!
//! is solved exactly. With `XXᵀ + λ1·I = L·Lᵀ` and `L⁻¹·X·Aᵀ = U·Σ·Vᵀ`, the
//! minimizer is `T = ½·V·(Σ + (Σ² + 2λ2·I)^½)·Uᵀ·L⁻¹`. Every diagonal entry of
//! the middle factor is at least `√(λ2/2) > 0`, so `T` is nonsingular.

use nalgebra::{DMatrix, SVD};

use super::RealMatrix;
use crate::error::{Error, Result};

pub fn update_transform(
    x: &RealMatrix,
    a: &RealMatrix,
    lambda1: f64,
    lambda2: f64,
) -> Result<RealMatrix> {
    if !(lambda1 > 0.0 && lambda1.is_finite()) || !(lambda2 > 0.0 && lambda2.is_finite()) {
        return Err(Error::IllPosed(format!(
            "transform update needs lambda1 > 0 and lambda2 > 0 (got {lambda1}, {lambda2})"
        )));
    }
    if x.shape() != a.shape() {
        return Err(Error::Dimension(format!(
            "X is {}x{} but A is {}x{}",
            x.rows(),
            x.cols(),
            a.rows(),
            a.cols()
        )));
    }
    let n = x.rows();
    let x = x.as_matrix();
    let a = a.as_matrix();

    let mut gram = x * x.transpose();
    for i in 0..n {
        gram[(i, i)] += lambda1;
    }
    let chol = gram.clone().cholesky().ok_or_else(|| {
        Error::Numeric(format!(
            "Cholesky of XXᵀ + λ1·I failed ({})",
            condition_report(&gram)
        ))
    })?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::Numeric("Cholesky factor is singular".into()))?;

    let core = &l_inv * x * a.transpose();
    let svd = SVD::try_new(core, true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");

    let mut v_scaled = v_t.transpose();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let d = 0.5 * (s + (s * s + 2.0 * lambda2).sqrt());
        v_scaled.column_mut(k).scale_mut(d);
    }
    let t = v_scaled * u.transpose() * l_inv;
    RealMatrix::new(t)
        .map_err(|_| Error::Numeric("transform update produced non-finite values".into()))
}

/// Gradient of the transform-step objective with respect to `T`:
/// `2(TX − A)Xᵀ + 2λ1·T − λ2·T⁻ᵀ`.
pub fn transform_gradient(
    t: &RealMatrix,
    x: &RealMatrix,
    a: &RealMatrix,
    lambda1: f64,
    lambda2: f64,
) -> Result<DMatrix<f64>> {
    let inv = t
        .as_matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numeric("transform is singular".into()))?;
    let residual = t.as_matrix() * x.as_matrix() - a.as_matrix();
    Ok(
        residual * x.as_matrix().transpose() * 2.0 + t.as_matrix() * (2.0 * lambda1)
            - inv.transpose() * lambda2,
    )
}

fn condition_report(gram: &DMatrix<f64>) -> String {
    let sv = gram.singular_values();
    let max = sv.max();
    let min = sv.min();
    format!(
        "singular values in [{min:e}, {max:e}], condition {:e}",
        max / min
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_core::tl_objective;
    use crate::test_util::random_matrix;

    #[test]
    fn vanishing_regularizers_recover_identity() {
        let i = RealMatrix::identity(4).unwrap();
        let t = update_transform(&i, &i, 1e-8, 1e-8).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((t[(r, c)] - want).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn rejects_non_positive_weights() {
        let x = random_matrix(3, 5, 1);
        assert!(matches!(
            update_transform(&x, &x, 0.0, 1.0),
            Err(Error::IllPosed(_))
        ));
        assert!(matches!(
            update_transform(&x, &x, 1.0, -1.0),
            Err(Error::IllPosed(_))
        ));
    }

    #[test]
    fn stationary_and_nonsingular() {
        for seed in 0..8 {
            let x = random_matrix(5, 12, seed);
            let a = random_matrix(5, 12, 100 + seed);
            let t = update_transform(&x, &a, 0.5, 2.0).unwrap();
            let obj = tl_objective(&t, &x, &a, 0.5, 2.0).unwrap();
            assert!(obj.is_finite());
            let g = transform_gradient(&t, &x, &a, 0.5, 2.0).unwrap();
            assert!(
                g.norm() <= 1e-6 * (1.0 + obj.abs()),
                "gradient norm {}",
                g.norm()
            );
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let t = random_matrix(4, 4, 7);
        let x = random_matrix(4, 9, 8);
        let a = random_matrix(4, 9, 9);
        let (l1, l2) = (0.3, 1.7);
        let g = transform_gradient(&t, &x, &a, l1, l2).unwrap();
        let h = 1e-5;
        for r in 0..4 {
            for c in 0..4 {
                let mut plus = t.as_matrix().clone();
                plus[(r, c)] += h;
                let mut minus = t.as_matrix().clone();
                minus[(r, c)] -= h;
                let fp = tl_objective(&RealMatrix::new(plus).unwrap(), &x, &a, l1, l2).unwrap();
                let fm = tl_objective(&RealMatrix::new(minus).unwrap(), &x, &a, l1, l2).unwrap();
                let fd = (fp - fm) / (2.0 * h);
                assert!(
                    (fd - g[(r, c)]).abs() <= 1e-4 * g[(r, c)].abs().max(1.0),
                    "({r},{c}): fd {fd} vs analytic {}",
                    g[(r, c)]
                );
            }
        }
    }

    #[test]
    fn underdetermined_samples_are_fine() {
        let x = random_matrix(6, 2, 3);
        let a = random_matrix(6, 2, 4);
        let t = update_transform(&x, &a, 1.0, 1.0).unwrap();
        assert!(tl_objective(&t, &x, &a, 1.0, 1.0).unwrap().is_finite());
    }
}
