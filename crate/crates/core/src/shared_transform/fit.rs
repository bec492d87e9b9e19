use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::codes::{update_code_face, update_code_skull};
use super::model::SharedTransformModel;
use crate::error::{Error, Result};
use crate::evaluation::gaussian_matrix;
use crate::model_core::{
    hard_threshold, shared_objective, update_transform, HyperParams, RealMatrix,
};

/// Starting transform for alternating minimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitPolicy {
    #[default]
    Identity,
    /// Q factor of a seeded Gaussian matrix.
    RandomOrthonormal { seed: u64 },
}

/// How the two code blocks are refreshed after each transform step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeSchedule {
    /// Both code updates read the partner code from before the code phase.
    /// Any column where that pair would raise the objective is redone
    /// sequentially, so the objective never increases.
    #[default]
    Simultaneous,
    /// `As` first, then `Ad` against the new `As`.
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    /// Objective after each completed outer iteration.
    pub objective_trace: Vec<f64>,
    pub initial_objective: f64,
    pub iterations_run: usize,
    pub converged: bool,
    pub final_objective: f64,
    /// Columns where the simultaneous code pair was replaced by a sequential one.
    pub sequential_fallbacks: usize,
}

/// Final state of the alternating minimization.
#[derive(Debug, Clone)]
pub struct FitState {
    pub model: SharedTransformModel,
    pub report: FitReport,
    pub skull_codes: RealMatrix,
    pub face_codes: RealMatrix,
    /// `‖Ad − As‖_F` after each outer iteration.
    pub coupling_trace: Vec<f64>,
}

/// Learns a shared transform from mated samples (column `i` of `xs` and `xd`
/// belong to the same subject).
pub fn fit(
    xs: &RealMatrix,
    xd: &RealMatrix,
    hyper: &HyperParams,
    init: InitPolicy,
) -> Result<(SharedTransformModel, FitReport)> {
    let state = fit_detailed(xs, xd, hyper, init, CodeSchedule::default())?;
    Ok((state.model, state.report))
}

pub fn fit_detailed(
    xs: &RealMatrix,
    xd: &RealMatrix,
    hyper: &HyperParams,
    init: InitPolicy,
    schedule: CodeSchedule,
) -> Result<FitState> {
    if xs.cols() != xd.cols() {
        return Err(Error::Pairing(format!(
            "{} skull samples vs {} face samples",
            xs.cols(),
            xd.cols()
        )));
    }
    if xs.rows() != xd.rows() {
        return Err(Error::Dimension(format!(
            "skull features have {} rows, face features {}",
            xs.rows(),
            xd.rows()
        )));
    }
    let n = xs.rows();
    hyper.validate(n)?;
    let policy = hyper.sparsity()?;
    let stacked_x = xs.hstack(xd)?;

    let mut t = initial_transform(n, init)?;
    let mut a_s = hard_threshold(&t.matmul(xs)?, &policy)?;
    let mut a_d = hard_threshold(&t.matmul(xd)?, &policy)?;
    let initial_objective = finite(shared_objective(&t, xs, xd, &a_s, &a_d, hyper)?)?;

    let mut prev = initial_objective;
    let mut trace = Vec::with_capacity(hyper.max_iters);
    let mut coupling_trace = Vec::with_capacity(hyper.max_iters);
    let mut converged = false;
    let mut fallbacks = 0;

    for _ in 0..hyper.max_iters {
        t = update_transform(&stacked_x, &a_s.hstack(&a_d)?, hyper.lambda1, hyper.lambda2)?;

        let new_s = update_code_skull(&t, xs, &a_d, hyper.lambda3, &policy)?;
        let sequential_d = update_code_face(&t, xd, &new_s, hyper.lambda3, &policy)?;
        let new_d = match schedule {
            CodeSchedule::Sequential => sequential_d,
            CodeSchedule::Simultaneous => {
                let parallel_d = update_code_face(&t, xd, &a_s, hyper.lambda3, &policy)?;
                let (chosen, rejected) = choose_face_codes(
                    &t,
                    xs,
                    xd,
                    (&a_s, &a_d),
                    &new_s,
                    parallel_d,
                    &sequential_d,
                    hyper.lambda3,
                )?;
                fallbacks += rejected;
                chosen
            }
        };
        a_s = new_s;
        a_d = new_d;

        let cur = finite(shared_objective(&t, xs, xd, &a_s, &a_d, hyper)?)?;
        trace.push(cur);
        coupling_trace.push(distance(&a_s, &a_d));
        if (prev - cur).abs() <= hyper.rel_tol * prev.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        prev = cur;
    }

    let report = FitReport {
        iterations_run: trace.len(),
        final_objective: *trace.last().unwrap_or(&initial_objective),
        objective_trace: trace,
        initial_objective,
        converged,
        sequential_fallbacks: fallbacks,
    };
    Ok(FitState {
        model: SharedTransformModel::new(t, *hyper, String::new())?,
        report,
        skull_codes: a_s,
        face_codes: a_d,
        coupling_trace,
    })
}

fn initial_transform(n: usize, init: InitPolicy) -> Result<RealMatrix> {
    if n == 0 {
        return Err(Error::EmptyInput("feature dimension is zero".into()));
    }
    match init {
        InitPolicy::Identity => RealMatrix::identity(n),
        InitPolicy::RandomOrthonormal { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g: DMatrix<f64> = gaussian_matrix(n, n, &mut rng);
            RealMatrix::new(g.qr().q())
        }
    }
}

/// Per column, keeps the simultaneous face code when the column objective
/// does not exceed its pre-update value, else the sequential one.
#[allow(clippy::too_many_arguments)]
fn choose_face_codes(
    t: &RealMatrix,
    xs: &RealMatrix,
    xd: &RealMatrix,
    (old_s, old_d): (&RealMatrix, &RealMatrix),
    new_s: &RealMatrix,
    parallel_d: RealMatrix,
    sequential_d: &RealMatrix,
    lambda3: f64,
) -> Result<(RealMatrix, usize)> {
    let ms = t.as_matrix() * xs.as_matrix();
    let md = t.as_matrix() * xd.as_matrix();
    let column_cost = |j: usize, a_s: &DMatrix<f64>, a_d: &DMatrix<f64>| -> f64 {
        let mut acc = 0.0;
        for i in 0..ms.nrows() {
            let rs = ms[(i, j)] - a_s[(i, j)];
            let rd = md[(i, j)] - a_d[(i, j)];
            let c = a_d[(i, j)] - a_s[(i, j)];
            acc += rs * rs + rd * rd + lambda3 * c * c;
        }
        acc
    };
    let mut out = parallel_d.into_inner();
    let mut rejected = 0;
    for j in 0..out.ncols() {
        let before = column_cost(j, old_s, old_d);
        let after = column_cost(j, new_s, &out);
        if after > before + 1e-12 * (1.0 + before.abs()) {
            out.column_mut(j).copy_from(&sequential_d.column(j));
            rejected += 1;
        }
    }
    Ok((RealMatrix::new(out)?, rejected))
}

fn distance(a: &RealMatrix, b: &RealMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("objective became {v}")))
    }
}
