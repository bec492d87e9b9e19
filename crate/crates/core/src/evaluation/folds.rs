use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldSplit {
    pub fold_index: usize,
    pub train_subjects: Vec<String>,
    pub test_subjects: Vec<String>,
}

/// Seeded shuffle, then contiguous partition into `n_folds` test sets whose
/// sizes differ by at most one (larger folds first).
pub fn make_folds(subjects: &[String], n_folds: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if n_folds < 2 {
        return Err(Error::Config(format!(
            "need at least 2 folds so every fold has training data (got {n_folds})"
        )));
    }
    if n_folds > subjects.len() {
        return Err(Error::Config(format!(
            "{n_folds} folds requested for {} subjects",
            subjects.len()
        )));
    }
    let mut order: Vec<String> = subjects.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let base = order.len() / n_folds;
    let extra = order.len() % n_folds;
    let mut folds = Vec::with_capacity(n_folds);
    let mut start = 0;
    for fold_index in 0..n_folds {
        let size = base + usize::from(fold_index < extra);
        let test_subjects = order[start..start + size].to_vec();
        let train_subjects = order[..start]
            .iter()
            .chain(&order[start + size..])
            .cloned()
            .collect();
        folds.push(FoldSplit {
            fold_index,
            train_subjects,
            test_subjects,
        });
        start += size;
    }
    Ok(folds)
}
