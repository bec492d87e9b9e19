use serde::Serialize;

use crate::error::{Error, Result};

/// Cumulative match characteristic; `accuracy_at_rank[k - 1]` is rank-k accuracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmcCurve {
    pub accuracy_at_rank: Vec<f64>,
}

impl CmcCurve {
    /// Rank-k accuracy; ranks beyond the gallery size saturate at the last value.
    pub fn at(&self, k: usize) -> f64 {
        let idx = k.clamp(1, self.accuracy_at_rank.len()) - 1;
        self.accuracy_at_rank[idx]
    }
}

pub fn compute_cmc(ranks: &[usize], n_gallery_identities: usize) -> Result<CmcCurve> {
    if ranks.is_empty() {
        return Err(Error::EmptyInput("no probe ranks to summarize".into()));
    }
    if let Some(&bad) = ranks.iter().find(|&&r| r == 0 || r > n_gallery_identities) {
        return Err(Error::Dimension(format!(
            "rank {bad} outside 1..={n_gallery_identities}"
        )));
    }
    let mut hits = vec![0usize; n_gallery_identities];
    for &r in ranks {
        hits[r - 1] += 1;
    }
    let total = ranks.len() as f64;
    let mut cumulative = 0;
    let accuracy_at_rank = hits
        .into_iter()
        .map(|h| {
            cumulative += h;
            cumulative as f64 / total
        })
        .collect();
    Ok(CmcCurve { accuracy_at_rank })
}

/// Mean and population standard deviation (divisor = number of values).
pub fn mean_and_population_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
