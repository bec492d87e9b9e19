//! CSV writers for evaluation, training and identification outputs.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing a
//! report recovers the exact values.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::EvalReport;
use crate::identification::RankedList;
use crate::shared_transform::FitReport;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const BASELINE_SUMMARY_FILE: &str = "baseline_summary.csv";
pub const CMC_FILE: &str = "cmc.csv";
pub const FIT_TRACE_FILE: &str = "fit_trace.csv";
pub const RANKED_FILE: &str = "ranked.csv";
pub const CONFIG_ECHO_FILE: &str = "config_echo.toml";

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn write_rows(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row per fold, then `mean` and `std` rows (population convention).
pub fn write_summary(report: &EvalReport, path: &Path) -> Result<()> {
    let p = report.protocol.to_string();
    let mut rows: Vec<Vec<String>> = report
        .folds
        .iter()
        .map(|f| {
            vec![
                p.clone(),
                f.fold_index.to_string(),
                num(f.rank1),
                num(f.rank5),
            ]
        })
        .collect();
    rows.push(vec![
        p.clone(),
        "mean".into(),
        num(report.rank1_mean),
        num(report.rank5_mean),
    ]);
    rows.push(vec![
        p,
        "std".into(),
        num(report.rank1_std),
        num(report.rank5_std),
    ]);
    write_rows(path, &["protocol", "fold", "rank1", "rank5"], rows)
}

pub fn write_cmc(report: &EvalReport, path: &Path) -> Result<()> {
    let rows = report.folds.iter().flat_map(|f| {
        f.cmc
            .accuracy_at_rank
            .iter()
            .enumerate()
            .map(move |(i, a)| vec![f.fold_index.to_string(), (i + 1).to_string(), num(*a)])
    });
    write_rows(path, &["fold", "rank", "accuracy"], rows)
}

/// Objective per iteration for every fold that fitted a model.
pub fn write_fold_traces(report: &EvalReport, path: &Path) -> Result<()> {
    let rows = report.folds.iter().flat_map(|f| {
        f.fit.iter().flat_map(move |fit| {
            fit.objective_trace
                .iter()
                .enumerate()
                .map(move |(i, v)| vec![f.fold_index.to_string(), (i + 1).to_string(), num(*v)])
        })
    });
    write_rows(path, &["fold", "iteration", "objective"], rows)
}

/// Iteration 0 is the objective at initialization.
pub fn write_fit_trace(report: &FitReport, path: &Path) -> Result<()> {
    let rows = std::iter::once(report.initial_objective)
        .chain(report.objective_trace.iter().copied())
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), num(v)]);
    write_rows(path, &["iteration", "objective"], rows)
}

pub fn write_ranked(ranked: &RankedList, path: &Path) -> Result<()> {
    let rows = ranked
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| vec![(i + 1).to_string(), e.identity.clone(), num(e.distance)]);
    write_rows(path, &["rank", "identity", "distance"], rows)
}

pub fn write_config_echo(toml_text: &str, path: &Path) -> Result<()> {
    fs::write(path, toml_text).map_err(|e| Error::io(path, e))
}
