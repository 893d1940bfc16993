//! Honest leave-one-out cross-validation for the neighborhood size h.
//!
//! For a fixed row i, every held-out column j is predicted by a smoother
//! whose neighborhood is built from A^(−j), so the held-out edge never
//! participates in constructing its own predictor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::{Adjacency, LatentSample};
use crate::neighborhood::{select_h_nearest, Bandwidth};
use crate::twohop::{full_twohop, loo_twohop};

/// Scores for one row over a candidate grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub row: usize,
    /// Deduplicated, ascending candidate grid.
    pub grid: Vec<usize>,
    /// R̂_i(h) per grid entry.
    pub scores: Vec<f64>,
    /// Smallest h attaining the minimum score.
    pub selected: usize,
}

/// Default grid {⌊c·√(n·ln n)⌋ : c ∈ {0.5, 0.75, 1.0, 1.25, 1.5, 2.0}},
/// clamped to [2, n−2] and deduplicated.
pub fn default_grid(n: usize) -> Vec<usize> {
    let scale = (n as f64 * (n as f64).ln()).sqrt();
    let mut grid: Vec<usize> = [0.5, 0.75, 1.0, 1.25, 1.5, 2.0]
        .iter()
        .map(|c| ((c * scale).floor() as usize).clamp(2, n - 2))
        .collect();
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// R̂_i(h) = (1/(n−1))·Σ_{j≠i} (A_ij − P̃_ij^(−j)(h))².
pub fn cv_score(a: &Adjacency, i: usize, h: Bandwidth) -> Result<f64> {
    let scores = score_grid(a, i, &[h.get()])?;
    Ok(scores[0])
}

/// Scores every grid candidate and selects the smallest argmin.
pub fn cv_select(a: &Adjacency, i: usize, grid: &[usize]) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(Error::argument("empty bandwidth grid".to_string()));
    }
    let mut grid: Vec<usize> = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let scores = score_grid(a, i, &grid)?;
    let mut best = 0;
    for (gi, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = gi;
        }
    }
    Ok(CvResult {
        row: i,
        selected: grid[best],
        grid,
        scores,
    })
}

/// Evenly spaced row subsample for global bandwidth selection.
pub fn evenly_spaced_rows(n: usize, count: usize) -> Vec<usize> {
    let count = count.clamp(1, n);
    (0..count).map(|t| t * n / count).collect()
}

/// Per-row selections over a row subsample, aggregated by the lower median.
/// Returns the global choice together with every per-row result.
pub fn cv_select_median(
    a: &Adjacency,
    rows: &[usize],
    grid: &[usize],
) -> Result<(usize, Vec<CvResult>)> {
    if rows.is_empty() {
        return Err(Error::argument("empty row subsample".to_string()));
    }
    // rows are independent; indexed collect keeps the output order fixed
    let results: Vec<CvResult> = rows
        .par_iter()
        .map(|&i| cv_select(a, i, grid))
        .collect::<Result<_>>()?;
    let mut picks: Vec<usize> = results.iter().map(|r| r.selected).collect();
    picks.sort_unstable();
    let median = picks[(picks.len() - 1) / 2];
    Ok((median, results))
}

/// Oracle prediction risk R_i(h) = (1/(n−1))·Σ_{j≠i} (P_ij − P̃_ij^(−j)(h))².
/// Simulation mode: the quantity CV targets after removing the h-free
/// irreducible Bernoulli variance.
pub fn oracle_prediction_risk(
    truth: &LatentSample,
    a: &Adjacency,
    i: usize,
    h: Bandwidth,
) -> Result<f64> {
    if truth.n() != a.n() {
        return Err(Error::argument(format!(
            "dimension mismatch: truth n = {}, adjacency n = {}",
            truth.n(),
            a.n()
        )));
    }
    let preds = predictions_for_row(a, i, &[h.get()])?;
    let n = a.n();
    let mut acc = 0.0;
    let mut idx = 0;
    for j in 0..n {
        if j == i {
            continue;
        }
        let d = truth.p(i, j) - preds[idx];
        acc += d * d;
        idx += 1;
    }
    Ok(acc / (n - 1) as f64)
}

/// Shared driver: per held-out column j, one view and one distance row,
/// reused across every h in the grid.
fn score_grid(a: &Adjacency, i: usize, grid: &[usize]) -> Result<Vec<f64>> {
    let n = a.n();
    let mut scores = vec![0.0; grid.len()];
    per_column_predictions(a, i, grid, |gi, j, pred| {
        let d = a.entry(i, j) as f64 - pred;
        scores[gi] += d * d;
    })?;
    for s in &mut scores {
        *s /= (n - 1) as f64;
    }
    Ok(scores)
}

/// Predictions P̃_ij^(−j)(h) for all j ≠ i in ascending j order (single h).
fn predictions_for_row(a: &Adjacency, i: usize, grid: &[usize]) -> Result<Vec<f64>> {
    let n = a.n();
    let mut preds = Vec::with_capacity(n - 1);
    per_column_predictions(a, i, grid, |_, _, pred| preds.push(pred))?;
    Ok(preds)
}

fn per_column_predictions(
    a: &Adjacency,
    i: usize,
    grid: &[usize],
    mut sink: impl FnMut(usize, usize, f64),
) -> Result<()> {
    let n = a.n();
    if i >= n {
        return Err(Error::argument(format!("row {i} out of range (n = {n})")));
    }
    for &h in grid {
        Bandwidth::new(h, n)?;
    }
    let m = full_twohop(a);
    let mut dists = vec![0.0; n];
    let mut scratch = Vec::with_capacity(n);
    let mut members = vec![0u32; *grid.iter().max().unwrap()];
    for j in 0..n {
        if j == i {
            continue;
        }
        let view = loo_twohop(a, &m, j);
        view.distance_row(i, &mut dists);
        let row_j = a.row(j);
        for (gi, &h) in grid.iter().enumerate() {
            select_h_nearest(&dists, h, &mut scratch, &mut members[..h]);
            let sum: u32 = members[..h].iter().map(|&k| row_j[k as usize] as u32).sum();
            sink(gi, j, sum as f64 / h as f64);
        }
    }
    Ok(())
}
