//! Entrywise uncertainty quantification for the one-sided LOO predictor:
//! sample and plug-in variances, empirical Bernstein intervals, and
//! normal-approximation intervals with an explicit bias cushion.
//!
//! The empirical Bernstein interval covers the localized average
//! (1/h)·Σ P_kj at any finite sample size; covering P_ij itself requires
//! either the normal interval's bias cushion or a Minkowski widening by a
//! bias radius (see [`IntervalReport::widened`]).

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimator::EstimateMatrix;
use crate::graphon::LatentSample;
use crate::neighborhood::{Bandwidth, Neighborhood};
use crate::stats::critical_z;

/// Which construction produced an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalMethod {
    Eb,
    Normal,
}

impl IntervalMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            IntervalMethod::Eb => "EB",
            IntervalMethod::Normal => "Normal",
        }
    }
}

/// One per-edge confidence interval, clipped to [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalReport {
    pub i: usize,
    pub j: usize,
    /// Center P̃_ij.
    pub estimate: f64,
    pub method: IntervalMethod,
    pub lower: f64,
    pub upper: f64,
    /// Pre-clipping half-width.
    pub halfwidth: f64,
    pub alpha: f64,
    /// 0 for EB; c_bias·(ln n/n)^{1/4} for Normal.
    pub bias_cushion: f64,
}

impl IntervalReport {
    fn new(
        i: usize,
        j: usize,
        estimate: f64,
        method: IntervalMethod,
        halfwidth: f64,
        alpha: f64,
        bias_cushion: f64,
    ) -> Self {
        IntervalReport {
            i,
            j,
            estimate,
            method,
            lower: (estimate - halfwidth).max(0.0),
            upper: (estimate + halfwidth).min(1.0),
            halfwidth,
            alpha,
            bias_cushion,
        }
    }

    /// Post-clipping width.
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    /// Minkowski widening by a bias radius, re-clipped to [0,1]. Upgrades a
    /// localized-average interval to one for P_ij when the radius dominates
    /// the neighborhood bias.
    pub fn widened(&self, radius: f64) -> IntervalReport {
        let mut out = *self;
        out.lower = (self.lower - radius).max(0.0);
        out.upper = (self.upper + radius).min(1.0);
        out
    }

    pub const CSV_HEADER: &'static str = "i,j,estimate,method,lower,upper,halfwidth,alpha";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.i,
            self.j,
            self.estimate,
            self.method.as_str(),
            self.lower,
            self.upper,
            self.halfwidth,
            self.alpha
        )
    }
}

/// The variance quantities attached to one edge: the neighborhood sample
/// variance s², the plug-in V̂, and (in simulation mode) the oracle V.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimates {
    pub s2: f64,
    pub v_plugin: f64,
    pub v_oracle: Option<f64>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "significance level must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// Unbiased sample variance of the binary neighborhood observations,
/// in its exact Bernoulli form (h/(h−1))·P̃(1−P̃). Equals the pairwise
/// double-sum (1/(h(h−1)))·Σ_{k<ℓ}(A_kj − A_ℓj)² identically.
pub fn sample_variance(p_tilde: f64, h: Bandwidth) -> Result<f64> {
    let h = h.get();
    if h < 2 {
        return Err(Error::domain(format!(
            "sample variance needs h ≥ 2, got {h}"
        )));
    }
    if !(0.0..=1.0).contains(&p_tilde) {
        return Err(Error::domain(format!(
            "estimate must lie in [0,1], got {p_tilde}"
        )));
    }
    Ok(h as f64 / (h as f64 - 1.0) * p_tilde * (1.0 - p_tilde))
}

/// Variance-adaptive half-width
/// w = √(2·s²·ln(4/α)/h) + 7·ln(4/α)/(3(h−1)).
pub fn eb_halfwidth(s2: f64, h: Bandwidth, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if s2 < 0.0 {
        return Err(Error::domain(format!("negative sample variance {s2}")));
    }
    let h = h.get() as f64;
    let log_term = (4.0 / alpha).ln();
    Ok((2.0 * s2 * log_term / h).sqrt() + 7.0 * log_term / (3.0 * (h - 1.0)))
}

/// Empirical Bernstein interval for the localized average, centered at
/// P̃_ij and clipped to [0,1].
pub fn eb_interval(
    i: usize,
    j: usize,
    p_tilde: f64,
    s2: f64,
    h: Bandwidth,
    alpha: f64,
) -> Result<IntervalReport> {
    let w = eb_halfwidth(s2, h, alpha)?;
    Ok(IntervalReport::new(
        i,
        j,
        p_tilde,
        IntervalMethod::Eb,
        w,
        alpha,
        0.0,
    ))
}

/// Plug-in conditional variance V̂_ij = (1/h²)·Σ_{k∈N} P̂_kj(1−P̂_kj),
/// using the symmetrized estimates.
pub fn plugin_variance(estimates: &EstimateMatrix, nbhd: &Neighborhood, j: usize) -> f64 {
    let h = nbhd.len() as f64;
    let sum: f64 = nbhd
        .members()
        .iter()
        .map(|&k| {
            let p = estimates.hat(k as usize, j);
            p * (1.0 - p)
        })
        .sum();
    sum / (h * h)
}

/// Oracle conditional variance V_ij = (1/h²)·Σ_{k∈N} P_kj(1−P_kj).
/// Simulation mode: requires the true probabilities.
pub fn oracle_variance(truth: &LatentSample, nbhd: &Neighborhood, j: usize) -> f64 {
    let h = nbhd.len() as f64;
    let sum: f64 = nbhd
        .members()
        .iter()
        .map(|&k| {
            let p = truth.p(k as usize, j);
            p * (1.0 - p)
        })
        .sum();
    sum / (h * h)
}

/// Normal-approximation interval with half-width
/// z_{1−α/2}·√v + c_bias·(ln n/n)^{1/4}, clipped to [0,1].
pub fn normal_interval(
    i: usize,
    j: usize,
    p_tilde: f64,
    v: f64,
    n: usize,
    alpha: f64,
    c_bias: f64,
) -> Result<IntervalReport> {
    check_alpha(alpha)?;
    if v < 0.0 {
        return Err(Error::domain(format!("negative variance {v}")));
    }
    if n < 8 {
        return Err(Error::domain(format!(
            "normal interval needs n ≥ 8, got {n}"
        )));
    }
    if c_bias < 0.0 {
        return Err(Error::domain(format!("negative bias constant {c_bias}")));
    }
    let z = critical_z(alpha)?;
    let cushion = c_bias * ((n as f64).ln() / n as f64).powf(0.25);
    let w = z * v.sqrt() + cushion;
    Ok(IntervalReport::new(
        i,
        j,
        p_tilde,
        IntervalMethod::Normal,
        w,
        alpha,
        cushion,
    ))
}

/// Fraction of ordered pairs i ≠ j whose true P_ij lies inside its interval.
/// The reports must cover every ordered pair exactly once.
pub fn coverage(truth: &LatentSample, reports: &[IntervalReport]) -> Result<f64> {
    let n = truth.n();
    let expected = n * (n - 1);
    if reports.len() != expected {
        return Err(Error::argument(format!(
            "coverage needs all {expected} ordered pairs, got {} reports",
            reports.len()
        )));
    }
    let mut seen = vec![false; n * n];
    let mut hits = 0usize;
    for r in reports {
        if r.i >= n || r.j >= n || r.i == r.j {
            return Err(Error::argument(format!(
                "invalid pair ({}, {}) in coverage input",
                r.i, r.j
            )));
        }
        let slot = r.i * n + r.j;
        if seen[slot] {
            return Err(Error::argument(format!(
                "duplicate pair ({}, {}) in coverage input",
                r.i, r.j
            )));
        }
        seen[slot] = true;
        if r.contains(truth.p(r.i, r.j)) {
            hits += 1;
        }
    }
    Ok(hits as f64 / expected as f64)
}

/// Frozen-neighborhood Monte Carlo of the standardized fluctuation:
/// resamples column j `replicates` times and returns U/√V per replicate,
/// with V the oracle conditional variance.
pub fn standardized_fluctuations(
    truth: &LatentSample,
    nbhd: &Neighborhood,
    j: usize,
    replicates: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if nbhd.is_empty() {
        return Err(Error::argument("empty neighborhood".to_string()));
    }
    let v = oracle_variance(truth, nbhd, j);
    if v <= 0.0 {
        return Err(Error::domain(format!(
            "standardization needs positive oracle variance, got {v}"
        )));
    }
    let probs: Vec<f64> = nbhd
        .members()
        .iter()
        .map(|&k| truth.p(k as usize, j))
        .collect();
    let inv_h = 1.0 / probs.len() as f64;
    let scale = 1.0 / v.sqrt();
    let mut out = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let mut u = 0.0;
        for &p in &probs {
            let a = (rng.random::<f64>() < p) as u8 as f64;
            u += a - p;
        }
        out.push(u * inv_h * scale);
    }
    Ok(out)
}
