//! End-to-end simulation: generate a graphon network, run the LOO and
//! classical smoothers, build both interval families on the one-sided
//! predictor, and score MSE/coverage/width.
//!
//! Per replicate, the expensive part is the per-column loop: for each
//! deleted column j it materializes M^(−j) by rank correction, computes all
//! pairwise LOO distances once (the matrix is symmetric), selects every
//! neighborhood, and stores predictions plus member lists. Columns are
//! independent, so the loop parallelizes over j; every reduction afterwards
//! runs in fixed index order, which keeps reports bit-identical across
//! thread counts.

use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::EstimateMatrix;
use crate::graphon::{sample_adjacency, sample_latent, Adjacency, GraphonModel, LatentSample};
use crate::inference::{coverage, eb_interval, normal_interval, sample_variance, IntervalReport};
use crate::mat::SquareMatrix;
use crate::neighborhood::{
    classical_neighborhood, default_bandwidth, select_h_nearest, undersmooth_bandwidth, Bandwidth,
};
use crate::rng::{SeedStreams, StreamKind};
use crate::tuning::{cv_select_median, default_grid, evenly_spaced_rows};
use crate::twohop::{full_twohop, loo_twohop};

/// How the neighborhood size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BandwidthSpec {
    Fixed(usize),
    Rule(BandwidthRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandwidthRule {
    /// ⌊1.5·√(n·ln n)⌋
    Auto,
    /// Honest cross-validation, median over a row subsample.
    Cv,
    /// ⌊√n / ln n⌋
    Undersmooth,
}

impl FromStr for BandwidthSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(BandwidthSpec::Rule(BandwidthRule::Auto)),
            "cv" => Ok(BandwidthSpec::Rule(BandwidthRule::Cv)),
            "undersmooth" => Ok(BandwidthSpec::Rule(BandwidthRule::Undersmooth)),
            other => other
                .parse::<usize>()
                .map(BandwidthSpec::Fixed)
                .map_err(|_| {
                    Error::argument(format!(
                        "bandwidth must be an integer or auto|cv|undersmooth, got '{other}'"
                    ))
                }),
        }
    }
}

impl std::fmt::Display for BandwidthSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BandwidthSpec::Fixed(h) => write!(f, "{h}"),
            BandwidthSpec::Rule(BandwidthRule::Auto) => write!(f, "auto"),
            BandwidthSpec::Rule(BandwidthRule::Cv) => write!(f, "cv"),
            BandwidthSpec::Rule(BandwidthRule::Undersmooth) => write!(f, "undersmooth"),
        }
    }
}

fn default_n() -> usize {
    500
}
fn default_h() -> BandwidthSpec {
    BandwidthSpec::Rule(BandwidthRule::Auto)
}
fn default_alpha() -> f64 {
    0.05
}
fn default_c_bias() -> f64 {
    0.1
}
fn default_seed() -> u64 {
    12345
}
fn default_replicates() -> usize {
    1
}
fn default_metrics_row() -> usize {
    0
}
fn default_cv_rows() -> usize {
    10
}
fn default_graphon() -> GraphonModel {
    GraphonModel::Smooth
}

/// Full description of one simulation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(default = "default_graphon")]
    pub graphon: GraphonModel,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_h")]
    pub h: BandwidthSpec,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_c_bias")]
    pub c_bias: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Row scored by the single-row MSE metric.
    #[serde(default = "default_metrics_row")]
    pub metrics_row: usize,
    /// Rows subsampled (evenly spaced) when h = cv.
    #[serde(default = "default_cv_rows")]
    pub cv_rows: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            graphon: default_graphon(),
            n: default_n(),
            h: default_h(),
            alpha: default_alpha(),
            c_bias: default_c_bias(),
            seed: default_seed(),
            replicates: default_replicates(),
            metrics_row: default_metrics_row(),
            cv_rows: default_cv_rows(),
        }
    }
}

impl SimConfig {
    /// Rejects bad configurations before any computation starts.
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(Error::domain(format!(
                "n must be at least 8, got {}",
                self.n
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if self.c_bias < 0.0 {
            return Err(Error::domain(format!(
                "c_bias must be non-negative, got {}",
                self.c_bias
            )));
        }
        if self.replicates == 0 {
            return Err(Error::domain("replicates must be at least 1".to_string()));
        }
        if self.metrics_row >= self.n {
            return Err(Error::argument(format!(
                "metrics_row {} out of range (n = {})",
                self.metrics_row, self.n
            )));
        }
        if self.cv_rows == 0 || self.cv_rows > self.n {
            return Err(Error::argument(format!(
                "cv_rows {} out of range (n = {})",
                self.cv_rows, self.n
            )));
        }
        if let BandwidthSpec::Fixed(h) = self.h {
            Bandwidth::new(h, self.n)?;
        }
        Ok(())
    }
}

/// Scalar outcomes of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub mse_loo: f64,
    pub mse_classical: f64,
    pub coverage_eb: f64,
    pub width_eb: f64,
    pub coverage_normal: f64,
    pub width_normal: f64,
    /// EB intervals widened by the oracle max |B_ij| and re-scored.
    pub coverage_eb_widened: f64,
    /// max |B_ij| over ordered pairs (oracle bias diagnostic).
    pub bias_max: f64,
}

impl SimMetrics {
    pub fn fields() -> [&'static str; 8] {
        [
            "mse_loo",
            "mse_classical",
            "coverage_eb",
            "width_eb",
            "coverage_normal",
            "width_normal",
            "coverage_eb_widened",
            "bias_max",
        ]
    }

    pub fn values(&self) -> [f64; 8] {
        [
            self.mse_loo,
            self.mse_classical,
            self.coverage_eb,
            self.width_eb,
            self.coverage_normal,
            self.width_normal,
            self.coverage_eb_widened,
            self.bias_max,
        ]
    }

    fn from_values(v: [f64; 8]) -> Self {
        SimMetrics {
            mse_loo: v[0],
            mse_classical: v[1],
            coverage_eb: v[2],
            width_eb: v[3],
            coverage_normal: v[4],
            width_normal: v[5],
            coverage_eb_widened: v[6],
            bias_max: v[7],
        }
    }
}

/// One replicate's report: metrics plus the resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    /// Bandwidth actually used after resolving auto/cv/undersmooth.
    pub resolved_h: usize,
    pub metrics: SimMetrics,
    pub runtime_seconds: f64,
}

impl SimReport {
    /// Equality of everything that must reproduce bit-identically.
    /// Wall time is excluded.
    pub fn same_results(&self, other: &SimReport) -> bool {
        self.config == other.config
            && self.resolved_h == other.resolved_h
            && self.metrics == other.metrics
    }
}

/// Mean and Monte-Carlo standard error over replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub config: SimConfig,
    pub replicates: usize,
    pub mean: SimMetrics,
    pub stderr: SimMetrics,
    pub per_replicate: Vec<SimReport>,
}

/// Everything a replicate produced, for per-edge exports.
pub struct SimArtifacts {
    pub truth: LatentSample,
    pub adjacency: Adjacency,
    pub loo: EstimateMatrix,
    pub classical: EstimateMatrix,
    /// Empirical Bernstein reports; ordered-pair order (i-major, then j).
    pub eb: Vec<IntervalReport>,
    /// Normal reports in the same order.
    pub normal: Vec<IntervalReport>,
    pub report: SimReport,
}

/// Index of ordered pair (i, j), i ≠ j, in i-major report order.
pub fn ordered_pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n && j < n);
    i * (n - 1) + j - (j > i) as usize
}

/// Estimation from observed data only: one-sided and symmetrized estimates
/// plus both interval families. No truth is involved anywhere.
pub struct EstimateArtifacts {
    pub estimates: EstimateMatrix,
    /// Empirical Bernstein reports; ordered-pair order (i-major, then j).
    pub eb: Vec<IntervalReport>,
    /// Normal reports in the same order.
    pub normal: Vec<IntervalReport>,
    pub h: usize,
}

impl EstimateArtifacts {
    pub fn eb_report(&self, i: usize, j: usize) -> &IntervalReport {
        &self.eb[ordered_pair_index(self.estimates.n(), i, j)]
    }

    pub fn normal_report(&self, i: usize, j: usize) -> &IntervalReport {
        &self.normal[ordered_pair_index(self.estimates.n(), i, j)]
    }
}

/// Full data-side pipeline: LOO smoothing, symmetrization, and both
/// interval families for every ordered pair.
pub fn estimate_network(
    a: &Adjacency,
    h: Bandwidth,
    alpha: f64,
    c_bias: f64,
) -> Result<EstimateArtifacts> {
    let (artifacts, _) = estimate_network_inner(a, h, alpha, c_bias)?;
    Ok(artifacts)
}

/// Shared engine; also hands back the member store for oracle-mode scoring.
fn estimate_network_inner(
    a: &Adjacency,
    h: Bandwidth,
    alpha: f64,
    c_bias: f64,
) -> Result<(EstimateArtifacts, LooPass)> {
    let n = a.n();
    let hh = h.get();
    let pass = loo_pass(a, h);
    let estimates = EstimateMatrix::from_tilde(pass.tilde.clone());

    // Plug-in variances via the stored member lists; transposed layout
    // matches the member store.
    let mut vhat_t = vec![0.0f64; n * n];
    vhat_t.par_chunks_mut(n).enumerate().for_each(|(j, v_col)| {
        let member_col = &pass.members[j * n * hh..(j + 1) * n * hh];
        let hat_col: Vec<f64> = (0..n).map(|k| estimates.hat(k, j)).collect();
        let inv_h2 = 1.0 / (hh as f64 * hh as f64);
        for i in 0..n {
            if i == j {
                continue;
            }
            let mut v = 0.0;
            for &k in &member_col[i * hh..(i + 1) * hh] {
                let ph = hat_col[k as usize];
                v += ph * (1.0 - ph);
            }
            v_col[i] = v * inv_h2;
        }
    });

    let pairs = n * (n - 1);
    let mut eb = Vec::with_capacity(pairs);
    let mut normal = Vec::with_capacity(pairs);
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let p_tilde = estimates.tilde(i, j);
            let s2 = sample_variance(p_tilde, h)?;
            eb.push(eb_interval(i, j, p_tilde, s2, h, alpha)?);
            normal.push(normal_interval(
                i,
                j,
                p_tilde,
                vhat_t[j * n + i],
                n,
                alpha,
                c_bias,
            )?);
        }
    }
    Ok((
        EstimateArtifacts {
            estimates,
            eb,
            normal,
            h: hh,
        },
        pass,
    ))
}

impl SimArtifacts {
    pub fn eb_report(&self, i: usize, j: usize) -> &IntervalReport {
        &self.eb[ordered_pair_index(self.truth.n(), i, j)]
    }

    pub fn normal_report(&self, i: usize, j: usize) -> &IntervalReport {
        &self.normal[ordered_pair_index(self.truth.n(), i, j)]
    }
}

/// Single-row MSE: (1/n)·Σ_{j≠i} (P̂_ij − P_ij)². The diagonal term
/// contributes zero by convention while the divisor stays n.
pub fn mse_row(estimate: &EstimateMatrix, truth: &LatentSample, i: usize) -> Result<f64> {
    let n = truth.n();
    if estimate.n() != n {
        return Err(Error::argument(format!(
            "dimension mismatch: estimates n = {}, truth n = {n}",
            estimate.n()
        )));
    }
    if i >= n {
        return Err(Error::argument(format!("row {i} out of range (n = {n})")));
    }
    let mut acc = 0.0;
    for j in 0..n {
        if j == i {
            continue;
        }
        let d = estimate.hat(i, j) - truth.p(i, j);
        acc += d * d;
    }
    Ok(acc / n as f64)
}

/// Runs one replicate and returns the summary report.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimReport> {
    run_replicate(cfg, 0).map(|a| a.report)
}

/// Runs one replicate and keeps every artifact (estimates, intervals, data).
pub fn run_simulation_full(cfg: &SimConfig) -> Result<SimArtifacts> {
    run_replicate(cfg, 0)
}

/// Replicated run with per-metric mean and Monte-Carlo standard error.
/// Replicate r draws its data from the (Latent, r) and (Edges, r)
/// substreams of the master seed, so aggregation order is irrelevant.
pub fn run_replicated(cfg: &SimConfig) -> Result<AggregateReport> {
    cfg.validate()?;
    let reports: Vec<SimReport> = (0..cfg.replicates)
        .map(|r| run_replicate(cfg, r as u64).map(|a| a.report))
        .collect::<Result<_>>()?;
    let r = reports.len() as f64;
    let mut mean = [0.0f64; 8];
    for rep in &reports {
        for (m, v) in mean.iter_mut().zip(rep.metrics.values()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= r;
    }
    let mut se = [0.0f64; 8];
    if reports.len() > 1 {
        for rep in &reports {
            for ((s, v), m) in se.iter_mut().zip(rep.metrics.values()).zip(mean) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut se {
            *s = (*s / (r - 1.0) / r).sqrt();
        }
    }
    Ok(AggregateReport {
        config: cfg.clone(),
        replicates: reports.len(),
        mean: SimMetrics::from_values(mean),
        stderr: SimMetrics::from_values(se),
        per_replicate: reports,
    })
}

/// One simulation replicate with an explicit replicate index.
pub fn run_replicate(cfg: &SimConfig, replicate: u64) -> Result<SimArtifacts> {
    cfg.validate()?;
    let start = Instant::now();
    let streams = SeedStreams::new(cfg.seed);
    let truth = sample_latent(
        cfg.graphon,
        cfg.n,
        &mut streams.stream(StreamKind::Latent, replicate),
    )?;
    let a = sample_adjacency(&truth, &mut streams.stream(StreamKind::Edges, replicate));
    let h = resolve_bandwidth(cfg, &a)?;
    let mut artifacts = estimate_and_score(cfg, truth, a, h)?;
    artifacts.report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(artifacts)
}

fn resolve_bandwidth(cfg: &SimConfig, a: &Adjacency) -> Result<Bandwidth> {
    match cfg.h {
        BandwidthSpec::Fixed(h) => Bandwidth::new(h, cfg.n),
        BandwidthSpec::Rule(BandwidthRule::Auto) => default_bandwidth(cfg.n),
        BandwidthSpec::Rule(BandwidthRule::Undersmooth) => undersmooth_bandwidth(cfg.n),
        BandwidthSpec::Rule(BandwidthRule::Cv) => {
            let rows = evenly_spaced_rows(cfg.n, cfg.cv_rows);
            let grid = default_grid(cfg.n);
            let (h, _) = cv_select_median(a, &rows, &grid)?;
            Bandwidth::new(h, cfg.n)
        }
    }
}

/// Output of the per-column LOO sweep.
pub(crate) struct LooPass {
    pub tilde: SquareMatrix,
    /// Flat member store, layout [j][i][0..h].
    pub members: Vec<u32>,
}

/// For every deleted column j: M^(−j) by rank correction, all pairwise
/// distances once, then per-anchor selection and prediction.
pub(crate) fn loo_pass(a: &Adjacency, h: Bandwidth) -> LooPass {
    let n = a.n();
    let hh = h.get();
    let m = full_twohop(a);
    let mut tilde_t = vec![0.0f64; n * n]; // transposed: [j][i]
    let mut members = vec![0u32; n * n * hh]; // [j][i][0..h]

    tilde_t
        .par_chunks_mut(n)
        .zip(members.par_chunks_mut(n * hh))
        .enumerate()
        .for_each(|(j, (tilde_col, member_col))| {
            let view = loo_twohop(a, &m, j);
            let mut dists = vec![0.0f64; n * n];
            view.distance_matrix(&mut dists);
            let mut scratch: Vec<(f64, u32)> = Vec::with_capacity(n);
            let row_j = a.row(j);
            for i in 0..n {
                if i == j {
                    continue;
                }
                let slot = &mut member_col[i * hh..(i + 1) * hh];
                select_h_nearest(&dists[i * n..(i + 1) * n], hh, &mut scratch, slot);
                let sum: u32 = slot.iter().map(|&k| row_j[k as usize] as u32).sum();
                tilde_col[i] = sum as f64 / hh as f64;
            }
        });

    let mut tilde = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            tilde.set(i, j, tilde_t[j * n + i]);
        }
    }
    LooPass { tilde, members }
}

/// Classical smoother: quantile neighborhoods on the full two-hop matrix,
/// then row averages of A over the members.
pub(crate) fn classical_pass(a: &Adjacency, h: Bandwidth) -> Result<SquareMatrix> {
    let n = a.n();
    let m = full_twohop(a);
    let mut tilde = SquareMatrix::zeros(n);
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let nb = classical_neighborhood(&m, i, h).expect("validated bandwidth");
            let mut acc = vec![0.0f64; n];
            for &k in nb.members() {
                for (slot, &v) in acc.iter_mut().zip(a.row(k as usize)) {
                    *slot += v as f64;
                }
            }
            let inv = 1.0 / nb.len() as f64;
            for slot in &mut acc {
                *slot *= inv;
            }
            acc
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        tilde.row_mut(i).copy_from_slice(&row);
    }
    Ok(tilde)
}

fn estimate_and_score(
    cfg: &SimConfig,
    truth: LatentSample,
    a: Adjacency,
    h: Bandwidth,
) -> Result<SimArtifacts> {
    let n = cfg.n;
    let hh = h.get();
    let (data_side, pass) = estimate_network_inner(&a, h, cfg.alpha, cfg.c_bias)?;
    let EstimateArtifacts {
        estimates: loo,
        eb,
        normal,
        ..
    } = data_side;
    let classical = EstimateMatrix::from_tilde(classical_pass(&a, h)?);

    // Oracle bias B_ij = (1/h)·Σ P_kj − P_ij from the stored member lists.
    let mut bias_t = vec![0.0f64; n * n];
    bias_t.par_chunks_mut(n).enumerate().for_each(|(j, b_col)| {
        let member_col = &pass.members[j * n * hh..(j + 1) * n * hh];
        let p_col: Vec<f64> = (0..n).map(|k| truth.p(k, j)).collect();
        let inv_h = 1.0 / hh as f64;
        for i in 0..n {
            if i == j {
                continue;
            }
            let mut b = 0.0;
            for &k in &member_col[i * hh..(i + 1) * hh] {
                b += p_col[k as usize] - p_col[i];
            }
            b_col[i] = b * inv_h;
        }
    });
    let mut bias_max = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if j != i {
                bias_max = bias_max.max(bias_t[j * n + i].abs());
            }
        }
    }

    let pairs = n * (n - 1);
    let coverage_eb = coverage(&truth, &eb)?;
    let coverage_normal = coverage(&truth, &normal)?;
    let width_eb = eb.iter().map(|r| r.width()).sum::<f64>() / pairs as f64;
    let width_normal = normal.iter().map(|r| r.width()).sum::<f64>() / pairs as f64;
    let widened: Vec<IntervalReport> = eb.iter().map(|r| r.widened(bias_max)).collect();
    let coverage_eb_widened = coverage(&truth, &widened)?;

    let metrics = SimMetrics {
        mse_loo: mse_row(&loo, &truth, cfg.metrics_row)?,
        mse_classical: mse_row(&classical, &truth, cfg.metrics_row)?,
        coverage_eb,
        width_eb,
        coverage_normal,
        width_normal,
        coverage_eb_widened,
        bias_max,
    };

    Ok(SimArtifacts {
        report: SimReport {
            config: cfg.clone(),
            resolved_h: hh,
            metrics,
            runtime_seconds: 0.0,
        },
        truth,
        adjacency: a,
        loo,
        classical,
        eb,
        normal,
    })
}
