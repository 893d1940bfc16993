//! Graphon kernels, latent-position sampling, and adjacency sampling.
//!
//! A graphon is a symmetric kernel f:[0,1]²→[0,1]. Nodes carry i.i.d.
//! uniform latent positions ξ, edge probabilities are P_ij = f(ξ_i, ξ_j),
//! and the observed graph has independent Bernoulli(P_ij) edges above the
//! diagonal, mirrored below, with no self-loops.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::SquareMatrix;

/// The five benchmark kernel families plus a constant kernel.
///
/// `Constant(c)` is not a benchmark family; it gives exactly zero smoothing
/// bias, which makes it the workhorse for oracle tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum GraphonModel {
    /// 0.5 + 0.3·sin(πu)·sin(πv)
    Smooth,
    /// Two-block SBM: `p_in` on the diagonal blocks, `p_out` off. Block 1 is
    /// u < 0.5 strictly; u = 0.5 belongs to block 2.
    Block { p_in: f64, p_out: f64 },
    /// 0.5 + 0.25·sin(4πuv)
    Wiggly,
    /// (u + v)/2
    RankOne,
    /// 0.2 + 0.8·1{|u−0.5| < 0.1 and |v−0.5| < 0.1}
    Spiky,
    /// f ≡ c
    Constant(f64),
}

impl GraphonModel {
    /// Paper parameters for the two-block model.
    pub fn block_default() -> Self {
        GraphonModel::Block {
            p_in: 0.7,
            p_out: 0.3,
        }
    }

    /// The five benchmark families with their paper parameters.
    pub fn paper_families() -> [GraphonModel; 5] {
        [
            GraphonModel::Smooth,
            GraphonModel::block_default(),
            GraphonModel::Wiggly,
            GraphonModel::RankOne,
            GraphonModel::Spiky,
        ]
    }

    /// Kernel value f(u, v).
    pub fn eval(&self, u: f64, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!(
                "graphon arguments must lie in [0,1], got ({u}, {v})"
            )));
        }
        Ok(self.eval_unchecked(u, v))
    }

    #[inline]
    fn eval_unchecked(&self, u: f64, v: f64) -> f64 {
        use std::f64::consts::PI;
        match *self {
            GraphonModel::Smooth => 0.5 + 0.3 * ((PI * u).sin() * (PI * v).sin()),
            GraphonModel::Block { p_in, p_out } => {
                let same = (u < 0.5) == (v < 0.5);
                if same {
                    p_in
                } else {
                    p_out
                }
            }
            // u*v first: keeps eval(u,v) bit-identical to eval(v,u)
            GraphonModel::Wiggly => 0.5 + 0.25 * (4.0 * PI * (u * v)).sin(),
            GraphonModel::RankOne => 0.5 * (u + v),
            GraphonModel::Spiky => {
                let band = (u - 0.5).abs() < 0.1 && (v - 0.5).abs() < 0.1;
                0.2 + if band { 0.8 } else { 0.0 }
            }
            GraphonModel::Constant(c) => c,
        }
    }
}

impl fmt::Display for GraphonModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphonModel::Smooth => write!(f, "smooth"),
            GraphonModel::Block { .. } => write!(f, "block"),
            GraphonModel::Wiggly => write!(f, "wiggly"),
            GraphonModel::RankOne => write!(f, "rank1"),
            GraphonModel::Spiky => write!(f, "spiky"),
            GraphonModel::Constant(c) => write!(f, "constant:{c}"),
        }
    }
}

impl FromStr for GraphonModel {
    type Err = Error;

    /// Names accepted on the command line: `smooth`, `block`, `wiggly`,
    /// `rank1`, `spiky`, `constant:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(GraphonModel::Smooth),
            "block" => Ok(GraphonModel::block_default()),
            "wiggly" => Ok(GraphonModel::Wiggly),
            "rank1" => Ok(GraphonModel::RankOne),
            "spiky" => Ok(GraphonModel::Spiky),
            other => {
                if let Some(c) = other.strip_prefix("constant:") {
                    let c: f64 = c.parse().map_err(|_| {
                        Error::argument(format!("bad constant level in graphon name '{other}'"))
                    })?;
                    if !(0.0..=1.0).contains(&c) {
                        return Err(Error::domain(format!(
                            "constant graphon level must lie in [0,1], got {c}"
                        )));
                    }
                    Ok(GraphonModel::Constant(c))
                } else {
                    Err(Error::argument(format!(
                        "unknown graphon '{other}' (expected smooth|block|wiggly|rank1|spiky|constant:<c>)"
                    )))
                }
            }
        }
    }
}

impl From<GraphonModel> for String {
    fn from(m: GraphonModel) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for GraphonModel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Latent positions together with the full probability matrix they induce.
///
/// `P` is symmetric with entries in [0,1]; diagonal entries are stored (the
/// kernel is defined there) but never used as edges.
#[derive(Debug, Clone)]
pub struct LatentSample {
    xi: Vec<f64>,
    p: SquareMatrix,
}

impl LatentSample {
    /// Builds P from explicit latent positions. Mostly useful in tests.
    pub fn from_positions(model: GraphonModel, xi: Vec<f64>) -> Result<Self> {
        for &x in &xi {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::domain(format!("latent position {x} outside [0,1]")));
            }
        }
        let n = xi.len();
        let p = SquareMatrix::from_fn(n, |i, j| model.eval_unchecked(xi[i], xi[j]));
        Ok(LatentSample { xi, p })
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    #[inline]
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.probabilities().get(i, j)
    }

    pub fn probabilities(&self) -> &SquareMatrix {
        &self.p
    }
}

/// Draw n latent positions i.i.d. uniform on [0,1] and fill P by the kernel.
pub fn sample_latent(model: GraphonModel, n: usize, rng: &mut impl Rng) -> Result<LatentSample> {
    if n < 3 {
        return Err(Error::domain(format!("need at least 3 nodes, got {n}")));
    }
    let xi: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    LatentSample::from_positions(model, xi)
}

/// Symmetric binary adjacency matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    entries: Vec<u8>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        Adjacency {
            n,
            entries: vec![0; n * n],
        }
    }

    /// Validates a dense 0/1 matrix: symmetric, zero diagonal, binary.
    /// Error messages name the first offending entry.
    pub fn from_dense(n: usize, entries: Vec<u8>) -> Result<Self> {
        assert_eq!(entries.len(), n * n);
        for i in 0..n {
            if entries[i * n + i] != 0 {
                return Err(Error::argument(format!("self-loop at node {i}")));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if v > 1 {
                    return Err(Error::argument(format!(
                        "non-binary value {v} at ({i}, {j})"
                    )));
                }
                if j > i && v != entries[j * n + i] {
                    return Err(Error::argument(format!("asymmetric entry at ({i}, {j})")));
                }
            }
        }
        Ok(Adjacency { n, entries })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j] == 1
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Sets A_ij = A_ji = value. Panics on i == j: the diagonal is fixed at 0.
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        assert_ne!(i, j, "self-loops are not representable");
        let v = present as u8;
        self.entries[i * self.n + j] = v;
        self.entries[j * self.n + i] = v;
    }

    pub fn edge_count(&self) -> usize {
        self.entries.iter().map(|&v| v as usize).sum::<usize>() / 2
    }

    /// Node degree (row sum).
    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|&v| v as usize).sum()
    }
}

/// Sample A_ij ~ Bernoulli(P_ij) independently for i < j and mirror.
pub fn sample_adjacency(sample: &LatentSample, rng: &mut impl Rng) -> Adjacency {
    let n = sample.n();
    let mut a = Adjacency::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < sample.p(i, j) {
                a.set_edge(i, j, true);
            }
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{SeedStreams, StreamKind};
    use proptest::prelude::*;

    fn rng(seed: u64) -> impl Rng {
        SeedStreams::new(seed).stream(StreamKind::Edges, 0)
    }

    #[test]
    fn eval_matches_table_values() {
        assert!((GraphonModel::Smooth.eval(0.5, 0.5).unwrap() - 0.8).abs() < 1e-15);
        for v in [0.0, 0.3, 0.7, 1.0] {
            assert_eq!(GraphonModel::Wiggly.eval(0.0, v).unwrap(), 0.5);
        }
        assert_eq!(GraphonModel::Spiky.eval(0.5, 0.5).unwrap(), 1.0);
        assert_eq!(GraphonModel::Spiky.eval(0.0, 0.0).unwrap(), 0.2);
        let block = GraphonModel::block_default();
        assert_eq!(block.eval(0.1, 0.4).unwrap(), 0.7);
        assert_eq!(block.eval(0.1, 0.9).unwrap(), 0.3);
        // u = 0.5 belongs to block 2.
        assert_eq!(block.eval(0.5, 0.9).unwrap(), 0.7);
        assert_eq!(block.eval(0.5, 0.1).unwrap(), 0.3);
        assert!((GraphonModel::RankOne.eval(0.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_out_of_range() {
        assert!(GraphonModel::Smooth.eval(-0.1, 0.5).is_err());
        assert!(GraphonModel::Smooth.eval(0.5, 1.1).is_err());
    }

    #[test]
    fn family_names_round_trip() {
        for name in [
            "smooth",
            "block",
            "wiggly",
            "rank1",
            "spiky",
            "constant:0.35",
        ] {
            let m: GraphonModel = name.parse().unwrap();
            assert_eq!(m.to_string(), name);
        }
        assert!("bogus".parse::<GraphonModel>().is_err());
        assert!("constant:1.5".parse::<GraphonModel>().is_err());
        assert!("constant:x".parse::<GraphonModel>().is_err());
    }

    #[test]
    fn constant_model_fills_p_uniformly() {
        let s = sample_latent(GraphonModel::Constant(0.5), 4, &mut rng(7)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s.p(i, j), 0.5);
            }
        }
    }

    #[test]
    fn forced_positions_give_exact_rank_one_value() {
        let s = LatentSample::from_positions(GraphonModel::RankOne, vec![0.0, 1.0]).unwrap();
        assert_eq!(s.p(0, 1), 0.5);
    }

    #[test]
    fn sample_latent_rejects_tiny_n() {
        assert!(sample_latent(GraphonModel::Smooth, 2, &mut rng(1)).is_err());
    }

    #[test]
    fn all_ones_p_gives_complete_graph_all_zeros_gives_empty() {
        let full = LatentSample::from_positions(GraphonModel::Constant(1.0), vec![0.2; 6]).unwrap();
        let a = sample_adjacency(&full, &mut rng(3));
        assert_eq!(a.edge_count(), 6 * 5 / 2);

        let none = LatentSample::from_positions(GraphonModel::Constant(0.0), vec![0.2; 6]).unwrap();
        let a = sample_adjacency(&none, &mut rng(3));
        assert_eq!(a.edge_count(), 0);
    }

    #[test]
    fn adjacency_is_symmetric_with_zero_diagonal() {
        let s = sample_latent(GraphonModel::Smooth, 40, &mut rng(11)).unwrap();
        for seed in 0..5u64 {
            let a = sample_adjacency(&s, &mut rng(100 + seed));
            for i in 0..40 {
                assert_eq!(a.entry(i, i), 0);
                for j in 0..40 {
                    assert_eq!(a.entry(i, j), a.entry(j, i));
                }
            }
        }
    }

    #[test]
    fn equal_seeds_identical_different_seeds_differ() {
        let s = sample_latent(GraphonModel::Smooth, 60, &mut rng(5)).unwrap();
        let a1 = sample_adjacency(&s, &mut rng(9));
        let a2 = sample_adjacency(&s, &mut rng(9));
        let a3 = sample_adjacency(&s, &mut rng(10));
        assert_eq!(a1, a2);
        assert_ne!(a1, a3);
    }

    #[test]
    fn constant_density_within_three_binomial_standard_errors() {
        let n = 400;
        let s = sample_latent(GraphonModel::Constant(0.3), n, &mut rng(21)).unwrap();
        let a = sample_adjacency(&s, &mut rng(22));
        let pairs = (n * (n - 1) / 2) as f64;
        let density = a.edge_count() as f64 / pairs;
        let se = (0.3 * 0.7 / pairs).sqrt();
        assert!(
            (density - 0.3).abs() <= 3.0 * se,
            "density {density} vs 0.3 ± {}",
            3.0 * se
        );
    }

    /// Oracle: ∫∫ f for the Smooth kernel by Simpson quadrature, then the
    /// mean off-diagonal P entry must land within 3 standard errors. The
    /// pair means share latent draws, so the error is computed from the
    /// U-statistic projection (4/n)·Var(row mean).
    #[test]
    fn smooth_mean_probability_matches_double_integral() {
        let m = 200; // Simpson panels per axis
        let w = |k: usize| -> f64 {
            if k == 0 || k == m {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let hstep = 1.0 / m as f64;
        let mut integral = 0.0;
        for a in 0..=m {
            for b in 0..=m {
                let u = a as f64 * hstep;
                let v = b as f64 * hstep;
                integral += w(a) * w(b) * GraphonModel::Smooth.eval(u, v).unwrap();
            }
        }
        integral *= (hstep / 3.0) * (hstep / 3.0);
        assert!((integral - 0.6215854203708053).abs() < 1e-9);

        let n = 1000;
        let s = sample_latent(GraphonModel::Smooth, n, &mut rng(31)).unwrap();
        let mut row_means = vec![0.0; n];
        let mut total = 0.0;
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                if j != i {
                    acc += s.p(i, j);
                }
            }
            row_means[i] = acc / (n - 1) as f64;
            total += acc;
        }
        let mean = total / (n * (n - 1)) as f64;
        let rho = row_means.iter().sum::<f64>() / n as f64;
        let var_rows =
            row_means.iter().map(|r| (r - rho) * (r - rho)).sum::<f64>() / (n - 1) as f64;
        let se = (4.0 * var_rows / n as f64).sqrt();
        assert!(
            (mean - integral).abs() <= 3.0 * se,
            "mean {mean} vs integral {integral} ± {}",
            3.0 * se
        );
    }

    #[test]
    fn eval_bounded_and_symmetric_on_dense_random_sample() {
        let mut r = rng(99);
        let mut families = GraphonModel::paper_families().to_vec();
        families.push(GraphonModel::Constant(0.35));
        for _ in 0..10_000 {
            let u: f64 = r.random();
            let v: f64 = r.random();
            for fam in &families {
                let x = fam.eval(u, v).unwrap();
                assert!((0.0..=1.0).contains(&x));
                assert_eq!(x, fam.eval(v, u).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn eval_in_unit_interval_and_symmetric(u in 0.0f64..=1.0, v in 0.0f64..=1.0, c in 0.0f64..=1.0) {
            let mut families = GraphonModel::paper_families().to_vec();
            families.push(GraphonModel::Constant(c));
            for fam in families {
                let x = fam.eval(u, v).unwrap();
                let y = fam.eval(v, u).unwrap();
                prop_assert!((0.0..=1.0).contains(&x));
                prop_assert_eq!(x, y);
            }
        }
    }
}
