//! One-sided LOO predictions, symmetrized estimates, classical predictions,
//! and the oracle error decomposition.

use crate::error::{Error, Result};
use crate::graphon::{Adjacency, LatentSample};
use crate::mat::SquareMatrix;
use crate::neighborhood::Neighborhood;

/// One-sided estimates P̃ (generally asymmetric) together with the
/// symmetrized P̂ = (P̃ + P̃ᵀ)/2. Diagonals are stored as zero and excluded
/// from every metric; the estimator is undefined there.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateMatrix {
    tilde: SquareMatrix,
    hat: SquareMatrix,
}

impl EstimateMatrix {
    /// Symmetrizes a filled one-sided matrix. The diagonal is forced to zero.
    pub fn from_tilde(mut tilde: SquareMatrix) -> Self {
        let n = tilde.n();
        for i in 0..n {
            tilde.set(i, i, 0.0);
        }
        let hat = tilde.symmetrized();
        EstimateMatrix { tilde, hat }
    }

    pub fn n(&self) -> usize {
        self.tilde.n()
    }

    /// One-sided P̃_ij.
    #[inline]
    pub fn tilde(&self, i: usize, j: usize) -> f64 {
        self.tilde.get(i, j)
    }

    /// Symmetrized P̂_ij.
    #[inline]
    pub fn hat(&self, i: usize, j: usize) -> f64 {
        self.hat.get(i, j)
    }

    pub fn tilde_matrix(&self) -> &SquareMatrix {
        &self.tilde
    }

    pub fn hat_matrix(&self) -> &SquareMatrix {
        &self.hat
    }
}

/// P̂ = (P̃ + P̃ᵀ)/2, entrywise.
pub fn symmetrize(tilde: &SquareMatrix) -> SquareMatrix {
    tilde.symmetrized()
}

fn predict(a: &Adjacency, nbhd: &Neighborhood, j: usize) -> Result<f64> {
    if nbhd.is_empty() {
        return Err(Error::argument("empty neighborhood".to_string()));
    }
    if nbhd.members().contains(&(j as u32)) || nbhd.members().contains(&(nbhd.anchor() as u32)) {
        return Err(Error::argument(format!(
            "neighborhood of {} may contain neither the anchor nor the target column {j}",
            nbhd.anchor()
        )));
    }
    let row_j = a.row(j);
    let sum: u32 = nbhd
        .members()
        .iter()
        .map(|&k| row_j[k as usize] as u32)
        .sum();
    Ok(sum as f64 / nbhd.len() as f64)
}

/// P̃_ij: mean of A_kj over the LOO neighborhood of i. With |N| = h the
/// value is a multiple of 1/h.
pub fn loo_predict(a: &Adjacency, nbhd: &Neighborhood, j: usize) -> Result<f64> {
    predict(a, nbhd, j)
}

/// Classical prediction: mean of A_kj over the quantile neighborhood,
/// divided by the realized member count (which may exceed h under ties).
pub fn classical_predict(a: &Adjacency, nbhd: &Neighborhood, j: usize) -> Result<f64> {
    predict(a, nbhd, j)
}

/// Additive split of the one-sided error: stochastic fluctuation U,
/// deterministic bias B, and the total Δ = P̃ − P, with Δ = U + B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorDecomposition {
    /// U = (1/h)·Σ (A_kj − P_kj): mean-zero given the frozen neighborhood.
    pub fluctuation: f64,
    /// B = (1/h)·Σ (P_kj − P_ij): fixed once the neighborhood is fixed.
    pub bias: f64,
    /// Δ = P̃_ij − P_ij, computed directly from the prediction.
    pub delta: f64,
}

/// Oracle-mode decomposition; requires the true probabilities, so it is only
/// reachable from simulation paths that hold a [`LatentSample`].
pub fn error_decompose(
    truth: &LatentSample,
    nbhd: &Neighborhood,
    a: &Adjacency,
    i: usize,
    j: usize,
) -> Result<ErrorDecomposition> {
    if i != nbhd.anchor() {
        return Err(Error::argument(format!(
            "anchor mismatch: neighborhood belongs to {}, not {i}",
            nbhd.anchor()
        )));
    }
    let tilde = loo_predict(a, nbhd, j)?;
    let p_ij = truth.p(i, j);
    let inv = 1.0 / nbhd.len() as f64;
    let mut u = 0.0;
    let mut b = 0.0;
    for &k in nbhd.members() {
        let k = k as usize;
        let p_kj = truth.p(k, j);
        u += a.entry(k, j) as f64 - p_kj;
        b += p_kj - p_ij;
    }
    Ok(ErrorDecomposition {
        fluctuation: u * inv,
        bias: b * inv,
        delta: tilde - p_ij,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::{sample_adjacency, sample_latent, GraphonModel};
    use crate::neighborhood::{loo_neighborhood, Bandwidth};
    use crate::rng::{SeedStreams, StreamKind};
    use crate::twohop::{full_twohop, loo_twohop};
    use rand::Rng;

    fn fixture(n: usize, seed: u64) -> (LatentSample, Adjacency) {
        let streams = SeedStreams::new(seed);
        let s = sample_latent(
            GraphonModel::Smooth,
            n,
            &mut streams.stream(StreamKind::Latent, 0),
        )
        .unwrap();
        let a = sample_adjacency(&s, &mut streams.stream(StreamKind::Edges, 0));
        (s, a)
    }

    fn handmade_nbhd(anchor: usize, j: usize, members: Vec<u32>) -> Neighborhood {
        let h = members.len();
        Neighborhood::from_parts(anchor, Some(j), h, members)
    }

    #[test]
    fn predict_examples() {
        let mut a = Adjacency::empty(8);
        let j = 7;
        for k in [1, 2, 3, 4] {
            a.set_edge(k, j, true);
        }
        let all_adjacent = handmade_nbhd(0, j, vec![1, 2, 3, 4]);
        assert_eq!(loo_predict(&a, &all_adjacent, j).unwrap(), 1.0);

        let two_of_four = handmade_nbhd(0, j, vec![1, 2, 5, 6]);
        assert_eq!(loo_predict(&a, &two_of_four, j).unwrap(), 0.5);

        let one = handmade_nbhd(0, j, vec![2]);
        assert_eq!(classical_predict(&a, &one, j).unwrap(), 1.0);
        let five = handmade_nbhd(4, j, vec![0, 1, 2, 5, 6]);
        assert!((classical_predict(&a, &five, j).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn predict_rejects_bad_neighborhoods() {
        let a = Adjacency::empty(6);
        let empty = handmade_nbhd(0, 5, vec![]);
        assert!(loo_predict(&a, &empty, 5).is_err());
        let holds_j = handmade_nbhd(0, 5, vec![1, 5]);
        assert!(loo_predict(&a, &holds_j, 5).is_err());
        let holds_anchor = handmade_nbhd(0, 5, vec![0, 1]);
        assert!(loo_predict(&a, &holds_anchor, 5).is_err());
    }

    #[test]
    fn predict_matches_naive_sum_oracle() {
        let n = 10;
        let (_, a) = fixture(n, 50);
        let m = full_twohop(&a);
        let h = Bandwidth::new(4, n).unwrap();
        for j in 0..n {
            let view = loo_twohop(&a, &m, j);
            for i in 0..n {
                if i == j {
                    continue;
                }
                let nb = loo_neighborhood(&view, i, h).unwrap();
                let mut acc = 0.0;
                for &k in nb.members() {
                    acc += a.entry(k as usize, j) as f64;
                }
                assert_eq!(loo_predict(&a, &nb, j).unwrap(), acc / 4.0);
            }
        }
    }

    #[test]
    fn symmetrize_examples() {
        let mut tilde = SquareMatrix::zeros(3);
        tilde.set(0, 1, 0.2);
        tilde.set(1, 0, 0.4);
        let est = EstimateMatrix::from_tilde(tilde.clone());
        assert!((est.hat(0, 1) - 0.3).abs() < 1e-15);
        assert!((est.hat(1, 0) - 0.3).abs() < 1e-15);

        // symmetric input is a fixed point
        let sym = symmetrize(&tilde);
        let twice = symmetrize(&sym);
        assert_eq!(sym, twice);
    }

    #[test]
    fn hat_is_exactly_symmetric_on_random_input() {
        let mut rng = SeedStreams::new(8).stream(StreamKind::Edges, 0);
        let tilde = SquareMatrix::from_fn(15, |_, _| rng.random::<f64>());
        let est = EstimateMatrix::from_tilde(tilde);
        let diff = est
            .hat_matrix()
            .max_abs_diff(&est.hat_matrix().transposed());
        assert_eq!(diff, 0.0);
        for i in 0..15 {
            assert_eq!(est.tilde(i, i), 0.0);
            assert_eq!(est.hat(i, i), 0.0);
        }
    }

    #[test]
    fn constant_graphon_has_exactly_zero_bias() {
        for c in [0.3, 0.5, 0.77] {
            let streams = SeedStreams::new(60);
            let s = sample_latent(
                GraphonModel::Constant(c),
                12,
                &mut streams.stream(StreamKind::Latent, 0),
            )
            .unwrap();
            let a = sample_adjacency(&s, &mut streams.stream(StreamKind::Edges, 0));
            let m = full_twohop(&a);
            let h = Bandwidth::new(5, 12).unwrap();
            for j in 0..12 {
                let view = loo_twohop(&a, &m, j);
                for i in 0..12 {
                    if i == j {
                        continue;
                    }
                    let nb = loo_neighborhood(&view, i, h).unwrap();
                    let d = error_decompose(&s, &nb, &a, i, j).unwrap();
                    assert_eq!(d.bias, 0.0);
                }
            }
        }
    }

    #[test]
    fn all_adjacent_members_give_u_of_one_minus_c() {
        let c = 0.3;
        let s = LatentSample::from_positions(GraphonModel::Constant(c), vec![0.5; 8]).unwrap();
        let mut a = Adjacency::empty(8);
        let j = 7;
        for k in [1, 2, 3] {
            a.set_edge(k, j, true);
        }
        let nb = handmade_nbhd(0, j, vec![1, 2, 3]);
        let d = error_decompose(&s, &nb, &a, 0, j).unwrap();
        assert!((d.fluctuation - (1.0 - c)).abs() < 1e-12);
    }

    #[test]
    fn decomposition_identity_holds_to_1e12() {
        let n = 16;
        let (s, a) = fixture(n, 90);
        let m = full_twohop(&a);
        let h = Bandwidth::new(6, n).unwrap();
        for j in 0..n {
            let view = loo_twohop(&a, &m, j);
            for i in 0..n {
                if i == j {
                    continue;
                }
                let nb = loo_neighborhood(&view, i, h).unwrap();
                let d = error_decompose(&s, &nb, &a, i, j).unwrap();
                assert!(
                    (d.delta - (d.fluctuation + d.bias)).abs() < 1e-12,
                    "identity failed at ({i}, {j})"
                );
            }
        }
    }
}
