//! Leave-one-out neighborhood smoothing for network edge probabilities.
//!
//! Given a single observed adjacency matrix, neighborhood smoothing
//! estimates each latent edge probability P_ij by averaging the column-j
//! entries over nodes structurally similar to i. The leave-one-out variant
//! builds the neighborhood of i from the graph with node j deleted, so the
//! averaged edges never influence the averaging weights. That decoupling is
//! what makes the entrywise confidence intervals in [`inference`] valid:
//! conditional on the neighborhood, the averaged edges are independent
//! Bernoulli variables.
//!
//! Module map:
//! - [`graphon`]: kernel families, latent sampling, adjacency sampling
//! - [`twohop`]: M = A²/n, rank-corrected M^(−j), LOO and classical distances
//! - [`neighborhood`]: fixed-size LOO selection, quantile selection, bandwidth rules
//! - [`estimator`]: one-sided and symmetrized predictions, error decomposition
//! - [`inference`]: sample/plug-in variances, EB and normal intervals, coverage
//! - [`tuning`]: honest cross-validation over a bandwidth grid
//! - [`harness`]: end-to-end simulation with MSE/coverage/width reports
//!
//! Everything seeded goes through [`rng::SeedStreams`]; results are
//! reproducible bit-for-bit across runs and thread counts.

pub mod error;
pub mod estimator;
pub mod graphon;
pub mod harness;
pub mod inference;
pub mod mat;
pub mod neighborhood;
pub mod rng;
pub mod stats;
pub mod tuning;
pub mod twohop;

pub use error::{Error, Result};
