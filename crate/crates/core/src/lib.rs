//! Statistical comparison of many algorithms across many datasets.
//!
//! The crate covers the whole pipeline from raw per-subset error tables to
//! comparative statements about the algorithms:
//!
//! * [`data`]: ingestion, aggregation and synthesis of error and timing tables.
//! * [`rank`]: dense and average per-dataset ranks, mean-rank summaries and
//!   rank histograms.
//! * [`nhst`]: the Friedman omnibus test and Nemenyi all-pairs post-hoc test,
//!   built on the functions in [`special`] and [`quadrature`].
//! * [`threshold`]: the empirical irrelevance threshold derived from the
//!   top-3 algorithms of each dataset.
//! * [`banova`]: a two-factor hierarchical Bayesian ANOVA (normal and
//!   student-t likelihoods), its Gibbs/slice sampler and ROPE probabilities.
//! * [`diagnostics`]: Gelman-Rubin PSRF, effective sample size and the
//!   chi-square posterior predictive check.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banova;
pub mod data;
pub mod diagnostics;
mod error;
pub mod nhst;
pub mod pairwise;
pub mod quadrature;
pub mod rank;
pub mod special;
pub mod stats;
pub mod threshold;

pub use error::{Error, Result};
pub use pairwise::{PairwiseKind, PairwiseMatrix};
