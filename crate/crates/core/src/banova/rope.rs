use rayon::prelude::*;

use super::PosteriorDraws;
use crate::pairwise::{PairwiseKind, PairwiseMatrix};
use crate::{Error, Result};

/// Pooled draws of `alpha[i] - alpha[j]`, chain-major.
pub fn pairwise_difference_draws(p: &PosteriorDraws, i: &str, j: &str) -> Result<Vec<f64>> {
    if i == j {
        return Err(Error::invalid(
            "pairwise difference needs two distinct algorithms",
        ));
    }
    let (ci, cj) = (
        p.alpha_column(p.algorithm_index(i)?),
        p.alpha_column(p.algorithm_index(j)?),
    );
    Ok(p.pooled_indices()
        .map(|(c, d)| p.value(c, d, ci) - p.value(c, d, cj))
        .collect())
}

/// Fraction of pooled draws with `|alpha[i] - alpha[j]| < half_width`.
pub fn rope_probability(p: &PosteriorDraws, i: usize, j: usize, half_width: f64) -> f64 {
    let (ci, cj) = (p.alpha_column(i), p.alpha_column(j));
    let inside = p
        .pooled_indices()
        .filter(|&(c, d)| (p.value(c, d, ci) - p.value(c, d, cj)).abs() < half_width)
        .count();
    inside as f64 / p.total_draws() as f64
}

/// ROPE probability for every pair of algorithms.
pub fn rope_probability_matrix(p: &PosteriorDraws, half_width: f64) -> Result<PairwiseMatrix> {
    if !(half_width > 0.0) {
        return Err(Error::invalid(format!(
            "ROPE half-width must be positive, got {half_width}"
        )));
    }
    let k = p.algorithms.len();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
        .collect();
    let probs: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| rope_probability(p, i, j, half_width))
        .collect();
    let mut grid = vec![vec![0.0; k]; k];
    for (&(i, j), v) in pairs.iter().zip(probs) {
        grid[i][j] = v;
    }
    Ok(PairwiseMatrix::from_fn(
        PairwiseKind::RopeProb,
        p.algorithms.clone(),
        |i, j| grid[i][j],
    ))
}
