//! Friedman omnibus test and Nemenyi all-pairs post-hoc comparison on a
//! complete block design of per-dataset ranks.

use serde::Serialize;

use crate::pairwise::{PairwiseKind, PairwiseMatrix};
use crate::rank::RankMatrix;
use crate::special::{chi_square_sf, studentized_range_quantile_upper, studentized_range_sf};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub dof: u32,
    pub p_value: f64,
    pub n_subjects: usize,
    pub k_treatments: usize,
}

fn check_design(r: &RankMatrix) -> Result<(usize, usize)> {
    if !r.is_complete() {
        let cells = r
            .datasets
            .iter()
            .zip(&r.ranks)
            .flat_map(|(d, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| v.is_none())
                    .map(move |(a, _)| (d.clone(), r.algorithms[a].clone()))
            })
            .collect();
        return Err(Error::IncompleteMatrix { cells });
    }
    let n = r.n_datasets();
    let k = r.n_algorithms();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 datasets, got {n}")));
    }
    if k < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 algorithms, got {k}"
        )));
    }
    Ok((n, k))
}

/// Friedman statistic `12N/(k(k+1)) (Σ R̄_j² - k(k+1)²/4)` with a chi-square
/// reference distribution on `k - 1` degrees of freedom.
pub fn friedman_test(r: &RankMatrix) -> Result<FriedmanResult> {
    let (n, k) = check_design(r)?;
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = r.mean_ranks().iter().map(|m| m * m).sum();
    let statistic =
        (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let dof = (k - 1) as u32;
    Ok(FriedmanResult {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof)?,
        n_subjects: n,
        k_treatments: k,
    })
}

/// Standard error of a mean-rank difference, `sqrt(k(k+1)/(6N))`.
pub fn rank_difference_se(k: usize, n: usize) -> f64 {
    let kf = k as f64;
    (kf * (kf + 1.0) / (6.0 * n as f64)).sqrt()
}

/// p-value for a mean-rank gap: the gap in standard-error units times √2
/// is referred to the infinite-dof studentized range with `k` groups. For
/// `k = 2` this is the two-sided normal test `2(1 - Φ(gap/SE))`.
pub fn nemenyi_p(gap: f64, k: usize, n: usize) -> Result<f64> {
    let q = gap.abs() / rank_difference_se(k, n) * std::f64::consts::SQRT_2;
    Ok(studentized_range_sf(q, k as u32)?.clamp(0.0, 1.0))
}

/// All-pairs Nemenyi p-values.
pub fn nemenyi_pairwise(r: &RankMatrix) -> Result<PairwiseMatrix> {
    let (n, k) = check_design(r)?;
    let means = r.mean_ranks();
    let mut p = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            p[i][j] = nemenyi_p(means[i] - means[j], k, n)?;
        }
    }
    Ok(PairwiseMatrix::from_fn(
        PairwiseKind::NemenyiP,
        r.algorithms.clone(),
        |i, j| p[i][j],
    ))
}

/// Critical difference `q_α/√2 · sqrt(k(k+1)/(6N))` for mean ranks.
pub fn critical_difference(alpha: f64, k: usize, n: usize) -> Result<f64> {
    let q = studentized_range_quantile_upper(alpha, k as u32)?;
    Ok(q / std::f64::consts::SQRT_2 * rank_difference_se(k, n))
}
