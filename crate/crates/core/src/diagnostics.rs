//! Convergence diagnostics (Gelman-Rubin PSRF, effective sample size) and
//! the chi-square-discrepancy posterior predictive check.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::banova::{PosteriorDraws, Variant};
use crate::data::AggregatedMatrix;
use crate::stats::{mean, sample_variance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PsrfOptions {
    /// Apply the `(d + 3)/(d + 1)` sampling-variability correction.
    pub corrected: bool,
    /// Split every chain in half before computing.
    pub split: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsrfEstimate {
    pub point: f64,
    /// Not computed by the base estimator.
    pub upper_ci: Option<f64>,
}

fn check_chains(chains: &[Vec<f64>]) -> Result<usize> {
    if chains.len() < 2 {
        return Err(Error::invalid("at least 2 chains are required"));
    }
    let n = chains[0].len();
    if chains.iter().any(|c| c.len() != n) {
        return Err(Error::invalid("chains must have equal lengths"));
    }
    if n < 2 {
        return Err(Error::invalid("chains must hold at least 2 draws"));
    }
    Ok(n)
}

fn split_halves(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let half = chains[0].len() / 2;
    chains
        .iter()
        .flat_map(|c| [c[..half].to_vec(), c[c.len() - half..].to_vec()])
        .collect()
}

/// Potential scale reduction factor `sqrt(Var⁺ / W)` with
/// `Var⁺ = (n-1)/n · W + B/n`.
pub fn psrf(chains: &[Vec<f64>], opts: PsrfOptions) -> Result<PsrfEstimate> {
    check_chains(chains)?;
    let split;
    let chains = if opts.split {
        split = split_halves(chains);
        check_chains(&split)?;
        &split[..]
    } else {
        chains
    };
    let m = chains.len() as f64;
    let n = chains[0].len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let vars: Vec<f64> = chains.iter().map(|c| sample_variance(c)).collect();
    let w = mean(&vars);
    if !(w > 0.0) {
        return Err(Error::Undefined("zero within-chain variance".into()));
    }
    // B/n is the variance of the chain means.
    let b_over_n = sample_variance(&means);
    let point = if opts.corrected {
        // Brooks-Gelman degrees-of-freedom adjustment.
        let v = (n - 1.0) / n * w + (1.0 + 1.0 / m) * b_over_n;
        let var_w = sample_variance(&vars) / m;
        let var_b = 2.0 * b_over_n * b_over_n / (m - 1.0);
        let mean_sq: Vec<f64> = means.iter().map(|x| x * x).collect();
        let mu = mean(&means);
        let cov_wb = n / m * (covariance(&vars, &mean_sq) - 2.0 * mu * covariance(&vars, &means));
        let var_v = ((n - 1.0).powi(2) * var_w
            + (1.0 + 1.0 / m).powi(2) * var_b
            + 2.0 * (n - 1.0) * (1.0 + 1.0 / m) * cov_wb)
            / (n * n);
        let d = 2.0 * v * v / var_v;
        let adj = if d.is_finite() {
            (d + 3.0) / (d + 1.0)
        } else {
            1.0
        };
        (adj * ((n - 1.0) / n + (1.0 + 1.0 / m) * b_over_n / w)).sqrt()
    } else {
        (((n - 1.0) / n * w + b_over_n) / w).sqrt()
    };
    Ok(PsrfEstimate {
        point,
        upper_ci: None,
    })
}

fn covariance(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / (x.len() as f64 - 1.0)
}

/// Biased autocovariance at every lag, via zero-padded FFT.
fn autocovariance(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let m = mean(x);
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .map(|v| Complex::new(v - m, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    buf[..n]
        .iter()
        .map(|c| c.re / (size as f64 * n as f64))
        .collect()
}

/// ESS of one chain with Geyer's initial positive sequence truncation.
fn chain_ess(x: &[f64]) -> Result<f64> {
    let n = x.len();
    let acov = autocovariance(x);
    if !(acov[0] > 0.0) {
        return Err(Error::Undefined("constant chain".into()));
    }
    let rho = |t: usize| if t < n { acov[t] / acov[0] } else { 0.0 };
    let mut sum = 0.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = rho(2 * k) + rho(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        k += 1;
    }
    let tau = (-1.0 + 2.0 * sum).max(1.0 / (n as f64).log10().max(1.0));
    Ok(n as f64 / tau)
}

/// Effective sample size, summed over chains.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> Result<f64> {
    check_chains(chains)?;
    chains.iter().map(|c| chain_ess(c)).sum()
}

/// Monte Carlo standard error of the pooled mean, `sd / sqrt(ESS)`. Zero
/// when every value is identical.
pub fn mcse_mean(chains: &[Vec<f64>]) -> Result<f64> {
    let pooled: Vec<f64> = chains.iter().flatten().copied().collect();
    let v = sample_variance(&pooled);
    if v == 0.0 {
        return Ok(0.0);
    }
    // Constant individual chains carry no autocorrelation information;
    // treat them as independent draws.
    let ess: f64 = chains
        .iter()
        .map(|c| chain_ess(c).unwrap_or(c.len() as f64))
        .sum();
    Ok((v / ess).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterDiagnostic {
    pub name: String,
    pub rhat: Option<f64>,
    pub ess: Option<f64>,
}

/// PSRF and ESS for every stored parameter. Location effects are labelled
/// with their algorithm and dataset identifiers.
pub fn convergence_report(
    p: &PosteriorDraws,
    opts: PsrfOptions,
) -> Result<Vec<ParameterDiagnostic>> {
    let mut names = vec!["beta".to_string()];
    names.extend(p.algorithms.iter().map(|a| format!("alpha[{a}]")));
    names.extend(p.datasets.iter().map(|d| format!("delta[{d}]")));
    names.extend(["sigma0", "sigma_a", "sigma_d"].map(String::from));
    if p.variant == Variant::Robust {
        names.push("df".into());
    }
    names
        .into_iter()
        .enumerate()
        .map(|(col, name)| {
            let chains = p.parameter_chains(col);
            let rhat = match psrf(&chains, opts) {
                Ok(r) => Some(r.point),
                Err(Error::Undefined(_)) => None,
                Err(e) => return Err(e),
            };
            let ess = match effective_sample_size(&chains) {
                Ok(e) => Some(e),
                Err(Error::Undefined(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(ParameterDiagnostic { name, rhat, ess })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PpcResult {
    /// Fraction of draws with `T(y_rep) >= T(y)`.
    pub p_value: f64,
    /// `(T(y; θ), T(y_rep; θ))` per sampled draw.
    pub discrepancies: Vec<(f64, f64)>,
    /// Fraction of replicated cells below zero.
    pub negative_fraction: f64,
}

/// Chi-square discrepancy check: for `n_draws` posterior draws chosen at
/// random, compares `T(y; θ) = Σ (y - ν)²/σ0²` on the observed cells with the
/// same statistic on a replicate drawn from the model at θ. Replicates are not
/// clamped to [0, 1].
pub fn posterior_predictive_check(
    p: &PosteriorDraws,
    data: &AggregatedMatrix,
    n_draws: usize,
    seed: u64,
) -> Result<PpcResult> {
    if p.variant != Variant::Normal {
        return Err(Error::Unsupported(
            "posterior predictive check needs the normal model: the chi-square discrepancy uses the data variance, \
             which is not defined for student-t degrees of freedom below 2"
                .into(),
        ));
    }
    if n_draws == 0 {
        return Err(Error::invalid("n_draws must be at least 1"));
    }
    let total = p.total_draws();
    if n_draws > total {
        return Err(Error::invalid(format!(
            "n_draws {n_draws} exceeds the {total} kept draws"
        )));
    }
    if p.algorithms != data.algorithms || p.datasets != data.datasets {
        return Err(Error::invalid(
            "draws and data have different algorithms or datasets",
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = sample(&mut rng, total, n_draws).into_vec();
    chosen.sort_unstable();
    let per_chain = p.n_draws();
    let cells: Vec<(usize, usize, f64)> = data.present_cells().collect();

    let mut discrepancies = Vec::with_capacity(n_draws);
    let mut exceed = 0usize;
    let mut negative = 0usize;
    for idx in chosen {
        let theta = p.state(idx / per_chain, idx % per_chain);
        let inv_var = 1.0 / (theta.sigma0 * theta.sigma0);
        let mut t_real = 0.0;
        let mut t_rep = 0.0;
        for &(d, a, y) in &cells {
            let nu = theta.location(d, a);
            let z: f64 = StandardNormal.sample(&mut rng);
            let y_rep = nu + theta.sigma0 * z;
            if y_rep < 0.0 {
                negative += 1;
            }
            t_real += (y - nu).powi(2) * inv_var;
            t_rep += (y_rep - nu).powi(2) * inv_var;
        }
        if t_rep >= t_real {
            exceed += 1;
        }
        discrepancies.push((t_real, t_rep));
    }
    Ok(PpcResult {
        p_value: exceed as f64 / n_draws as f64,
        negative_fraction: negative as f64 / (n_draws * cells.len()) as f64,
        discrepancies,
    })
}
