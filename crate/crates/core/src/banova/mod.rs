//! Two-factor hierarchical Bayesian ANOVA over the aggregated error matrix.
//!
//! Each present cell is modelled as
//!
//! ```text
//! y[a,d] ~ N(beta + alpha[a] + delta[d], sigma0)      (normal variant)
//! y[a,d] ~ t_df(beta + alpha[a] + delta[d], sigma0)   (robust variant)
//! sigma0   ~ Uniform(ySD/100, ySD*10)
//! beta     ~ N(yMean, ySD*5)
//! alpha[a] ~ N(0, sigma_a),   delta[d] ~ N(0, sigma_d)
//! sigma_a, sigma_d ~ Gamma(mode = ySD/2, sd = ySD*2)
//! df       ~ Exponential(rate = 1/30)
//! ```
//!
//! where yMean and ySD are the mean and standard deviation of the present
//! cells. The location parameters are only identified up to shifts between
//! beta, the alphas and the deltas; every reported quantity is a difference
//! `alpha[i] - alpha[j]`, which is identified.

mod draws;
mod rope;
mod sampler;
mod slice;

use serde::Serialize;

use crate::data::AggregatedMatrix;
use crate::stats::{mean, sample_sd};
use crate::{Error, Result};

pub use draws::{DrawsMeta, PosteriorDraws};
pub use rope::{pairwise_difference_draws, rope_probability, rope_probability_matrix};
pub use sampler::{run_chains, McmcConfig};
pub use slice::SliceSampler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Normal,
    Robust,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Normal => "normal",
            Variant::Robust => "robust",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "normal" => Some(Variant::Normal),
            "robust" => Some(Variant::Robust),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalPrior {
    pub mean: f64,
    pub sd: f64,
}

/// Gamma prior given by its mode and standard deviation, with the derived
/// shape/rate pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaPrior {
    pub mode: f64,
    pub sd: f64,
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    pub fn from_mode_sd(mode: f64, sd: f64) -> Result<GammaPrior> {
        let (shape, rate) = gamma_shape_rate_from_mode_sd(mode, sd)?;
        Ok(GammaPrior {
            mode,
            sd,
            shape,
            rate,
        })
    }

    /// Log density up to a constant, `-inf` outside `(0, inf)`.
    pub fn ln_density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            (self.shape - 1.0) * x.ln() - self.rate * x
        }
    }
}

/// Converts a Gamma (mode, sd) pair into (shape, rate), solving
/// `mode = (shape - 1)/rate` and `sd = sqrt(shape)/rate`.
pub fn gamma_shape_rate_from_mode_sd(mode: f64, sd: f64) -> Result<(f64, f64)> {
    if !(mode > 0.0) || !(sd > 0.0) {
        return Err(Error::invalid(format!(
            "gamma mode and sd must be positive, got mode={mode}, sd={sd}"
        )));
    }
    let rate = (mode + (mode * mode + 4.0 * sd * sd).sqrt()) / (2.0 * sd * sd);
    let shape = 1.0 + mode * rate;
    Ok((shape, rate))
}

/// Parameters pinned to a constant instead of being sampled (a prior
/// collapsed to a point). Used for sampler validation and for the
/// large-df limit of the robust model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FixedParams {
    pub sigma0: Option<f64>,
    pub sigma_a: Option<f64>,
    pub sigma_d: Option<f64>,
    pub df: Option<f64>,
}

/// Rate of the exponential prior on the student-t degrees of freedom.
pub const DF_PRIOR_RATE: f64 = 1.0 / 30.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub variant: Variant,
    pub y_mean: f64,
    pub y_sd: f64,
    /// Support of the uniform prior on sigma0.
    pub sigma0_bounds: (f64, f64),
    pub beta_prior: NormalPrior,
    pub sigma_a_prior: GammaPrior,
    pub sigma_d_prior: GammaPrior,
    /// Exponential rate of the df prior; `Some` only for the robust variant.
    pub df_rate: Option<f64>,
    pub fixed: FixedParams,
}

impl ModelSpec {
    /// Instantiates the priors from the data summary.
    pub fn from_summary(variant: Variant, y_mean: f64, y_sd: f64) -> Result<ModelSpec> {
        if !(y_sd > 0.0) || !y_sd.is_finite() {
            return Err(Error::ZeroVariance);
        }
        let hyper = GammaPrior::from_mode_sd(y_sd / 2.0, y_sd * 2.0)?;
        Ok(ModelSpec {
            variant,
            y_mean,
            y_sd,
            sigma0_bounds: (y_sd / 100.0, y_sd * 10.0),
            beta_prior: NormalPrior {
                mean: y_mean,
                sd: y_sd * 5.0,
            },
            sigma_a_prior: hyper,
            sigma_d_prior: hyper,
            df_rate: (variant == Variant::Robust).then_some(DF_PRIOR_RATE),
            fixed: FixedParams::default(),
        })
    }

    pub fn with_fixed(mut self, fixed: FixedParams) -> Self {
        self.fixed = fixed;
        self
    }

    pub fn is_robust(&self) -> bool {
        self.variant == Variant::Robust
    }
}

/// Computes yMean and ySD (`n - 1` denominator) over the present cells and
/// instantiates the priors.
pub fn build_model(m: &AggregatedMatrix, variant: Variant) -> Result<ModelSpec> {
    if m.n_algorithms() < 2 || m.n_datasets() < 2 {
        return Err(Error::invalid(format!(
            "the model needs at least 2 algorithms and 2 datasets, got {} and {}",
            m.n_algorithms(),
            m.n_datasets()
        )));
    }
    let ys: Vec<f64> = m.present_cells().map(|(_, _, y)| y).collect();
    if ys.len() < 2 {
        return Err(Error::invalid("the model needs at least 2 present cells"));
    }
    let sd = sample_sd(&ys);
    if sd == 0.0 {
        return Err(Error::ZeroVariance);
    }
    ModelSpec::from_summary(variant, mean(&ys), sd)
}

/// One state of the sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterState {
    pub beta: f64,
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
    pub sigma0: f64,
    pub sigma_a: f64,
    pub sigma_d: f64,
    /// Robust variant only.
    pub df: Option<f64>,
    /// Robust variant only: per-cell precision multipliers of the normal
    /// scale mixture, row-major `datasets × algorithms`, 1.0 on missing cells.
    pub latent_scales: Option<Vec<f64>>,
}

impl ParameterState {
    /// Cell location `beta + alpha[a] + delta[d]`.
    pub fn location(&self, dataset: usize, algorithm: usize) -> f64 {
        self.beta + self.alpha[algorithm] + self.delta[dataset]
    }

    /// Algorithm effects shifted to sum to zero. Pairwise differences are
    /// unchanged by the shift.
    pub fn recentered_alpha(&self) -> Vec<f64> {
        let m = mean(&self.alpha);
        self.alpha.iter().map(|a| a - m).collect()
    }
}
