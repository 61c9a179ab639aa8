//! Synthetic benchmark tables drawn from an additive error model.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ErrorRecord, ErrorTable, Subset};
use crate::{Error, Result};

/// Planted effects for [`generate_synthetic`].
///
/// Every per-subset test error is `clamp(beta + alpha[a] + delta[d] + noise)`
/// with `noise ~ N(0, sigma0)`, and the CV estimate adds an independent
/// `N(0, cv_noise)` perturbation to the test error.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub beta: f64,
    pub algorithms: Vec<String>,
    pub alpha: Vec<f64>,
    pub datasets: Vec<String>,
    pub delta: DatasetEffects,
    pub sigma0: f64,
    pub cv_noise: f64,
}

/// Dataset effects are either listed or drawn from `N(0, sd)` using the
/// generation seed.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetEffects {
    Fixed(Vec<f64>),
    Random { sd: f64 },
}

impl SynthSpec {
    /// Spec with generated identifiers `a01..` and `d001..`.
    pub fn new(
        beta: f64,
        alpha: Vec<f64>,
        n_datasets: usize,
        delta: DatasetEffects,
        sigma0: f64,
        cv_noise: f64,
    ) -> Self {
        SynthSpec {
            beta,
            algorithms: default_names("a", alpha.len()),
            alpha,
            datasets: default_names("d", n_datasets),
            delta,
            sigma0,
            cv_noise,
        }
    }

    /// Parses the `key = value` spec format. Recognised keys: `beta`,
    /// `alpha` (comma list), `algorithms` (comma list, optional),
    /// `delta` (comma list) or `n_datasets` + `delta_sd`, `datasets`
    /// (optional), `sigma0`, `cv_noise`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<SynthSpec> {
        let mut beta = None;
        let mut alpha: Option<Vec<f64>> = None;
        let mut algorithms: Option<Vec<String>> = None;
        let mut delta: Option<Vec<f64>> = None;
        let mut datasets: Option<Vec<String>> = None;
        let mut n_datasets: Option<usize> = None;
        let mut delta_sd = None;
        let mut sigma0 = None;
        let mut cv_noise = 0.0;

        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i as u64 + 1,
                message: format!("expected key = value, got '{line}'"),
            })?;
            let value = value.trim();
            let num = |v: &str| -> Result<f64> {
                v.trim().parse().map_err(|_| Error::Parse {
                    line: i as u64 + 1,
                    message: format!("cannot parse '{v}' as a number"),
                })
            };
            let list = |v: &str| -> Result<Vec<f64>> { v.split(',').map(num).collect() };
            let names = |v: &str| {
                v.split(',')
                    .map(|s| s.trim().to_string())
                    .collect::<Vec<_>>()
            };
            match key.trim() {
                "beta" => beta = Some(num(value)?),
                "alpha" => alpha = Some(list(value)?),
                "algorithms" => algorithms = Some(names(value)),
                "delta" => delta = Some(list(value)?),
                "datasets" => datasets = Some(names(value)),
                "n_datasets" => {
                    n_datasets = Some(value.parse().map_err(|_| Error::Parse {
                        line: i as u64 + 1,
                        message: format!("cannot parse '{value}' as a count"),
                    })?)
                }
                "delta_sd" => delta_sd = Some(num(value)?),
                "sigma0" => sigma0 = Some(num(value)?),
                "cv_noise" => cv_noise = num(value)?,
                other => {
                    return Err(Error::Parse {
                        line: i as u64 + 1,
                        message: format!("unknown key '{other}'"),
                    })
                }
            }
        }

        let beta = beta.ok_or_else(|| Error::invalid("synth spec: missing 'beta'"))?;
        let alpha = alpha.ok_or_else(|| Error::invalid("synth spec: missing 'alpha'"))?;
        let sigma0 = sigma0.ok_or_else(|| Error::invalid("synth spec: missing 'sigma0'"))?;
        let algorithms = algorithms.unwrap_or_else(|| default_names("a", alpha.len()));
        let (delta, n) =
            match (delta, n_datasets, delta_sd) {
                (Some(d), None, None) => {
                    let n = d.len();
                    (DatasetEffects::Fixed(d), n)
                }
                (None, Some(n), sd) => (
                    DatasetEffects::Random {
                        sd: sd.unwrap_or(0.0),
                    },
                    n,
                ),
                _ => return Err(Error::invalid(
                    "synth spec: give either 'delta' or 'n_datasets' (with optional 'delta_sd')",
                )),
            };
        let datasets = datasets.unwrap_or_else(|| default_names("d", n));
        let spec = SynthSpec {
            beta,
            algorithms,
            alpha,
            datasets,
            delta,
            sigma0,
            cv_noise,
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if self.algorithms.len() != self.alpha.len() {
            return Err(Error::invalid(
                "synth spec: 'algorithms' and 'alpha' differ in length",
            ));
        }
        if let DatasetEffects::Fixed(d) = &self.delta {
            if d.len() != self.datasets.len() {
                return Err(Error::invalid(
                    "synth spec: 'datasets' and 'delta' differ in length",
                ));
            }
        }
        if self.alpha.is_empty() || self.datasets.is_empty() {
            return Err(Error::invalid(
                "synth spec: need at least one algorithm and one dataset",
            ));
        }
        // Zero noise is allowed: it yields the planted values exactly.
        if !(self.sigma0 >= 0.0) || !(self.cv_noise >= 0.0) {
            return Err(Error::invalid(
                "synth spec: noise scales must be non-negative",
            ));
        }
        if let DatasetEffects::Random { sd } = self.delta {
            if !(sd >= 0.0) {
                return Err(Error::invalid("synth spec: delta_sd must be non-negative"));
            }
        }
        Ok(())
    }

    /// Renders the spec back into `key = value` lines.
    pub fn to_lines(&self) -> Vec<String> {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut out = vec![
            format!("beta = {}", self.beta),
            format!("algorithms = {}", self.algorithms.join(",")),
            format!("alpha = {}", join(&self.alpha)),
        ];
        match &self.delta {
            DatasetEffects::Fixed(d) => {
                out.push(format!("datasets = {}", self.datasets.join(",")));
                out.push(format!("delta = {}", join(d)));
            }
            DatasetEffects::Random { sd } => {
                out.push(format!("n_datasets = {}", self.datasets.len()));
                out.push(format!("delta_sd = {sd}"));
            }
        }
        out.push(format!("sigma0 = {}", self.sigma0));
        out.push(format!("cv_noise = {}", self.cv_noise));
        out
    }
}

fn default_names(prefix: &str, n: usize) -> Vec<String> {
    let width = n.to_string().len().max(2);
    (1..=n)
        .map(|i| {
            let mut s = String::from(prefix);
            let _ = write!(s, "{i:0width$}");
            s
        })
        .collect()
}

/// Draws a full two-subset error table. Deterministic for a fixed seed.
pub fn generate_synthetic(spec: &SynthSpec, seed: u64) -> Result<ErrorTable> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta: Vec<f64> = match &spec.delta {
        DatasetEffects::Fixed(d) => d.clone(),
        DatasetEffects::Random { sd } => (0..spec.datasets.len())
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                sd * z
            })
            .collect(),
    };

    let mut records = Vec::with_capacity(spec.datasets.len() * spec.alpha.len() * 2);
    for (d, dataset) in spec.datasets.iter().enumerate() {
        for (a, algorithm) in spec.algorithms.iter().enumerate() {
            let mean = spec.beta + spec.alpha[a] + delta[d];
            for subset in [Subset::First, Subset::Second] {
                let z: f64 = StandardNormal.sample(&mut rng);
                let zc: f64 = StandardNormal.sample(&mut rng);
                let test_error = (mean + spec.sigma0 * z).clamp(0.0, 1.0);
                let cv_error = (test_error + spec.cv_noise * zc).clamp(0.0, 1.0);
                records.push(ErrorRecord {
                    dataset: dataset.clone(),
                    algorithm: algorithm.clone(),
                    subset,
                    test_error,
                    cv_error: Some(cv_error),
                });
            }
        }
    }
    ErrorTable::new(records)
}
