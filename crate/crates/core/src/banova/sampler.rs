//! Component-wise Gibbs sampler for the hierarchical ANOVA.
//!
//! Location parameters (beta, each alpha, each delta) are drawn from their
//! conjugate normal full conditionals. Because the likelihood only sees
//! `beta + alpha[a] + delta[d]`, three additional exact moves shift mass
//! along the flat directions (alpha vs beta, delta vs beta, alpha vs delta);
//! each draws the shift from its Gaussian conditional. Scale parameters and
//! the degrees of freedom are updated by slice sampling. The robust variant
//! writes the student-t likelihood as a normal scale mixture with one latent
//! precision multiplier per cell, which keeps the location updates conjugate;
//! df is drawn with the multipliers integrated out and the multipliers are
//! then refreshed given df.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::draws::{DrawsMeta, PosteriorDraws};
use super::slice::SliceSampler;
use super::{ModelSpec, ParameterState};
use crate::data::AggregatedMatrix;
use crate::special::ln_gamma;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McmcConfig {
    pub chains: usize,
    /// Iterations run with slice-width tuning on; discarded.
    pub adaptation: usize,
    /// Iterations run after adaptation with frozen widths; discarded.
    pub burn_in: usize,
    /// Draws kept per chain (after thinning).
    pub kept: usize,
    pub thinning: usize,
}

impl McmcConfig {
    /// 4 chains × (1000 adaptation + 1000 burn-in + 5000 kept).
    pub fn desk() -> Self {
        McmcConfig {
            chains: 4,
            adaptation: 1000,
            burn_in: 1000,
            kept: 5000,
            thinning: 1,
        }
    }

    /// 4 chains, 5000 adaptation and 5000 burn-in steps, 100000 kept draws
    /// in total.
    pub fn paper() -> Self {
        McmcConfig {
            chains: 4,
            adaptation: 5000,
            burn_in: 5000,
            kept: 25_000,
            thinning: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chains < 2 {
            return Err(Error::invalid(
                "at least 2 chains are required for diagnostics",
            ));
        }
        if self.kept == 0 {
            return Err(Error::invalid("at least one draw per chain must be kept"));
        }
        if self.thinning == 0 {
            return Err(Error::invalid("thinning must be at least 1"));
        }
        Ok(())
    }

    pub fn total_iterations(&self) -> usize {
        self.adaptation + self.burn_in + self.kept * self.thinning
    }
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig::desk()
    }
}

/// Present cells in flat arrays plus per-algorithm and per-dataset indexes.
pub(crate) struct Cells {
    pub alg: Vec<usize>,
    pub ds: Vec<usize>,
    pub y: Vec<f64>,
    pub by_alg: Vec<Vec<usize>>,
    pub by_ds: Vec<Vec<usize>>,
}

impl Cells {
    pub fn new(m: &AggregatedMatrix) -> Cells {
        let mut cells = Cells {
            alg: Vec::new(),
            ds: Vec::new(),
            y: Vec::new(),
            by_alg: vec![Vec::new(); m.n_algorithms()],
            by_ds: vec![Vec::new(); m.n_datasets()],
        };
        for (d, a, y) in m.present_cells() {
            let c = cells.y.len();
            cells.alg.push(a);
            cells.ds.push(d);
            cells.y.push(y);
            cells.by_alg[a].push(c);
            cells.by_ds[d].push(c);
        }
        cells
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + sd * z
}

/// Log density of a standard student-t with `df` degrees of freedom,
/// evaluated at each standardized residual and summed.
fn t_log_likelihood(df: f64, z2: &[f64]) -> f64 {
    let n = z2.len() as f64;
    let norm =
        ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let tail: f64 = z2.iter().map(|z| (z / df).ln_1p()).sum();
    n * norm - (df + 1.0) / 2.0 * tail
}

struct Chain<'a> {
    spec: &'a ModelSpec,
    cells: &'a Cells,
    state: ParameterState,
    /// Latent precision multipliers, one per present cell (robust only).
    lambda: Vec<f64>,
    slice_sigma0: SliceSampler,
    slice_sigma_a: SliceSampler,
    slice_sigma_d: SliceSampler,
    slice_df: SliceSampler,
    rng: ChaCha8Rng,
}

impl<'a> Chain<'a> {
    fn new(
        spec: &'a ModelSpec,
        cells: &'a Cells,
        n_alg: usize,
        n_ds: usize,
        mut rng: ChaCha8Rng,
    ) -> Chain<'a> {
        let sd = spec.y_sd;
        let (lo, hi) = spec.sigma0_bounds;
        // Overdispersed start so that between-chain variance is informative.
        let jitter = |rng: &mut ChaCha8Rng, scale: f64| (0.5 * normal(rng, 0.0, 1.0)).exp() * scale;
        let beta = normal(&mut rng, spec.y_mean, 0.5 * sd);
        let alpha = (0..n_alg)
            .map(|_| normal(&mut rng, 0.0, 0.1 * sd))
            .collect();
        let delta = (0..n_ds).map(|_| normal(&mut rng, 0.0, 0.1 * sd)).collect();
        let sigma0 = spec
            .fixed
            .sigma0
            .unwrap_or_else(|| jitter(&mut rng, sd).clamp(lo * 1.001, hi * 0.999));
        let sigma_a = spec
            .fixed
            .sigma_a
            .unwrap_or_else(|| jitter(&mut rng, sd / 2.0));
        let sigma_d = spec
            .fixed
            .sigma_d
            .unwrap_or_else(|| jitter(&mut rng, sd / 2.0));
        let df = spec
            .is_robust()
            .then(|| spec.fixed.df.unwrap_or_else(|| jitter(&mut rng, 5.0)));
        Chain {
            spec,
            cells,
            state: ParameterState {
                beta,
                alpha,
                delta,
                sigma0,
                sigma_a,
                sigma_d,
                df,
                latent_scales: None,
            },
            lambda: vec![1.0; cells.len()],
            slice_sigma0: SliceSampler::new(sd / 10.0, lo, hi),
            slice_sigma_a: SliceSampler::new(sd / 4.0, 0.0, f64::INFINITY),
            slice_sigma_d: SliceSampler::new(sd / 4.0, 0.0, f64::INFINITY),
            slice_df: SliceSampler::new(2.0, 0.0, f64::INFINITY),
            rng,
        }
    }

    fn set_adapting(&mut self, on: bool) {
        self.slice_sigma0.set_adapting(on);
        self.slice_sigma_a.set_adapting(on);
        self.slice_sigma_d.set_adapting(on);
        self.slice_df.set_adapting(on);
    }

    fn residual(&self, c: usize) -> f64 {
        let s = &self.state;
        self.cells.y[c] - s.beta - s.alpha[self.cells.alg[c]] - s.delta[self.cells.ds[c]]
    }

    fn sweep(&mut self) {
        self.update_locations();
        self.update_flat_directions();
        self.update_sigma0();
        self.update_group_scales();
        if self.spec.is_robust() {
            self.update_df_and_latents();
        }
    }

    fn update_locations(&mut self) {
        let cells = self.cells;
        let inv_var0 = 1.0 / (self.state.sigma0 * self.state.sigma0);

        // beta
        let prior = self.spec.beta_prior;
        let mut prec = 1.0 / (prior.sd * prior.sd);
        let mut num = prior.mean * prec;
        for c in 0..cells.len() {
            let w = self.lambda[c] * inv_var0;
            prec += w;
            num +=
                w * (cells.y[c] - self.state.alpha[cells.alg[c]] - self.state.delta[cells.ds[c]]);
        }
        self.state.beta = normal(&mut self.rng, num / prec, prec.sqrt().recip());

        // alpha
        let prior_prec = 1.0 / (self.state.sigma_a * self.state.sigma_a);
        for a in 0..self.state.alpha.len() {
            let mut prec = prior_prec;
            let mut num = 0.0;
            for &c in &cells.by_alg[a] {
                let w = self.lambda[c] * inv_var0;
                prec += w;
                num += w * (cells.y[c] - self.state.beta - self.state.delta[cells.ds[c]]);
            }
            self.state.alpha[a] = normal(&mut self.rng, num / prec, prec.sqrt().recip());
        }

        // delta
        let prior_prec = 1.0 / (self.state.sigma_d * self.state.sigma_d);
        for d in 0..self.state.delta.len() {
            let mut prec = prior_prec;
            let mut num = 0.0;
            for &c in &cells.by_ds[d] {
                let w = self.lambda[c] * inv_var0;
                prec += w;
                num += w * (cells.y[c] - self.state.beta - self.state.alpha[cells.alg[c]]);
            }
            self.state.delta[d] = normal(&mut self.rng, num / prec, prec.sqrt().recip());
        }
    }

    /// Translations that leave every cell location unchanged. The shift `t`
    /// has a Gaussian conditional built from the priors alone.
    fn update_flat_directions(&mut self) {
        let s = &mut self.state;
        let tau2 = self.spec.beta_prior.sd.powi(2);
        let mu = self.spec.beta_prior.mean;
        let n_a = s.alpha.len() as f64;
        let n_d = s.delta.len() as f64;
        let va = s.sigma_a * s.sigma_a;
        let vd = s.sigma_d * s.sigma_d;

        // alpha += t, beta -= t
        let sum_a: f64 = s.alpha.iter().sum();
        let prec = 1.0 / tau2 + n_a / va;
        let mean = ((s.beta - mu) / tau2 - sum_a / va) / prec;
        let t = normal(&mut self.rng, mean, prec.sqrt().recip());
        s.alpha.iter_mut().for_each(|a| *a += t);
        s.beta -= t;

        // delta += t, beta -= t
        let sum_d: f64 = s.delta.iter().sum();
        let prec = 1.0 / tau2 + n_d / vd;
        let mean = ((s.beta - mu) / tau2 - sum_d / vd) / prec;
        let t = normal(&mut self.rng, mean, prec.sqrt().recip());
        s.delta.iter_mut().for_each(|d| *d += t);
        s.beta -= t;

        // alpha += t, delta -= t
        let sum_a: f64 = s.alpha.iter().sum();
        let sum_d: f64 = s.delta.iter().sum();
        let prec = n_a / va + n_d / vd;
        let mean = (sum_d / vd - sum_a / va) / prec;
        let t = normal(&mut self.rng, mean, prec.sqrt().recip());
        s.alpha.iter_mut().for_each(|a| *a += t);
        s.delta.iter_mut().for_each(|d| *d -= t);
    }

    fn update_sigma0(&mut self) {
        if let Some(v) = self.spec.fixed.sigma0 {
            self.state.sigma0 = v;
            return;
        }
        let n = self.cells.len() as f64;
        let ss: f64 = (0..self.cells.len())
            .map(|c| self.lambda[c] * self.residual(c).powi(2))
            .sum();
        let (lo, hi) = self.spec.sigma0_bounds;
        let ln_f = |s: f64| {
            if s <= lo || s >= hi {
                f64::NEG_INFINITY
            } else {
                -n * s.ln() - ss / (2.0 * s * s)
            }
        };
        self.state.sigma0 = self
            .slice_sigma0
            .sample(self.state.sigma0, ln_f, &mut self.rng);
    }

    fn update_group_scales(&mut self) {
        if let Some(v) = self.spec.fixed.sigma_a {
            self.state.sigma_a = v;
        } else {
            let prior = self.spec.sigma_a_prior;
            let n = self.state.alpha.len() as f64;
            let ss: f64 = self.state.alpha.iter().map(|a| a * a).sum();
            let ln_f = |s: f64| prior.ln_density(s) - n * s.ln() - ss / (2.0 * s * s);
            self.state.sigma_a = self
                .slice_sigma_a
                .sample(self.state.sigma_a, ln_f, &mut self.rng);
        }
        if let Some(v) = self.spec.fixed.sigma_d {
            self.state.sigma_d = v;
        } else {
            let prior = self.spec.sigma_d_prior;
            let n = self.state.delta.len() as f64;
            let ss: f64 = self.state.delta.iter().map(|d| d * d).sum();
            let ln_f = |s: f64| prior.ln_density(s) - n * s.ln() - ss / (2.0 * s * s);
            self.state.sigma_d = self
                .slice_sigma_d
                .sample(self.state.sigma_d, ln_f, &mut self.rng);
        }
    }

    fn update_df_and_latents(&mut self) {
        let s0 = self.state.sigma0;
        let z2: Vec<f64> = (0..self.cells.len())
            .map(|c| (self.residual(c) / s0).powi(2))
            .collect();
        let df = match self.spec.fixed.df {
            Some(v) => v,
            None => {
                let rate = self.spec.df_rate.unwrap_or(super::DF_PRIOR_RATE);
                let ln_f = |df: f64| {
                    if df <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        -rate * df + t_log_likelihood(df, &z2)
                    }
                };
                let current = self.state.df.unwrap_or(1.0);
                self.slice_df.sample(current, ln_f, &mut self.rng)
            }
        };
        self.state.df = Some(df);
        let shape = (df + 1.0) / 2.0;
        for (c, z) in z2.iter().enumerate() {
            let rate = (df + z) / 2.0;
            // Gamma(shape, scale = 1/rate)
            let g = Gamma::new(shape, 1.0 / rate).expect("positive gamma parameters");
            self.lambda[c] = g.sample(&mut self.rng);
        }
    }

    fn check_finite(&self, chain: usize, iteration: usize) -> Result<()> {
        let s = &self.state;
        let ok = s.beta.is_finite()
            && s.sigma0.is_finite()
            && s.sigma_a.is_finite()
            && s.sigma_a > 0.0
            && s.sigma_d.is_finite()
            && s.sigma_d > 0.0
            && s.df.is_none_or(|d| d.is_finite() && d > 0.0)
            && s.alpha.iter().all(|v| v.is_finite())
            && s.delta.iter().all(|v| v.is_finite())
            && self.lambda.iter().all(|l| l.is_finite() && *l > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::NonFinite {
                chain,
                iteration,
                state: format!(
                    "beta={} sigma0={} sigma_a={} sigma_d={} df={:?} alpha={:?}",
                    s.beta, s.sigma0, s.sigma_a, s.sigma_d, s.df, s.alpha
                ),
            })
        }
    }

    fn push_row(&self, out: &mut Vec<f64>) {
        let s = &self.state;
        out.push(s.beta);
        out.extend_from_slice(&s.alpha);
        out.extend_from_slice(&s.delta);
        out.push(s.sigma0);
        out.push(s.sigma_a);
        out.push(s.sigma_d);
        if let Some(df) = s.df {
            out.push(df);
        }
    }
}

fn run_one(
    spec: &ModelSpec,
    cells: &Cells,
    n_alg: usize,
    n_ds: usize,
    cfg: &McmcConfig,
    seed: u64,
    chain: usize,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64 + 1);
    let mut sampler = Chain::new(spec, cells, n_alg, n_ds, rng);

    let mut iteration = 0;
    sampler.set_adapting(true);
    for _ in 0..cfg.adaptation {
        sampler.sweep();
        sampler.check_finite(chain, iteration)?;
        iteration += 1;
    }
    sampler.set_adapting(false);
    for _ in 0..cfg.burn_in {
        sampler.sweep();
        sampler.check_finite(chain, iteration)?;
        iteration += 1;
    }
    let width = PosteriorDraws::column_count(n_alg, n_ds, spec.variant);
    let mut rows = Vec::with_capacity(cfg.kept * width);
    for _ in 0..cfg.kept {
        for _ in 0..cfg.thinning {
            sampler.sweep();
            sampler.check_finite(chain, iteration)?;
            iteration += 1;
        }
        sampler.push_row(&mut rows);
    }
    Ok(rows)
}

/// Runs `cfg.chains` independent chains, each on its own RNG stream derived
/// from `seed`. Chains execute in parallel on the current rayon pool; the
/// result does not depend on the number of threads.
pub fn run_chains(
    spec: &ModelSpec,
    data: &AggregatedMatrix,
    cfg: &McmcConfig,
    seed: u64,
) -> Result<PosteriorDraws> {
    cfg.validate()?;
    if data.n_algorithms() < 2 || data.n_datasets() < 2 {
        return Err(Error::invalid(
            "the model needs at least 2 algorithms and 2 datasets",
        ));
    }
    let cells = Cells::new(data);
    if cells.len() < 2 {
        return Err(Error::invalid("the model needs at least 2 present cells"));
    }
    let (n_alg, n_ds) = (data.n_algorithms(), data.n_datasets());
    let chains = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_one(spec, &cells, n_alg, n_ds, cfg, seed, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(PosteriorDraws::new(
        spec.variant,
        data.algorithms.clone(),
        data.datasets.clone(),
        DrawsMeta {
            seed,
            config: *cfg,
            y_mean: spec.y_mean,
            y_sd: spec.y_sd,
        },
        chains,
    ))
}
