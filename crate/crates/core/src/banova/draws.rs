//! Kept posterior draws and their on-disk format.
//!
//! The file is plain text. A block of `#` header lines describes the model
//! variant, the algorithm and dataset identifiers, the seed and the MCMC
//! configuration; a CSV body follows with one row per kept draw per chain in
//! the fixed column order `chain, draw, beta, alpha[1..A], delta[1..D],
//! sigma0, sigma_a, sigma_d[, df]`. Numbers are written in shortest
//! round-trip form so that reading a file back reproduces every draw bit
//! for bit.

use std::io::{BufRead, BufReader, Read, Write};

use super::sampler::McmcConfig;
use super::{ParameterState, Variant};
use crate::{Error, Result};

const MAGIC: &str = "# benchcmp posterior draws v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawsMeta {
    pub seed: u64,
    pub config: McmcConfig,
    pub y_mean: f64,
    pub y_sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub variant: Variant,
    pub algorithms: Vec<String>,
    pub datasets: Vec<String>,
    pub meta: DrawsMeta,
    /// Row-major draws per chain, `column_count()` values per row.
    chains: Vec<Vec<f64>>,
}

impl PosteriorDraws {
    pub(crate) fn new(
        variant: Variant,
        algorithms: Vec<String>,
        datasets: Vec<String>,
        meta: DrawsMeta,
        chains: Vec<Vec<f64>>,
    ) -> Self {
        PosteriorDraws {
            variant,
            algorithms,
            datasets,
            meta,
            chains,
        }
    }

    pub fn column_count(n_alg: usize, n_ds: usize, variant: Variant) -> usize {
        1 + n_alg + n_ds + 3 + usize::from(variant == Variant::Robust)
    }

    pub fn width(&self) -> usize {
        Self::column_count(self.algorithms.len(), self.datasets.len(), self.variant)
    }

    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    /// Draws per chain.
    pub fn n_draws(&self) -> usize {
        self.chains.first().map_or(0, |c| c.len() / self.width())
    }

    pub fn total_draws(&self) -> usize {
        self.n_chains() * self.n_draws()
    }

    pub fn alpha_column(&self, algorithm: usize) -> usize {
        1 + algorithm
    }

    pub fn delta_column(&self, dataset: usize) -> usize {
        1 + self.algorithms.len() + dataset
    }

    pub fn sigma0_column(&self) -> usize {
        1 + self.algorithms.len() + self.datasets.len()
    }

    pub fn df_column(&self) -> Option<usize> {
        (self.variant == Variant::Robust).then(|| self.sigma0_column() + 3)
    }

    /// Column labels in storage order.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec!["beta".to_string()];
        names.extend((1..=self.algorithms.len()).map(|i| format!("alpha[{i}]")));
        names.extend((1..=self.datasets.len()).map(|i| format!("delta[{i}]")));
        names.extend(["sigma0", "sigma_a", "sigma_d"].map(String::from));
        if self.variant == Variant::Robust {
            names.push("df".into());
        }
        names
    }

    pub fn value(&self, chain: usize, draw: usize, column: usize) -> f64 {
        self.chains[chain][draw * self.width() + column]
    }

    /// One column of one chain.
    pub fn column(&self, chain: usize, column: usize) -> Vec<f64> {
        let w = self.width();
        self.chains[chain]
            .iter()
            .skip(column)
            .step_by(w)
            .copied()
            .collect()
    }

    /// One column for every chain, as used by the convergence diagnostics.
    pub fn parameter_chains(&self, column: usize) -> Vec<Vec<f64>> {
        (0..self.n_chains())
            .map(|c| self.column(c, column))
            .collect()
    }

    pub fn state(&self, chain: usize, draw: usize) -> ParameterState {
        let w = self.width();
        let row = &self.chains[chain][draw * w..(draw + 1) * w];
        let a = self.algorithms.len();
        let d = self.datasets.len();
        ParameterState {
            beta: row[0],
            alpha: row[1..1 + a].to_vec(),
            delta: row[1 + a..1 + a + d].to_vec(),
            sigma0: row[1 + a + d],
            sigma_a: row[2 + a + d],
            sigma_d: row[3 + a + d],
            df: (self.variant == Variant::Robust).then(|| row[4 + a + d]),
            latent_scales: None,
        }
    }

    /// Pooled draws in chain-major order, as `(chain, draw)` pairs.
    pub fn pooled_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n_draws();
        (0..self.n_chains()).flat_map(move |c| (0..n).map(move |d| (c, d)))
    }

    pub fn algorithm_index(&self, name: &str) -> Result<usize> {
        self.algorithms
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::UnknownAlgorithm(name.to_string()))
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "# variant={}", self.variant.as_str())?;
        writeln!(out, "# n_algorithms={}", self.algorithms.len())?;
        writeln!(out, "# n_datasets={}", self.datasets.len())?;
        let c = &self.meta.config;
        writeln!(out, "# seed={}", self.meta.seed)?;
        writeln!(
            out,
            "# chains={} adaptation={} burn_in={} kept={} thinning={}",
            c.chains, c.adaptation, c.burn_in, c.kept, c.thinning
        )?;
        writeln!(out, "# y_mean={} y_sd={}", self.meta.y_mean, self.meta.y_sd)?;
        for a in &self.algorithms {
            writeln!(out, "# algorithm={a}")?;
        }
        for d in &self.datasets {
            writeln!(out, "# dataset={d}")?;
        }
        writeln!(out, "chain,draw,{}", self.column_names().join(","))?;
        let w = self.width();
        let mut line = String::with_capacity(w * 22);
        for (ci, chain) in self.chains.iter().enumerate() {
            for (di, row) in chain.chunks(w).enumerate() {
                line.clear();
                line.push_str(&format!("{ci},{di}"));
                for v in row {
                    line.push(',');
                    line.push_str(&v.to_string());
                }
                writeln!(out, "{line}")?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(source: R) -> Result<PosteriorDraws> {
        let reader = BufReader::new(source);
        let mut lines = reader.lines().enumerate();
        let bad = |line: usize, msg: &str| Error::Parse {
            line: line as u64 + 1,
            message: msg.to_string(),
        };

        match lines.next() {
            Some((_, Ok(l))) if l.trim_end() == MAGIC => {}
            _ => return Err(bad(0, "not a posterior draws file")),
        }
        let mut variant = None;
        let mut n_alg = None;
        let mut n_ds = None;
        let mut seed = None;
        let mut config = None;
        let mut y_mean = None;
        let mut y_sd = None;
        let mut algorithms = Vec::new();
        let mut datasets = Vec::new();
        let mut header_line = None;
        for (i, line) in lines.by_ref() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            let Some(rest) = line.strip_prefix("# ") else {
                header_line = Some((i, line.to_string()));
                break;
            };
            if let Some(v) = rest.strip_prefix("algorithm=") {
                algorithms.push(v.to_string());
                continue;
            }
            if let Some(v) = rest.strip_prefix("dataset=") {
                datasets.push(v.to_string());
                continue;
            }
            let fields: Vec<(&str, &str)> = rest
                .split(' ')
                .filter_map(|kv| kv.split_once('='))
                .collect();
            let get = |k: &str| fields.iter().find(|(key, _)| *key == k).map(|(_, v)| *v);
            let num = |k: &str| -> Result<Option<f64>> {
                get(k)
                    .map(|v| v.parse::<f64>().map_err(|_| bad(i, "bad number")))
                    .transpose()
            };
            let int = |k: &str| -> Result<Option<usize>> {
                get(k)
                    .map(|v| v.parse::<usize>().map_err(|_| bad(i, "bad integer")))
                    .transpose()
            };
            if let Some(v) = get("variant") {
                variant = Some(Variant::parse(v).ok_or_else(|| bad(i, "unknown variant"))?);
            }
            if let Some(v) = int("n_algorithms")? {
                n_alg = Some(v);
            }
            if let Some(v) = int("n_datasets")? {
                n_ds = Some(v);
            }
            if let Some(v) = get("seed") {
                seed = Some(v.parse::<u64>().map_err(|_| bad(i, "bad seed"))?);
            }
            if let Some(chains) = int("chains")? {
                config = Some(McmcConfig {
                    chains,
                    adaptation: int("adaptation")?.unwrap_or(0),
                    burn_in: int("burn_in")?.unwrap_or(0),
                    kept: int("kept")?.unwrap_or(0),
                    thinning: int("thinning")?.unwrap_or(1),
                });
            }
            if let Some(v) = num("y_mean")? {
                y_mean = Some(v);
            }
            if let Some(v) = num("y_sd")? {
                y_sd = Some(v);
            }
        }

        let missing = |what: &str| bad(0, &format!("draws header lacks '{what}'"));
        let variant = variant.ok_or_else(|| missing("variant"))?;
        let config = config.ok_or_else(|| missing("chains"))?;
        if Some(algorithms.len()) != n_alg || Some(datasets.len()) != n_ds {
            return Err(bad(
                0,
                "identifier count does not match the header dimensions",
            ));
        }
        let mut draws = PosteriorDraws {
            variant,
            algorithms,
            datasets,
            meta: DrawsMeta {
                seed: seed.ok_or_else(|| missing("seed"))?,
                config,
                y_mean: y_mean.ok_or_else(|| missing("y_mean"))?,
                y_sd: y_sd.ok_or_else(|| missing("y_sd"))?,
            },
            chains: vec![Vec::new(); config.chains],
        };

        let (hi, header) = header_line.ok_or_else(|| missing("column header"))?;
        let expected = format!("chain,draw,{}", draws.column_names().join(","));
        if header != expected {
            return Err(bad(hi, "column header does not match the model dimensions"));
        }
        let w = draws.width();
        for (i, line) in lines {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let chain: usize = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| bad(i, "bad chain index"))?;
            let draw: usize = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| bad(i, "bad draw index"))?;
            let target = draws
                .chains
                .get_mut(chain)
                .ok_or_else(|| bad(i, "chain index out of range"))?;
            if draw * w != target.len() {
                return Err(bad(i, "draws out of order"));
            }
            let before = target.len();
            for f in fields {
                target.push(f.parse::<f64>().map_err(|_| bad(i, "bad number"))?);
            }
            if target.len() - before != w {
                return Err(bad(i, "wrong number of columns"));
            }
        }
        let n = draws.chains[0].len();
        if n == 0 || draws.chains.iter().any(|c| c.len() != n) {
            return Err(bad(0, "chains are empty or of unequal length"));
        }
        Ok(draws)
    }
}
