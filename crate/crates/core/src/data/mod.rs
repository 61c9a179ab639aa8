//! Benchmark measurement tables: per-subset error records, timings, and the
//! aggregated dataset × algorithm error matrix.
//!
//! Input is long-form CSV. Every (dataset, algorithm) pair is measured twice,
//! once per training half, and the aggregated error of the pair is the mean
//! of the two test errors. Pairs lacking either half are kept as missing
//! cells rather than rejected.

mod csvio;
pub mod synth;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::{Error, Result};

pub use csvio::{ingest_error_table, ingest_timing_table, write_error_table};
pub use synth::{generate_synthetic, SynthSpec};

/// Which half of a dataset the algorithm was trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Subset {
    First,
    Second,
}

impl Subset {
    pub fn from_label(label: &str) -> Option<Subset> {
        match label {
            "1" => Some(Subset::First),
            "2" => Some(Subset::Second),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Subset::First => 1,
            Subset::Second => 2,
        }
    }

    pub fn other(self) -> Subset {
        match self {
            Subset::First => Subset::Second,
            Subset::Second => Subset::First,
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub dataset: String,
    pub algorithm: String,
    /// Training half; the test error was measured on the other half.
    pub subset: Subset,
    pub test_error: f64,
    /// Inner cross-validation estimate at the selected hyperparameters.
    pub cv_error: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorTable {
    pub records: Vec<ErrorRecord>,
}

impl ErrorTable {
    /// Builds a table, enforcing the value range and key uniqueness.
    pub fn new(records: Vec<ErrorRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, r) in records.iter().enumerate() {
            check_fraction(r.test_error, "test_error", i as u64 + 1)?;
            if let Some(cv) = r.cv_error {
                check_fraction(cv, "cv_error", i as u64 + 1)?;
            }
            if !seen.insert((r.dataset.as_str(), r.algorithm.as_str(), r.subset)) {
                return Err(Error::DuplicateKey {
                    line: i as u64 + 1,
                    dataset: r.dataset.clone(),
                    algorithm: r.algorithm.clone(),
                    subset: r.subset.number(),
                });
            }
        }
        Ok(ErrorTable { records })
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn has_cv(&self) -> bool {
        self.records.iter().any(|r| r.cv_error.is_some())
    }

    /// Records keyed by (dataset, algorithm), one slot per subset.
    pub(crate) fn by_pair(&self) -> BTreeMap<(&str, &str), [Option<&ErrorRecord>; 2]> {
        let mut map: BTreeMap<(&str, &str), [Option<&ErrorRecord>; 2]> = BTreeMap::new();
        for r in &self.records {
            let slot = map
                .entry((r.dataset.as_str(), r.algorithm.as_str()))
                .or_default();
            slot[usize::from(r.subset.number() - 1)] = Some(r);
        }
        map
    }
}

pub(crate) fn check_fraction(v: f64, field: &str, line: u64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Parse {
            line,
            message: format!("{field} value {v} outside [0, 1]"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRecord {
    pub dataset: String,
    pub algorithm: String,
    pub subset: Subset,
    /// Wall time to train on one half and predict the other.
    pub train_test_seconds: f64,
    pub hyper_search_seconds: f64,
    pub n_hyper_combos: u32,
}

impl TimingRecord {
    /// Hyperparameter-search time per tested combination.
    pub fn per_hyper_seconds(&self) -> f64 {
        self.hyper_search_seconds / f64::from(self.n_hyper_combos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingMetric {
    OneTrainTest,
    PerHyper,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimingTable {
    pub records: Vec<TimingRecord>,
}

impl TimingTable {
    /// Lays the timings out as a matrix whose rows ("datasets") are the
    /// (dataset, subset) pairs, so that each training half is one subject.
    pub fn subject_matrix(&self, metric: TimingMetric) -> AggregatedMatrix {
        let algorithms: BTreeSet<&str> =
            self.records.iter().map(|r| r.algorithm.as_str()).collect();
        let subjects: BTreeSet<(&str, Subset)> = self
            .records
            .iter()
            .map(|r| (r.dataset.as_str(), r.subset))
            .collect();
        let algorithms: Vec<String> = algorithms.into_iter().map(String::from).collect();
        let subjects: Vec<(&str, Subset)> = subjects.into_iter().collect();
        let a_index: BTreeMap<&str, usize> = algorithms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_str(), i))
            .collect();
        let s_index: BTreeMap<(&str, Subset), usize> =
            subjects.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut values = vec![vec![None; algorithms.len()]; subjects.len()];
        for r in &self.records {
            let v = match metric {
                TimingMetric::OneTrainTest => r.train_test_seconds,
                TimingMetric::PerHyper => r.per_hyper_seconds(),
            };
            values[s_index[&(r.dataset.as_str(), r.subset)]][a_index[r.algorithm.as_str()]] =
                Some(v);
        }
        AggregatedMatrix {
            algorithms,
            datasets: subjects.iter().map(|(d, s)| format!("{d}/{s}")).collect(),
            values,
        }
    }
}

/// Dataset × algorithm grid of aggregated error rates. `None` marks a
/// missing cell (one or both halves were not measured).
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedMatrix {
    pub algorithms: Vec<String>,
    pub datasets: Vec<String>,
    /// `values[dataset][algorithm]`.
    pub values: Vec<Vec<Option<f64>>>,
}

impl AggregatedMatrix {
    /// Builds a complete matrix from a dense `datasets × algorithms` grid.
    pub fn from_dense(algorithms: Vec<String>, datasets: Vec<String>, grid: Vec<Vec<f64>>) -> Self {
        let values = grid
            .into_iter()
            .map(|row| row.into_iter().map(Some).collect())
            .collect();
        AggregatedMatrix {
            algorithms,
            datasets,
            values,
        }
    }

    pub fn n_algorithms(&self) -> usize {
        self.algorithms.len()
    }

    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn get(&self, dataset: usize, algorithm: usize) -> Option<f64> {
        self.values[dataset][algorithm]
    }

    pub fn is_present(&self, dataset: usize, algorithm: usize) -> bool {
        self.values[dataset][algorithm].is_some()
    }

    pub fn algorithm_index(&self, name: &str) -> Option<usize> {
        self.algorithms.iter().position(|a| a == name)
    }

    /// Present cells as `(dataset, algorithm, value)`.
    pub fn present_cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values.iter().enumerate().flat_map(|(d, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(a, v)| v.map(|v| (d, a, v)))
        })
    }

    pub fn missing_cells(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (d, row) in self.values.iter().enumerate() {
            for (a, v) in row.iter().enumerate() {
                if v.is_none() {
                    out.push((self.datasets[d].clone(), self.algorithms[a].clone()));
                }
            }
        }
        out
    }

    /// Applies `f` to every present cell.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> AggregatedMatrix {
        AggregatedMatrix {
            algorithms: self.algorithms.clone(),
            datasets: self.datasets.clone(),
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|v| v.map(&f)).collect())
                .collect(),
        }
    }
}

/// Averages the two per-subset test errors of every (dataset, algorithm)
/// pair. Algorithms and datasets are sorted by identifier, so the result does
/// not depend on record order.
pub fn aggregate_errors(table: &ErrorTable) -> AggregatedMatrix {
    let algorithms: BTreeSet<&str> = table.records.iter().map(|r| r.algorithm.as_str()).collect();
    let datasets: BTreeSet<&str> = table.records.iter().map(|r| r.dataset.as_str()).collect();
    let algorithms: Vec<String> = algorithms.into_iter().map(String::from).collect();
    let datasets: Vec<String> = datasets.into_iter().map(String::from).collect();
    let a_index: BTreeMap<&str, usize> = algorithms
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    let d_index: BTreeMap<&str, usize> = datasets
        .iter()
        .enumerate()
        .map(|(i, d)| (d.as_str(), i))
        .collect();

    let mut values = vec![vec![None; algorithms.len()]; datasets.len()];
    for ((d, a), pair) in table.by_pair() {
        if let [Some(first), Some(second)] = pair {
            values[d_index[d]][a_index[a]] = Some((first.test_error + second.test_error) / 2.0);
        }
    }
    AggregatedMatrix {
        algorithms,
        datasets,
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    RequireComplete,
    AllowMissing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n_datasets: usize,
    pub n_algorithms: usize,
    /// Missing datasets per algorithm (only algorithms with gaps are listed).
    pub missing_by_algorithm: BTreeMap<String, Vec<String>>,
    /// Missing algorithms per dataset (only datasets with gaps are listed).
    pub missing_by_dataset: BTreeMap<String, Vec<String>>,
    pub n_missing: usize,
}

impl ValidationReport {
    pub fn is_complete(&self) -> bool {
        self.n_missing == 0
    }
}

pub fn validate_matrix(m: &AggregatedMatrix, policy: MissingPolicy) -> Result<ValidationReport> {
    let missing = m.missing_cells();
    if policy == MissingPolicy::RequireComplete && !missing.is_empty() {
        return Err(Error::IncompleteMatrix { cells: missing });
    }
    let mut by_algorithm: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut by_dataset: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (d, a) in &missing {
        by_algorithm.entry(a.clone()).or_default().push(d.clone());
        by_dataset.entry(d.clone()).or_default().push(a.clone());
    }
    Ok(ValidationReport {
        n_datasets: m.n_datasets(),
        n_algorithms: m.n_algorithms(),
        missing_by_algorithm: by_algorithm,
        missing_by_dataset: by_dataset,
        n_missing: missing.len(),
    })
}
