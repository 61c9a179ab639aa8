//! Per-dataset ranks of algorithms (lower error is better).
//!
//! Two schemes are provided. Dense ranks round errors to three decimal places
//! before comparing, so values closer than 0.0005 tie, and assign 1, 1, 2, ...
//! without gaps. Average ranks compare raw values and give tied algorithms the
//! mean of the positions they span, which is what the Friedman and Nemenyi
//! tests expect.

use std::cmp::Ordering;

use serde::Serialize;

use crate::data::AggregatedMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankScheme {
    Dense,
    Average,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankMatrix {
    pub scheme: RankScheme,
    pub algorithms: Vec<String>,
    /// Datasets that received ranks, in input order.
    pub datasets: Vec<String>,
    /// `ranks[dataset][algorithm]`; `None` where the cell was missing.
    pub ranks: Vec<Vec<Option<f64>>>,
    /// Datasets dropped because fewer than two algorithms were present.
    pub skipped: Vec<String>,
}

/// Nudge added before flooring so that decimal half-way values such as
/// 0.1005, which are stored slightly below the half, still round up.
const HALF_UP_SLACK: f64 = 1e-9;

/// Rounds to three decimal places, half up, returning the integer multiple of
/// 0.001.
pub fn round_key(x: f64) -> i64 {
    (x * 1000.0 + 0.5 + HALF_UP_SLACK).floor() as i64
}

fn present(row: &[Option<f64>]) -> Vec<(usize, f64)> {
    row.iter()
        .enumerate()
        .filter_map(|(a, v)| v.map(|v| (a, v)))
        .collect()
}

fn rank_rows(
    m: &AggregatedMatrix,
    scheme: RankScheme,
    rank_row: impl Fn(&[(usize, f64)]) -> Vec<f64>,
) -> RankMatrix {
    let mut datasets = Vec::new();
    let mut ranks = Vec::new();
    let mut skipped = Vec::new();
    for (d, row) in m.values.iter().enumerate() {
        let cells = present(row);
        if cells.len() < 2 {
            log::warn!(
                "dataset '{}' has {} present algorithm(s); skipped in ranking",
                m.datasets[d],
                cells.len()
            );
            skipped.push(m.datasets[d].clone());
            continue;
        }
        let r = rank_row(&cells);
        let mut out = vec![None; m.n_algorithms()];
        for ((a, _), rank) in cells.iter().zip(r) {
            out[*a] = Some(rank);
        }
        datasets.push(m.datasets[d].clone());
        ranks.push(out);
    }
    RankMatrix {
        scheme,
        algorithms: m.algorithms.clone(),
        datasets,
        ranks,
        skipped,
    }
}

pub fn dense_ranks(m: &AggregatedMatrix) -> RankMatrix {
    rank_rows(m, RankScheme::Dense, |cells| {
        let keys: Vec<i64> = cells.iter().map(|(_, v)| round_key(*v)).collect();
        let mut distinct = keys.clone();
        distinct.sort_unstable();
        distinct.dedup();
        keys.iter()
            .map(|k| (distinct.binary_search(k).unwrap() + 1) as f64)
            .collect()
    })
}

pub fn average_ranks(m: &AggregatedMatrix) -> RankMatrix {
    rank_rows(m, RankScheme::Average, |cells| {
        fractional_ranks(cells.iter().map(|c| c.1))
    })
}

/// Fractional ranks of `values`; exact ties share the mean position.
pub fn fractional_ranks(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let values: Vec<f64> = values.into_iter().collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their mean.
        let r = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

impl RankMatrix {
    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn n_algorithms(&self) -> usize {
        self.algorithms.len()
    }

    /// Keeps only datasets on which every algorithm is ranked. Returns the
    /// reduced matrix and the names of dropped datasets.
    pub fn complete_cases(&self) -> (RankMatrix, Vec<String>) {
        let mut kept = self.clone();
        kept.datasets.clear();
        kept.ranks.clear();
        let mut dropped = Vec::new();
        for (name, row) in self.datasets.iter().zip(&self.ranks) {
            if row.iter().all(Option::is_some) {
                kept.datasets.push(name.clone());
                kept.ranks.push(row.clone());
            } else {
                dropped.push(name.clone());
            }
        }
        if !dropped.is_empty() {
            log::warn!(
                "dropping {} incomplete dataset(s) for complete-case analysis: {}",
                dropped.len(),
                dropped.join(", ")
            );
        }
        (kept, dropped)
    }

    pub fn is_complete(&self) -> bool {
        self.ranks.iter().all(|row| row.iter().all(Option::is_some))
    }

    /// Mean rank of each algorithm over the datasets where it is present.
    pub fn mean_ranks(&self) -> Vec<f64> {
        (0..self.n_algorithms())
            .map(|a| {
                let (sum, n) = self
                    .ranks
                    .iter()
                    .filter_map(|row| row[a])
                    .fold((0.0, 0usize), |(s, n), r| (s + r, n + 1));
                if n == 0 {
                    f64::NAN
                } else {
                    sum / n as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSummaryRow {
    pub algorithm: String,
    pub mean_rank: f64,
    /// Datasets on which the algorithm had rank 1.
    pub top_count: usize,
    /// Datasets on which the algorithm was ranked at all.
    pub n_datasets: usize,
}

/// Mean rank and number of first places per algorithm, sorted by mean rank
/// (ties broken by algorithm identifier).
pub fn mean_rank_summary(r: &RankMatrix) -> Vec<RankSummaryRow> {
    let means = r.mean_ranks();
    let mut rows: Vec<RankSummaryRow> = r
        .algorithms
        .iter()
        .enumerate()
        .map(|(a, name)| RankSummaryRow {
            algorithm: name.clone(),
            mean_rank: means[a],
            top_count: r.ranks.iter().filter(|row| row[a] == Some(1.0)).count(),
            n_datasets: r.ranks.iter().filter(|row| row[a].is_some()).count(),
        })
        .collect();
    rows.sort_by(|x, y| {
        x.mean_rank
            .total_cmp(&y.mean_rank)
            .then_with(|| x.algorithm.cmp(&y.algorithm))
    });
    rows
}

/// `counts[a][r - 1]` is the number of datasets on which algorithm `a` had
/// dense rank `r`. Columns run up to the number of algorithms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankHistogram {
    pub algorithms: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

pub fn rank_histogram(r: &RankMatrix) -> Result<RankHistogram> {
    if r.scheme != RankScheme::Dense {
        return Err(Error::invalid("rank histogram requires dense ranks"));
    }
    let k = r.n_algorithms();
    let mut counts = vec![vec![0usize; k]; k];
    for row in &r.ranks {
        for (a, rank) in row.iter().enumerate() {
            if let Some(rank) = rank {
                counts[a][*rank as usize - 1] += 1;
            }
        }
    }
    Ok(RankHistogram {
        algorithms: r.algorithms.clone(),
        counts,
    })
}

impl RankHistogram {
    /// Long-form CSV `algorithm,rank,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm,rank,count\n");
        for (a, row) in self.counts.iter().enumerate() {
            for (r, c) in row.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", self.algorithms[a], r + 1, c));
            }
        }
        out
    }

    /// Standalone SVG heatmap, one row per algorithm and one column per rank.
    pub fn to_svg(&self) -> String {
        const CELL: usize = 28;
        const LEFT: usize = 110;
        const TOP: usize = 30;
        let k = self.counts.first().map_or(0, Vec::len);
        let width = LEFT + CELL * k + 10;
        let height = TOP + CELL * self.counts.len() + 10;
        let max = self
            .counts
            .iter()
            .flatten()
            .copied()
            .max()
            .unwrap_or(0)
            .max(1);
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"11\">\n"
        );
        for r in 0..k {
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                LEFT + CELL * r + CELL / 2,
                TOP - 8,
                r + 1
            ));
        }
        for (a, row) in self.counts.iter().enumerate() {
            let y = TOP + CELL * a;
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
                LEFT - 6,
                y + CELL / 2 + 4,
                xml_escape(&self.algorithms[a])
            ));
            for (r, &c) in row.iter().enumerate() {
                let shade = 255 - (c * 255 / max) as u8;
                svg.push_str(&format!(
                    "<rect x=\"{}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"rgb({shade},{shade},255)\" stroke=\"#ccc\"/>\n",
                    LEFT + CELL * r
                ));
                if c > 0 {
                    svg.push_str(&format!(
                        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{c}</text>\n",
                        LEFT + CELL * r + CELL / 2,
                        y + CELL / 2 + 4
                    ));
                }
            }
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
