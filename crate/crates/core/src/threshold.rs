//! Empirical threshold below which a change in error rate is treated as
//! practically irrelevant.
//!
//! Two noise measures are taken over each dataset's top-3 algorithms: the gap
//! between the test errors of the two training halves, and the gap between a
//! half's test error and its inner cross-validation estimate. The threshold
//! is the smaller of their medians.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::data::{aggregate_errors, AggregatedMatrix, ErrorTable};
use crate::stats::median;
use crate::{Error, Result};

/// Per-dataset set of selected algorithms.
pub type TopMap = BTreeMap<String, BTreeSet<String>>;

/// The algorithms with the `k` smallest aggregated errors on each dataset.
/// Every algorithm tied with the k-th smallest value is included, so a set
/// may hold more than `k` entries.
pub fn top_k_algorithms(m: &AggregatedMatrix, k: usize) -> Result<TopMap> {
    if k == 0 {
        return Err(Error::invalid("top-k needs k >= 1"));
    }
    let mut out = TopMap::new();
    for (d, row) in m.values.iter().enumerate() {
        let mut present: Vec<f64> = row.iter().flatten().copied().collect();
        if present.is_empty() {
            continue;
        }
        present.sort_by(f64::total_cmp);
        let boundary = present[k.min(present.len()) - 1];
        let chosen = row
            .iter()
            .enumerate()
            .filter(|(_, v)| matches!(v, Some(v) if *v <= boundary))
            .map(|(a, _)| m.algorithms[a].clone())
            .collect();
        out.insert(m.datasets[d].clone(), chosen);
    }
    Ok(out)
}

fn selected(top: &TopMap, dataset: &str, algorithm: &str) -> bool {
    top.get(dataset).is_some_and(|s| s.contains(algorithm))
}

/// `|test_error@2 - test_error@1|` for every selected (dataset, algorithm)
/// pair. Pairs lacking a half are skipped; the second element lists them.
pub fn resample_deltas(t: &ErrorTable, top: &TopMap) -> (Vec<f64>, Vec<String>) {
    let mut deltas = Vec::new();
    let mut skipped = Vec::new();
    for ((d, a), pair) in t.by_pair() {
        if !selected(top, d, a) {
            continue;
        }
        match pair {
            [Some(first), Some(second)] => {
                deltas.push((second.test_error - first.test_error).abs())
            }
            _ => {
                log::warn!("({d}, {a}): missing a subset record; skipped");
                skipped.push(format!("{d}/{a}"));
            }
        }
    }
    (deltas, skipped)
}

/// `|test_error - cv_error|` for every record of a selected pair; each
/// training half contributes its own value. Records without a CV estimate
/// are skipped and listed.
pub fn cv_deltas(t: &ErrorTable, top: &TopMap) -> (Vec<f64>, Vec<String>) {
    let mut deltas = Vec::new();
    let mut skipped = Vec::new();
    for ((d, a), pair) in t.by_pair() {
        if !selected(top, d, a) {
            continue;
        }
        for r in pair.iter().flatten() {
            match r.cv_error {
                Some(cv) => deltas.push((r.test_error - cv).abs()),
                None => skipped.push(format!("{d}/{a}/{}", r.subset)),
            }
        }
    }
    if !skipped.is_empty() {
        log::warn!("{} record(s) without cv_error skipped", skipped.len());
    }
    (deltas, skipped)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub median_delta_resample: f64,
    /// Absent when the table carries no CV estimates for the selected pairs.
    pub median_delta_cv: Option<f64>,
    pub threshold: f64,
    pub n_pairs_used: usize,
    pub n_cv_used: usize,
    pub skipped_pairs: Vec<String>,
    pub skipped_cv: Vec<String>,
}

/// Number of leading algorithms per dataset that enter the threshold.
pub const TOP_K: usize = 3;

pub fn irrelevance_threshold(t: &ErrorTable) -> Result<ThresholdReport> {
    let m = aggregate_errors(t);
    let top = top_k_algorithms(&m, TOP_K)?;
    let (resample, skipped_pairs) = resample_deltas(t, &top);
    let (cv, skipped_cv) = cv_deltas(t, &top);
    let median_delta_resample = median(&resample)
        .ok_or_else(|| Error::invalid("no (dataset, algorithm) pair has both subsets"))?;
    let median_delta_cv = median(&cv);
    let threshold = match median_delta_cv {
        Some(c) => median_delta_resample.min(c),
        None => median_delta_resample,
    };
    Ok(ThresholdReport {
        median_delta_resample,
        median_delta_cv,
        threshold,
        n_pairs_used: resample.len(),
        n_cv_used: cv.len(),
        skipped_pairs,
        skipped_cv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth::{generate_synthetic, DatasetEffects, SynthSpec};
    use crate::data::{ErrorRecord, Subset};
    use proptest::prelude::*;

    fn one_dataset(values: &[f64]) -> AggregatedMatrix {
        AggregatedMatrix::from_dense(
            (0..values.len()).map(|i| format!("a{i}")).collect(),
            vec!["d".into()],
            vec![values.to_vec()],
        )
    }

    fn names(top: &TopMap) -> Vec<String> {
        top["d"].iter().cloned().collect()
    }

    #[test]
    fn top_three_plain() {
        let top = top_k_algorithms(&one_dataset(&[0.1, 0.2, 0.3, 0.4]), 3).unwrap();
        assert_eq!(names(&top), ["a0", "a1", "a2"]);
    }

    #[test]
    fn top_three_boundary_tie() {
        let top = top_k_algorithms(&one_dataset(&[0.1, 0.2, 0.2, 0.2]), 3).unwrap();
        assert_eq!(names(&top).len(), 4);
    }

    #[test]
    fn top_one_singleton() {
        let top = top_k_algorithms(&one_dataset(&[0.3, 0.1, 0.2]), 1).unwrap();
        assert_eq!(names(&top), ["a1"]);
        assert!(top_k_algorithms(&one_dataset(&[0.3]), 0).is_err());
    }

    fn rec(a: &str, s: Subset, e: f64, cv: Option<f64>) -> ErrorRecord {
        ErrorRecord {
            dataset: "d".into(),
            algorithm: a.into(),
            subset: s,
            test_error: e,
            cv_error: cv,
        }
    }

    #[test]
    fn deltas_simple() {
        let t = ErrorTable::new(vec![
            rec("x", Subset::First, 0.10, Some(0.10)),
            rec("x", Subset::Second, 0.13, Some(0.11)),
            rec("y", Subset::First, 0.2, Some(0.2)),
            rec("y", Subset::Second, 0.2, None),
        ])
        .unwrap();
        let top = top_k_algorithms(&aggregate_errors(&t), 3).unwrap();
        let (r, _) = resample_deltas(&t, &top);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 0.03).abs() < 1e-12);
        assert_eq!(r[1], 0.0);
        let (c, skipped) = cv_deltas(&t, &top);
        assert_eq!(c.len(), 3);
        assert!((c[1] - 0.02).abs() < 1e-12);
        assert_eq!(skipped, ["d/y/2"]);
    }

    #[test]
    fn missing_half_skipped() {
        let t = ErrorTable::new(vec![
            rec("x", Subset::First, 0.10, None),
            rec("y", Subset::First, 0.2, None),
            rec("y", Subset::Second, 0.25, None),
        ])
        .unwrap();
        let mut top = TopMap::new();
        top.insert("d".into(), ["x".to_string(), "y".to_string()].into());
        let (r, skipped) = resample_deltas(&t, &top);
        assert_eq!(r.len(), 1);
        assert_eq!(skipped, ["d/x"]);
        let rep = irrelevance_threshold(&t).unwrap();
        assert_eq!(rep.median_delta_cv, None);
        assert_eq!(rep.threshold, rep.median_delta_resample);
    }

    #[test]
    fn zero_noise_threshold_is_zero() {
        let spec = SynthSpec::new(
            0.2,
            vec![0.0, 0.02, 0.04, 0.1],
            20,
            DatasetEffects::Random { sd: 0.05 },
            0.0,
            0.0,
        );
        let rep = irrelevance_threshold(&generate_synthetic(&spec, 3).unwrap()).unwrap();
        assert_eq!(rep.threshold, 0.0);
        assert_eq!(rep.median_delta_cv, Some(0.0));
        assert_eq!(rep.n_pairs_used, 60);
        assert_eq!(rep.n_cv_used, 120);
    }

    // The difference of two N(0, s) draws is N(0, s√2); the median of its
    // absolute value is s√2 · Φ⁻¹(0.75) = 0.953873 s. The sample median of
    // 300 pairs has asymptotic sd 1/(2 f(m) √300) ≈ 0.064 s, with f(m) the
    // half-normal density at its median, so 0.25 s is about 4 sd.
    #[test]
    fn resample_median_tracks_noise_scale() {
        let s = 0.02;
        let spec = SynthSpec::new(
            0.3,
            vec![0.0, 0.001, 0.002],
            100,
            DatasetEffects::Random { sd: 0.05 },
            s,
            0.0,
        );
        let rep = irrelevance_threshold(&generate_synthetic(&spec, 11).unwrap()).unwrap();
        let expected = s * std::f64::consts::SQRT_2 * 0.674_489_750_196_081_7;
        assert!(
            (rep.median_delta_resample - expected).abs() < 0.25 * s,
            "{} vs {expected}",
            rep.median_delta_resample
        );
    }

    proptest! {
        #[test]
        fn subset_relabeling_and_min(values in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 1..6)) {
            let mut recs = Vec::new();
            let mut swapped = Vec::new();
            for (i, (e1, e2, c1, c2)) in values.iter().enumerate() {
                let a = format!("a{i}");
                recs.push(rec(&a, Subset::First, *e1, Some(*c1)));
                recs.push(rec(&a, Subset::Second, *e2, Some(*c2)));
                swapped.push(rec(&a, Subset::Second, *e1, Some(*c1)));
                swapped.push(rec(&a, Subset::First, *e2, Some(*c2)));
            }
            let a = irrelevance_threshold(&ErrorTable::new(recs.clone()).unwrap()).unwrap();
            let b = irrelevance_threshold(&ErrorTable::new(swapped).unwrap()).unwrap();
            prop_assert_eq!(a.median_delta_resample, b.median_delta_resample);
            prop_assert_eq!(a.median_delta_cv, b.median_delta_cv);
            prop_assert!(a.threshold <= a.median_delta_resample);
            prop_assert!(a.threshold <= a.median_delta_cv.unwrap());

            let t = ErrorTable::new(recs).unwrap();
            let m = aggregate_errors(&t);
            let all = top_k_algorithms(&m, m.n_algorithms()).unwrap();
            let top3 = top_k_algorithms(&m, 3).unwrap();
            prop_assert!(resample_deltas(&t, &top3).0.len() <= resample_deltas(&t, &all).0.len());
        }
    }
}
