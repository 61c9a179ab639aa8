//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Criterion 10 needs the published per-dataset results: set
//! `BENCHCMP_PAPER_DATA` to a directory holding `errors.csv` (and optionally
//! `timing.csv`) in the formats read by `benchcmp`.

use std::fs::File;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use benchcmp::banova::{
    build_model, gamma_shape_rate_from_mode_sd, rope_probability_matrix, run_chains, FixedParams,
    McmcConfig, PosteriorDraws, Variant,
};
use benchcmp::data::synth::{DatasetEffects, SynthSpec};
use benchcmp::data::{
    aggregate_errors, generate_synthetic, ingest_error_table, ingest_timing_table,
    AggregatedMatrix, TimingMetric,
};
use benchcmp::diagnostics::{
    convergence_report, mcse_mean, posterior_predictive_check, PsrfOptions,
};
use benchcmp::nhst::{friedman_test, nemenyi_pairwise};
use benchcmp::rank::{average_ranks, dense_ranks, mean_rank_summary, RankMatrix};
use benchcmp::special::{normal_sf, studentized_range_sf};
use benchcmp::threshold::irrelevance_threshold;
use benchcmp::PairwiseMatrix;

type Outcome = Result<(bool, String), String>;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(o: Outcome) -> Verdict {
    match o {
        Ok((true, d)) => Verdict::Pass(d),
        Ok((false, d)) => Verdict::Fail(d),
        Err(e) => Verdict::Fail(format!("error: {e}")),
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

// 1 -------------------------------------------------------------------------

fn friedman_closed_case() -> Outcome {
    let m = AggregatedMatrix::from_dense(
        vec!["a".into(), "b".into(), "c".into()],
        vec!["x".into(), "y".into(), "z".into()],
        vec![
            vec![0.1, 0.2, 0.3],
            vec![0.15, 0.25, 0.35],
            vec![0.05, 0.5, 0.6],
        ],
    );
    let r = average_ranks(&m);
    let t = Instant::now();
    let f = friedman_test(&r).map_err(err)?;
    let el = t.elapsed();
    let ok = (f.statistic - 6.0).abs() < 5e-7
        && (f.p_value - (-3f64).exp()).abs() < 1e-9
        && el < Duration::from_millis(1);
    Ok((
        ok,
        format!(
            "chi2={:.6} p={:.12} ({}us)",
            f.statistic,
            f.p_value,
            el.as_micros()
        ),
    ))
}

// 2 -------------------------------------------------------------------------

/// Counts of `max - min > q` over `n` ranges of `k` standard normals.
fn mc_range_counts(k: usize, n: usize, qs: &[f64], seed: u64) -> Vec<u64> {
    const CHUNKS: u64 = 100;
    let per = n as u64 / CHUNKS;
    (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut counts = vec![0u64; qs.len()];
            for _ in 0..per {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for _ in 0..k {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    lo = lo.min(z);
                    hi = hi.max(z);
                }
                for (cnt, q) in counts.iter_mut().zip(qs) {
                    *cnt += u64::from(hi - lo > *q);
                }
            }
            counts
        })
        .reduce(
            || vec![0; qs.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        )
}

fn studentized_range() -> Outcome {
    let t = Instant::now();
    let mut worst_identity: f64 = 0.0;
    for i in 1..=16 {
        let q = 0.5 * f64::from(i);
        let exact = 2.0 * normal_sf(q / 2f64.sqrt());
        worst_identity =
            worst_identity.max((studentized_range_sf(q, 2).map_err(err)? - exact).abs());
    }
    let n = 10_000_000;
    let qs = [1.0, 2.0, 3.0, 4.0];
    let mut worst_z: f64 = 0.0;
    for (i, k) in [3usize, 5, 14].into_iter().enumerate() {
        let counts = mc_range_counts(k, n, &qs, 1000 + i as u64);
        for (q, c) in qs.iter().zip(counts) {
            let p = studentized_range_sf(*q, k as u32).map_err(err)?;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let z = (c as f64 / n as f64 - p).abs() / se;
            worst_z = worst_z.max(z);
        }
    }
    let el = t.elapsed();
    let ok = worst_identity < 1e-6 && worst_z < 3.0 && el < Duration::from_secs(5);
    Ok((
        ok,
        format!(
            "k=2 max err {worst_identity:.2e}, MC max |z| {worst_z:.2} ({})",
            secs(el)
        ),
    ))
}

// 3 -------------------------------------------------------------------------

fn gamma_mapping() -> Outcome {
    // 100 log-spaced points per axis over six decades. Far below mode/sd ~ 1e-7
    // the mode is only recoverable to about 1e-16 / (mode/sd) because
    // shape = 1 + mode·rate rounds towards 1.
    let grid: Vec<f64> = (0..100)
        .map(|i| 10f64.powf(-3.0 + 6.0 * f64::from(i) / 99.0))
        .collect();
    let mut worst: f64 = 0.0;
    for &mode in &grid {
        for &sd in &grid {
            let (shape, rate) = gamma_shape_rate_from_mode_sd(mode, sd).map_err(err)?;
            let m2 = (shape - 1.0) / rate;
            let s2 = shape.sqrt() / rate;
            worst = worst
                .max((m2 / mode - 1.0).abs())
                .max((s2 / sd - 1.0).abs());
        }
    }
    let (_, rate) = gamma_shape_rate_from_mode_sd(1.0, 1.0).map_err(err)?;
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let ok = worst < 1e-9 && (rate - golden).abs() < 1e-9;
    Ok((ok, format!("max rel err {worst:.2e}, rate(1,1)={rate:.12}")))
}

// 4 -------------------------------------------------------------------------

fn sampler_oracle() -> Outcome {
    let t = Instant::now();
    let spec = SynthSpec::new(
        0.25,
        vec![0.0, 0.01, 0.02, 0.03, 0.05],
        20,
        DatasetEffects::Random { sd: 0.05 },
        0.02,
        0.0,
    );
    let m = aggregate_errors(&generate_synthetic(&spec, 404).map_err(err)?);
    let (s0, sa, sd) = (0.015, 0.03, 0.05);
    let model = build_model(&m, Variant::Normal)
        .map_err(err)?
        .with_fixed(FixedParams {
            sigma0: Some(s0),
            sigma_a: Some(sa),
            sigma_d: Some(sd),
            df: None,
        });
    let cfg = McmcConfig {
        chains: 4,
        adaptation: 1000,
        burn_in: 1000,
        kept: 5000,
        thinning: 1,
    };
    let draws = run_chains(&model, &m, &cfg, 7).map_err(err)?;

    // Analytic Gaussian posterior of (beta, alpha, delta) given the scales.
    let (na, nd) = (m.n_algorithms(), m.n_datasets());
    let dim = 1 + na + nd;
    let mut prec = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    let bp = model.beta_prior;
    prec[(0, 0)] += 1.0 / (bp.sd * bp.sd);
    rhs[0] += bp.mean / (bp.sd * bp.sd);
    for a in 0..na {
        prec[(1 + a, 1 + a)] += 1.0 / (sa * sa);
    }
    for d in 0..nd {
        prec[(1 + na + d, 1 + na + d)] += 1.0 / (sd * sd);
    }
    for (d, a, y) in m.present_cells() {
        let idx = [0, 1 + a, 1 + na + d];
        for &i in &idx {
            rhs[i] += y / (s0 * s0);
            for &j in &idx {
                prec[(i, j)] += 1.0 / (s0 * s0);
            }
        }
    }
    let cov = prec.try_inverse().ok_or("singular posterior precision")?;
    let mean = &cov * &rhs;

    let mut worst_mean: f64 = 0.0;
    let mut worst_var: f64 = 0.0;
    for c in 0..dim {
        let chains = draws.parameter_chains(c);
        let pooled: Vec<f64> = chains.iter().flatten().copied().collect();
        let mc_mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        let se_mean = mcse_mean(&chains).map_err(err)?;
        worst_mean = worst_mean.max((mc_mean - mean[c]).abs() / se_mean);
        let sq: Vec<Vec<f64>> = chains
            .iter()
            .map(|ch| ch.iter().map(|x| (x - mc_mean).powi(2)).collect())
            .collect();
        let mc_var = sq.iter().flatten().sum::<f64>() / pooled.len() as f64;
        let se_var = mcse_mean(&sq).map_err(err)?;
        worst_var = worst_var.max((mc_var - cov[(c, c)]).abs() / se_var);
    }
    let el = t.elapsed();
    let ok = worst_mean < 3.0 && worst_var < 3.0 && el < Duration::from_secs(60);
    Ok((
        ok,
        format!(
            "{dim} parameters, max |z| mean {worst_mean:.2}, variance {worst_var:.2} ({})",
            secs(el)
        ),
    ))
}

// 5 and 11 ------------------------------------------------------------------

fn desk_matrix() -> Result<(benchcmp::data::ErrorTable, AggregatedMatrix), String> {
    let alpha: Vec<f64> = (0..14).map(|i| 0.006 * f64::from(i)).collect();
    let spec = SynthSpec::new(
        0.2,
        alpha,
        115,
        DatasetEffects::Random { sd: 0.08 },
        0.02,
        0.01,
    );
    let t = generate_synthetic(&spec, 2024).map_err(err)?;
    let m = aggregate_errors(&t);
    Ok((t, m))
}

struct Pipeline {
    draws: PosteriorDraws,
    elapsed: Duration,
}

fn desk_pipeline() -> Result<Pipeline, String> {
    let t = Instant::now();
    let (table, m) = desk_matrix()?;
    let dense = dense_ranks(&m);
    let _summary = mean_rank_summary(&dense);
    let avg = average_ranks(&m);
    let f = friedman_test(&avg).map_err(err)?;
    if f.p_value < 0.05 {
        nemenyi_pairwise(&avg).map_err(err)?;
    }
    let th = irrelevance_threshold(&table).map_err(err)?;
    let model = build_model(&m, Variant::Normal).map_err(err)?;
    let draws = run_chains(&model, &m, &McmcConfig::desk(), 5).map_err(err)?;
    rope_probability_matrix(&draws, th.threshold).map_err(err)?;
    Ok(Pipeline {
        draws,
        elapsed: t.elapsed(),
    })
}

fn convergence(p: &Pipeline) -> Outcome {
    let rep = convergence_report(&p.draws, PsrfOptions::default()).map_err(err)?;
    let rhats: Vec<f64> = rep
        .iter()
        .map(|r| r.rhat.ok_or(format!("{}: R-hat undefined", r.name)))
        .collect::<Result<_, _>>()?;
    let lo = rhats.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rhats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ok = lo >= 0.99 && hi <= 1.1 && p.elapsed < Duration::from_secs(600);
    Ok((
        ok,
        format!(
            "{} parameters, R-hat in [{lo:.4}, {hi:.4}] ({})",
            rhats.len(),
            secs(p.elapsed)
        ),
    ))
}

fn performance(p: &Pipeline) -> Outcome {
    Ok((
        p.elapsed < Duration::from_secs(15 * 60),
        format!(
            "rank + NHST + threshold + normal Bayes on 14x115 in {} on {} thread(s)",
            secs(p.elapsed),
            rayon::current_num_threads()
        ),
    ))
}

// 6 -------------------------------------------------------------------------

fn rope_discrimination() -> Outcome {
    let t = Instant::now();
    let spec = SynthSpec::new(
        0.2,
        vec![0.0, 0.0, 0.05],
        50,
        DatasetEffects::Random { sd: 0.05 },
        0.01,
        0.0,
    );
    let m = aggregate_errors(&generate_synthetic(&spec, 66).map_err(err)?);
    let model = build_model(&m, Variant::Normal).map_err(err)?;
    let draws = run_chains(&model, &m, &McmcConfig::desk(), 6).map_err(err)?;
    let r = rope_probability_matrix(&draws, 0.0112).map_err(err)?;
    let same = r.get(0, 1).ok_or("missing entry")?;
    let apart = r.get(0, 2).unwrap().max(r.get(1, 2).unwrap());
    let el = t.elapsed();
    let ok = same > 0.9 && apart < 0.05 && el < Duration::from_secs(600);
    Ok((
        ok,
        format!(
            "P(diff 0) = {same:.4}, P(diff 0.05) <= {apart:.4} ({})",
            secs(el)
        ),
    ))
}

// 7 -------------------------------------------------------------------------

fn ppc_calibration() -> Outcome {
    let spec = SynthSpec::new(
        0.25,
        vec![0.0, 0.01, 0.02, 0.03, 0.05],
        40,
        DatasetEffects::Random { sd: 0.05 },
        0.02,
        0.0,
    );
    let base = aggregate_errors(&generate_synthetic(&spec, 77).map_err(err)?);
    let model = build_model(&base, Variant::Normal).map_err(err)?;
    let fit = run_chains(&model, &base, &McmcConfig::desk(), 1).map_err(err)?;

    // Posterior-mean parameters of the fitted model.
    let total = fit.total_draws() as f64;
    let col_mean = |c: usize| fit.parameter_chains(c).iter().flatten().sum::<f64>() / total;
    let beta = col_mean(0);
    let alpha: Vec<f64> = (0..base.n_algorithms())
        .map(|a| col_mean(fit.alpha_column(a)))
        .collect();
    let delta: Vec<f64> = (0..base.n_datasets())
        .map(|d| col_mean(fit.delta_column(d)))
        .collect();
    let sigma0 = col_mean(fit.sigma0_column());

    let mut ps = Vec::new();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let values = delta
            .iter()
            .map(|d| {
                alpha
                    .iter()
                    .map(|a| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        Some(beta + a + d + sigma0 * z)
                    })
                    .collect()
            })
            .collect();
        let sim = AggregatedMatrix {
            algorithms: base.algorithms.clone(),
            datasets: base.datasets.clone(),
            values,
        };
        let model = build_model(&sim, Variant::Normal).map_err(err)?;
        let draws = run_chains(&model, &sim, &McmcConfig::desk(), 10 + seed).map_err(err)?;
        ps.push(
            posterior_predictive_check(&draws, &sim, 4000, 20 + seed)
                .map_err(err)?
                .p_value,
        );
    }
    let avg = ps.iter().sum::<f64>() / ps.len() as f64;
    let listed: Vec<String> = ps.iter().map(|p| format!("{p:.3}")).collect();
    Ok((
        (0.4..=0.6).contains(&avg),
        format!("mean p = {avg:.3} over [{}]", listed.join(", ")),
    ))
}

// 8 -------------------------------------------------------------------------

fn limit_matrix() -> Result<AggregatedMatrix, String> {
    let spec = SynthSpec::new(
        0.2,
        vec![0.0, 0.005, 0.01, 0.02, 0.04],
        30,
        DatasetEffects::Random { sd: 0.05 },
        0.02,
        0.0,
    );
    Ok(aggregate_errors(
        &generate_synthetic(&spec, 88).map_err(err)?,
    ))
}

fn max_abs_diff(a: &PairwiseMatrix, b: &PairwiseMatrix) -> f64 {
    let k = a.algorithms.len();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            worst = worst.max((a.get(i, j).unwrap() - b.get(i, j).unwrap()).abs());
        }
    }
    worst
}

fn robust_normal_limit() -> Outcome {
    let t = Instant::now();
    let m = limit_matrix()?;
    let normal = build_model(&m, Variant::Normal).map_err(err)?;
    let robust = build_model(&m, Variant::Robust)
        .map_err(err)?
        .with_fixed(FixedParams {
            df: Some(1e6),
            ..FixedParams::default()
        });
    let cfg = McmcConfig::paper();
    let dn = run_chains(&normal, &m, &cfg, 8).map_err(err)?;
    let dr = run_chains(&robust, &m, &cfg, 8).map_err(err)?;
    let rn = rope_probability_matrix(&dn, 0.0112).map_err(err)?;
    let rr = rope_probability_matrix(&dr, 0.0112).map_err(err)?;
    let worst = max_abs_diff(&rn, &rr);
    Ok((
        worst < 0.02,
        format!(
            "max |diff| = {worst:.4} over 10 pairs ({})",
            secs(t.elapsed())
        ),
    ))
}

// 9 -------------------------------------------------------------------------

fn rope_indicator_mcse(p: &PosteriorDraws, i: usize, j: usize, h: f64) -> Result<f64, String> {
    let chains: Vec<Vec<f64>> = (0..p.n_chains())
        .map(|c| {
            let (ai, aj) = (
                p.column(c, p.alpha_column(i)),
                p.column(c, p.alpha_column(j)),
            );
            ai.iter()
                .zip(&aj)
                .map(|(x, y)| f64::from(u8::from((x - y).abs() < h)))
                .collect()
        })
        .collect();
    mcse_mean(&chains).map_err(err)
}

fn shift_invariance() -> Outcome {
    let m = limit_matrix()?;
    let shifted = m.map_values(|y| y + 0.1);
    let cfg = McmcConfig::desk();
    let a =
        run_chains(&build_model(&m, Variant::Normal).map_err(err)?, &m, &cfg, 9).map_err(err)?;
    let b = run_chains(
        &build_model(&shifted, Variant::Normal).map_err(err)?,
        &shifted,
        &cfg,
        9,
    )
    .map_err(err)?;
    let h = 0.0112;
    let (ra, rb) = (
        rope_probability_matrix(&a, h).map_err(err)?,
        rope_probability_matrix(&b, h).map_err(err)?,
    );
    let k = m.n_algorithms();
    let mut ok = true;
    let mut worst_ratio: f64 = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            let diff = (ra.get(i, j).unwrap() - rb.get(i, j).unwrap()).abs();
            let se = rope_indicator_mcse(&a, i, j, h)?.max(rope_indicator_mcse(&b, i, j, h)?);
            // An exactly reproduced probability passes even when the indicator
            // is constant and its MC-SE is zero.
            if diff > 0.0 {
                ok &= diff < 3.0 * se;
                worst_ratio = worst_ratio.max(diff / se);
            }
        }
    }
    Ok((
        ok,
        format!(
            "max |diff| = {:.2e}, max |diff|/MC-SE = {worst_ratio:.3}",
            max_abs_diff(&ra, &rb)
        ),
    ))
}

// 10 ------------------------------------------------------------------------

/// Significance pattern (p < 0.05) of the published Nemenyi table, lower
/// triangle, rows from the second algorithm on, columns in this order.
const PUBLISHED_ORDER: [&str; 14] = [
    "rf",
    "svmRadial",
    "gbm",
    "nnet",
    "rknn",
    "svmPoly",
    "knn",
    "svmLinear",
    "glmnet",
    "elm",
    "lvq",
    "sda",
    "nb",
    "bst",
];
const PUBLISHED_SIGNIFICANT: [&str; 13] = [
    "0",
    "00",
    "111",
    "1110",
    "11100",
    "111000",
    "1110000",
    "11100000",
    "111000000",
    "1111011000",
    "11111110000",
    "111111111000",
    "1111111111110",
];

fn pattern_mismatches(nem: &PairwiseMatrix) -> Result<usize, String> {
    let order: Vec<String> = PUBLISHED_ORDER.iter().map(|s| s.to_string()).collect();
    let nem = nem
        .reordered(&order)
        .ok_or("algorithm set differs from the published one")?;
    let mut bad = 0;
    for (r, row) in PUBLISHED_SIGNIFICANT.iter().enumerate() {
        for (c, flag) in row.chars().enumerate() {
            let sig = nem.get(r + 1, c).ok_or("missing p-value")? < 0.05;
            bad += usize::from(sig != (flag == '1'));
        }
    }
    Ok(bad)
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (x * s).round() / s
}

fn paper_data(dir: &Path) -> Outcome {
    let open = |name: &str| File::open(dir.join(name)).map_err(|e| format!("{name}: {e}"));
    let table = ingest_error_table(open("errors.csv")?).map_err(err)?;
    let m = aggregate_errors(&table);
    let mut failures = Vec::new();
    let mut notes = Vec::new();

    let dense = dense_ranks(&m);
    let summary = mean_rank_summary(&dense);
    let first = &summary[0];
    if !(first.algorithm == "rf" && round_to(first.mean_rank, 2) == 3.04 && first.top_count == 36) {
        failures.push(format!(
            "table 1 first row {},{:.4},{}",
            first.algorithm, first.mean_rank, first.top_count
        ));
    }

    let check_pattern = |r: RankMatrix| -> Result<usize, String> {
        let (r, _) = r.complete_cases();
        pattern_mismatches(&nemenyi_pairwise(&r).map_err(err)?)
    };
    let avg_bad = check_pattern(average_ranks(&m))?;
    let dense_bad = check_pattern(dense_ranks(&m))?;
    match (avg_bad, dense_bad) {
        (0, _) => notes.push("table 2 matched with average ranks".to_string()),
        (_, 0) => notes.push("table 2 matched with dense ranks".to_string()),
        (a, d) => failures.push(format!("table 2 mismatched cells: average {a}, dense {d}")),
    }

    let th = irrelevance_threshold(&table).map_err(err)?;
    let cv = th.median_delta_cv.unwrap_or(f64::NAN);
    if round_to(th.median_delta_resample, 4) != 0.0112
        || round_to(cv, 4) != 0.0134
        || round_to(th.threshold, 4) != 0.0112
    {
        failures.push(format!(
            "thresholds {:.5} {:.5} {:.5}",
            th.median_delta_resample, cv, th.threshold
        ));
    }

    let cfg = McmcConfig::paper();
    let normal = run_chains(
        &build_model(&m, Variant::Normal).map_err(err)?,
        &m,
        &cfg,
        2016,
    )
    .map_err(err)?;
    let p3 = rope_probability_matrix(&normal, 0.0112).map_err(err)?;
    let p4 = rope_probability_matrix(&normal, 0.0056).map_err(err)?;
    let (t3, t4) = (
        p3.get_by_name("rf", "svmRadial").unwrap_or(f64::NAN),
        p4.get_by_name("rf", "svmRadial").unwrap_or(f64::NAN),
    );
    if (t3 - 0.83).abs() > 0.05 || (t4 - 0.51).abs() > 0.05 {
        failures.push(format!("P(rf, svmRadial) = {t3:.3} / {t4:.3}"));
    }
    let robust = run_chains(
        &build_model(&m, Variant::Robust).map_err(err)?,
        &m,
        &cfg,
        2016,
    )
    .map_err(err)?;
    let pr = rope_probability_matrix(&robust, 0.0112).map_err(err)?;
    let top = ["rf", "svmRadial", "gbm"];
    let top_min = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| pr.get_by_name(top[i], top[j]).unwrap_or(f64::NAN))
        .fold(f64::INFINITY, f64::min);
    if !(top_min >= 0.98) {
        failures.push(format!("robust top-3 min {top_min:.3}"));
    }
    let dfc = robust.df_column().ok_or("robust draws lack df")?;
    let df_mean =
        robust.parameter_chains(dfc).iter().flatten().sum::<f64>() / robust.total_draws() as f64;
    if (df_mean - 1.12).abs() > 0.1 {
        failures.push(format!("posterior df {df_mean:.3}"));
    }

    match open("timing.csv") {
        Ok(f) => {
            let timing = ingest_timing_table(f).map_err(err)?;
            for (metric, name, value) in [
                (TimingMetric::OneTrainTest, "svmLinear", 2.67),
                (TimingMetric::PerHyper, "knn", 1.72),
            ] {
                let s = mean_rank_summary(
                    &average_ranks(&timing.subject_matrix(metric))
                        .complete_cases()
                        .0,
                );
                if !(s[0].algorithm == name && round_to(s[0].mean_rank, 2) == value) {
                    failures.push(format!(
                        "table 5 leader {} {:.3}",
                        s[0].algorithm, s[0].mean_rank
                    ));
                }
            }
        }
        Err(_) => notes.push("timing.csv absent, table 5 not checked".into()),
    }

    let ok = failures.is_empty();
    let mut detail = notes;
    detail.extend(failures);
    Ok((ok, detail.join("; ")))
}

fn main() -> ExitCode {
    let pipeline = desk_pipeline();
    let mut results: Vec<(u32, &str, Verdict)> = vec![
        (1, "Friedman closed case", verdict(friedman_closed_case())),
        (2, "studentized range", verdict(studentized_range())),
        (3, "gamma mode/sd mapping", verdict(gamma_mapping())),
        (
            4,
            "sampler vs analytic posterior",
            verdict(sampler_oracle()),
        ),
    ];
    let (five, eleven) = match &pipeline {
        Ok(p) => (verdict(convergence(p)), verdict(performance(p))),
        Err(e) => (
            Verdict::Fail(format!("error: {e}")),
            Verdict::Fail(format!("error: {e}")),
        ),
    };
    results.push((5, "convergence at desk scale", five));
    results.push((6, "ROPE discrimination", verdict(rope_discrimination())));
    results.push((7, "PPC calibration", verdict(ppc_calibration())));
    results.push((
        8,
        "robust model at large df",
        verdict(robust_normal_limit()),
    ));
    results.push((9, "shift invariance", verdict(shift_invariance())));
    let ten = match std::env::var_os("BENCHCMP_PAPER_DATA") {
        Some(dir) => verdict(paper_data(Path::new(&dir))),
        None => Verdict::Skip("BENCHCMP_PAPER_DATA not set".into()),
    };
    results.push((10, "published tables", ten));
    results.push((11, "desk pipeline runtime", eleven));

    let mut failed = 0;
    for (id, name, v) in &results {
        let (tag, detail) = match v {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("{tag} criterion {id:>2}: {name}: {detail}");
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
