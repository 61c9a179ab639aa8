use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use benchcmp::banova::{self, build_model, run_chains, McmcConfig, PosteriorDraws, Variant};
use benchcmp::data::{
    aggregate_errors, generate_synthetic, ingest_error_table, ingest_timing_table,
    write_error_table, AggregatedMatrix, ErrorTable, SynthSpec, TimingMetric,
};
use benchcmp::diagnostics::{convergence_report, posterior_predictive_check, PsrfOptions};
use benchcmp::nhst::{critical_difference, friedman_test, nemenyi_pairwise};
use benchcmp::rank::{average_ranks, dense_ranks, mean_rank_summary, rank_histogram, RankMatrix};
use benchcmp::threshold::irrelevance_threshold;
use benchcmp::PairwiseMatrix;
use log::{info, warn};

use crate::args::{
    BayesArgs, McmcArgs, MetricArg, NhstArgs, PpcArgs, RankArgs, SchemeArg, SynthArgs, TimingArgs,
    VariantArg,
};
use crate::render::{Cell, Report, Value};
use crate::CliError;

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_errors(path: &Path) -> Result<ErrorTable, CliError> {
    ingest_error_table(open(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))
}

fn ranks(m: &AggregatedMatrix, scheme: SchemeArg) -> RankMatrix {
    match scheme {
        SchemeArg::Dense => dense_ranks(m),
        SchemeArg::Average => average_ranks(m),
    }
}

fn scheme_name(scheme: SchemeArg) -> &'static str {
    match scheme {
        SchemeArg::Dense => "dense",
        SchemeArg::Average => "average",
    }
}

fn summary_rows(r: &RankMatrix) -> Vec<Vec<Cell>> {
    mean_rank_summary(r)
        .into_iter()
        .map(|row| {
            vec![
                row.algorithm.into(),
                row.mean_rank.into(),
                row.top_count.into(),
            ]
        })
        .collect()
}

/// Square matrix section; cells below `bold_below` are flagged.
fn matrix_section(report: &mut Report, name: &str, m: &PairwiseMatrix, bold_below: Option<f64>) {
    let mut headers = vec!["algorithm".to_string()];
    headers.extend(m.algorithms.iter().cloned());
    let rows = m
        .algorithms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut row: Vec<Cell> = vec![a.clone().into()];
            row.extend((0..m.algorithms.len()).map(|j| {
                let v = m.get(i, j);
                Cell {
                    bold: matches!((v, bold_below), (Some(p), Some(t)) if p < t),
                    value: Value::from(v),
                }
            }));
            row
        })
        .collect();
    report.table_owned(name, headers, rows);
}

pub fn rank(args: &RankArgs) -> Result<Report, CliError> {
    let m = aggregate_errors(&load_errors(&args.input)?);
    let r = ranks(&m, args.scheme);
    if !r.skipped.is_empty() {
        warn!(
            "datasets with fewer than two algorithms were not ranked: {}",
            r.skipped.join(", ")
        );
    }
    if args.histogram_csv.is_some() || args.histogram_svg.is_some() {
        let h = rank_histogram(&dense_ranks(&m))?;
        if let Some(p) = &args.histogram_csv {
            write_file(p, &h.to_csv())?;
        }
        if let Some(p) = &args.histogram_svg {
            write_file(p, &h.to_svg())?;
        }
    }
    let mut report = Report::default();
    report.notes(
        "info",
        vec![format!(
            "ranks={} datasets={} algorithms={}",
            scheme_name(args.scheme),
            r.n_datasets(),
            r.n_algorithms()
        )],
    );
    report.table(
        "mean_ranks",
        &["algorithm", "mean_rank", "top_count"],
        summary_rows(&r),
    );
    Ok(report)
}

/// Friedman and Nemenyi on a rank matrix, dropping incomplete subjects
/// first. With `gate`, Nemenyi only runs when Friedman rejects at `alpha`.
fn nhst_sections(
    report: &mut Report,
    r: RankMatrix,
    alpha: f64,
    gate: bool,
) -> Result<(), CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::input(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let (r, dropped) = r.complete_cases();
    let mut notes = Vec::new();
    if !dropped.is_empty() {
        warn!(
            "{} subject(s) with missing cells dropped: {}",
            dropped.len(),
            dropped.join(", ")
        );
        notes.push(format!(
            "dropped {} incomplete subject(s): {}",
            dropped.len(),
            dropped.join(" ")
        ));
    }
    let f = friedman_test(&r)?;
    report.table(
        "friedman",
        &["statistic", "dof", "p_value", "n_subjects", "k_algorithms"],
        vec![vec![
            f.statistic.into(),
            f.dof.into(),
            f.p_value.into(),
            f.n_subjects.into(),
            f.k_treatments.into(),
        ]],
    );
    report.table(
        "mean_ranks",
        &["algorithm", "mean_rank", "top_count"],
        summary_rows(&r),
    );
    if gate && f.p_value >= alpha {
        notes.push(format!(
            "Friedman p = {} is not below alpha = {alpha}; Nemenyi post-hoc skipped",
            crate::render::format_sig(f.p_value, 6)
        ));
    } else {
        let cd = critical_difference(alpha, r.n_algorithms(), r.n_datasets())?;
        notes.push(format!(
            "Nemenyi critical difference at alpha = {alpha}: {}",
            crate::render::format_sig(cd, 6)
        ));
        let nem = nemenyi_pairwise(&r)?;
        matrix_section(report, "nemenyi", &nem, Some(alpha));
        let mut sig = Vec::new();
        for i in 0..nem.algorithms.len() {
            for j in (i + 1)..nem.algorithms.len() {
                if let Some(p) = nem.get(i, j) {
                    sig.push(vec![
                        nem.algorithms[i].clone().into(),
                        nem.algorithms[j].clone().into(),
                        p.into(),
                        (if p < alpha { "yes" } else { "no" }).into(),
                    ]);
                }
            }
        }
        report.table(
            "nemenyi_pairs",
            &["algorithm_i", "algorithm_j", "p_value", "significant"],
            sig,
        );
    }
    report.notes("notes", notes);
    Ok(())
}

pub fn nhst(args: &NhstArgs) -> Result<Report, CliError> {
    let m = aggregate_errors(&load_errors(&args.input)?);
    let mut report = Report::default();
    report.notes(
        "info",
        vec![format!(
            "ranks={} alpha={}",
            scheme_name(args.ranks),
            args.alpha
        )],
    );
    nhst_sections(&mut report, ranks(&m, args.ranks), args.alpha, true)?;
    Ok(report)
}

pub fn threshold(input: &Path) -> Result<Report, CliError> {
    let t = irrelevance_threshold(&load_errors(input)?)?;
    let mut report = Report::default();
    report.table(
        "threshold",
        &["median_delta_resample", "median_delta_cv", "threshold"],
        vec![vec![
            t.median_delta_resample.into(),
            t.median_delta_cv.into(),
            t.threshold.into(),
        ]],
    );
    let mut notes = vec![format!(
        "pairs used: {} resample, {} cv",
        t.n_pairs_used, t.n_cv_used
    )];
    if t.median_delta_cv.is_none() {
        notes.push("no cv_error values: threshold is the resample median alone".into());
    }
    if !t.skipped_pairs.is_empty() {
        notes.push(format!(
            "pairs lacking a subset: {}",
            t.skipped_pairs.join(" ")
        ));
    }
    report.notes("notes", notes);
    Ok(report)
}

fn parse_config_file(path: &Path, cfg: &mut McmcConfig) -> Result<(), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| CliError::input(format!("{}:{}: {msg}", path.display(), i + 1));
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key = value, got '{line}'")))?;
        let (k, v) = (k.trim(), v.trim());
        let n = || {
            v.parse::<usize>()
                .map_err(|_| bad(format!("'{v}' is not a count")))
        };
        match k {
            "preset" => {
                *cfg = match v {
                    "desk" => McmcConfig::desk(),
                    "paper" => McmcConfig::paper(),
                    _ => return Err(bad(format!("unknown preset '{v}'"))),
                }
            }
            "chains" => cfg.chains = n()?,
            "adaptation" => cfg.adaptation = n()?,
            "burn_in" => cfg.burn_in = n()?,
            "kept" => cfg.kept = n()?,
            "thinning" => cfg.thinning = n()?,
            _ => return Err(bad(format!("unknown key '{k}'"))),
        }
    }
    Ok(())
}

pub fn mcmc_config(args: &McmcArgs) -> Result<McmcConfig, CliError> {
    let mut cfg = if args.paper_config {
        McmcConfig::paper()
    } else {
        McmcConfig::desk()
    };
    if let Some(p) = &args.config {
        parse_config_file(p, &mut cfg)?;
    }
    cfg.chains = args.chains.unwrap_or(cfg.chains);
    cfg.adaptation = args.adaptation.unwrap_or(cfg.adaptation);
    cfg.burn_in = args.burn_in.unwrap_or(cfg.burn_in);
    cfg.kept = args.kept.unwrap_or(cfg.kept);
    cfg.thinning = args.thinning.unwrap_or(cfg.thinning);
    cfg.validate().map_err(|e| CliError::input(e.to_string()))?;
    Ok(cfg)
}

fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        info!("no --seed given, using {s}");
        s
    })
}

fn load_draws(path: &Path) -> Result<PosteriorDraws, CliError> {
    PosteriorDraws::read_from(open(path)?)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn bayes(args: &BayesArgs) -> Result<Report, CliError> {
    let table = args.input.as_deref().map(load_errors).transpose()?;
    let variant = match args.variant {
        VariantArg::Normal => Variant::Normal,
        VariantArg::Robust => Variant::Robust,
    };

    let mut info = Vec::new();
    let draws = match &args.load {
        Some(path) => {
            let d = load_draws(path)?;
            if d.variant != variant {
                warn!(
                    "draws file holds the {} model; --variant ignored",
                    d.variant.as_str()
                );
            }
            info.push(format!("draws loaded from {}", path.display()));
            d
        }
        None => {
            let table = table.as_ref().ok_or_else(|| {
                CliError::input("an input table is required unless --load is given")
            })?;
            let m = aggregate_errors(table);
            let spec = build_model(&m, variant)?;
            let cfg = mcmc_config(&args.mcmc)?;
            let seed = seed_or_entropy(args.seed);
            let d = run_chains(&spec, &m, &cfg, seed)?;
            if let Some(p) = &args.save {
                let f = File::create(p)
                    .map_err(|e| CliError::internal(format!("{}: {e}", p.display())))?;
                d.write_to(BufWriter::new(f))?;
            }
            d
        }
    };

    let rope = match (args.rope, &table) {
        (Some(h), _) => h,
        (None, Some(t)) => irrelevance_threshold(t)?.threshold,
        (None, None) => {
            return Err(CliError::input(
                "--rope is required when no input table is given",
            ))
        }
    };
    let c = &draws.meta.config;
    info.push(format!(
        "variant={} seed={} chains={} adaptation={} burn_in={} kept={} thinning={} rope_half_width={}",
        draws.variant.as_str(),
        draws.meta.seed,
        c.chains,
        c.adaptation,
        c.burn_in,
        c.kept,
        c.thinning,
        crate::render::format_sig(rope, 6)
    ));

    let mut report = Report::default();
    report.notes("info", info);
    let probs = banova::rope_probability_matrix(&draws, rope)?;
    matrix_section(&mut report, "rope_probability", &probs, None);

    let opts = PsrfOptions {
        corrected: args.psrf_corrected,
        split: args.psrf_split,
    };
    let diag = convergence_report(&draws, opts)?;
    let worst = diag.iter().filter_map(|d| d.rhat).fold(f64::NAN, f64::max);
    report.table(
        "diagnostics",
        &["parameter", "psrf", "psrf_upper_ci", "ess"],
        diag.into_iter()
            .map(|d| {
                vec![
                    d.name.into(),
                    d.rhat.into(),
                    Value::Missing.into(),
                    d.ess.into(),
                ]
            })
            .collect(),
    );
    let mut footer = vec!["multivariate PSRF not computed".to_string()];
    if worst > 1.1 {
        warn!("largest PSRF is {worst:.3}; chains may not have converged");
        footer.push(format!(
            "largest PSRF {} exceeds 1.1",
            crate::render::format_sig(worst, 6)
        ));
    }
    report.notes("notes", footer);
    Ok(report)
}

pub fn ppc(args: &PpcArgs) -> Result<Report, CliError> {
    let draws = load_draws(&args.draws)?;
    let m = aggregate_errors(&load_errors(&args.input)?);
    let n = args.n_draws.min(draws.total_draws());
    let seed = seed_or_entropy(args.seed);
    let r = posterior_predictive_check(&draws, &m, n, seed)
        .map_err(|e| CliError::input(e.to_string()))?;
    if let Some(p) = &args.scatter {
        let mut csv = String::from("t_real,t_rep\n");
        for (a, b) in &r.discrepancies {
            csv.push_str(&format!("{a},{b}\n"));
        }
        write_file(p, &csv)?;
    }
    let mut report = Report::default();
    report.notes("info", vec![format!("seed={seed} n_draws={n}")]);
    report.table(
        "ppc",
        &["p_value", "negative_replicate_fraction", "n_draws"],
        vec![vec![r.p_value.into(), r.negative_fraction.into(), n.into()]],
    );
    Ok(report)
}

pub fn timing(args: &TimingArgs) -> Result<Report, CliError> {
    let t = ingest_timing_table(open(&args.input)?)
        .map_err(|e| CliError::input(format!("{}: {e}", args.input.display())))?;
    let metric = match args.metric {
        MetricArg::OneTrainTest => TimingMetric::OneTrainTest,
        MetricArg::PerHyper => TimingMetric::PerHyper,
    };
    let m = t.subject_matrix(metric);
    let mut report = Report::default();
    report.notes(
        "info",
        vec![format!(
            "metric={} ranks={} subjects=dataset/subset (lower time ranks first)",
            match args.metric {
                MetricArg::OneTrainTest => "one_train_test",
                MetricArg::PerHyper => "per_hyper",
            },
            scheme_name(args.ranks)
        )],
    );
    nhst_sections(&mut report, ranks(&m, args.ranks), args.alpha, false)?;
    Ok(report)
}

/// Returns the CSV text (with the spec echoed as `#` comments).
pub fn synth(args: &SynthArgs) -> Result<String, CliError> {
    let text = fs::read_to_string(&args.spec)
        .map_err(|e| CliError::input(format!("{}: {e}", args.spec.display())))?;
    let spec = SynthSpec::parse(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", args.spec.display())))?;
    let seed = seed_or_entropy(args.seed);
    let table = generate_synthetic(&spec, seed)?;
    let mut comments = vec![format!("seed = {seed}")];
    comments.extend(spec.to_lines());
    let mut out = Vec::new();
    write_error_table(&table, &comments, &mut out)?;
    Ok(String::from_utf8(out).expect("CSV output is UTF-8"))
}
