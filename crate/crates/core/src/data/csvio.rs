use std::collections::HashSet;
use std::io::{Read, Write};

use csv::{ReaderBuilder, StringRecord, Trim};

use super::{check_fraction, ErrorRecord, ErrorTable, Subset, TimingRecord, TimingTable};
use crate::{Error, Result};

const ERROR_HEADER: [&str; 5] = ["dataset", "algorithm", "subset", "test_error", "cv_error"];
const TIMING_HEADER: [&str; 6] = [
    "dataset",
    "algorithm",
    "subset",
    "train_test_seconds",
    "hyper_search_seconds",
    "n_hyper_combos",
];

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(Trim::All)
        .flexible(false)
        .from_reader(source)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        message: format!("malformed row: {e}"),
    }
}

fn check_header(found: &StringRecord, expected: &[&str], optional_last: bool) -> Result<()> {
    let names: Vec<&str> = found.iter().collect();
    let ok =
        names == expected || (optional_last && names.as_slice() == &expected[..expected.len() - 1]);
    if !ok {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "unexpected header '{}', expected '{}'",
                names.join(","),
                expected.join(",")
            ),
        });
    }
    Ok(())
}

fn parse_f64(field: &str, name: &str, line: u64) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{name}: cannot parse '{field}' as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("{name}: non-finite value '{field}'"),
        });
    }
    Ok(v)
}

fn parse_subset(field: &str, line: u64) -> Result<Subset> {
    Subset::from_label(field).ok_or_else(|| Error::Parse {
        line,
        message: format!("unknown subset value '{field}'"),
    })
}

fn parse_identifier<'a>(field: &'a str, name: &str, line: u64) -> Result<&'a str> {
    if field.is_empty() {
        return Err(Error::Parse {
            line,
            message: format!("empty {name}"),
        });
    }
    Ok(field)
}

/// Parses the long-form error CSV
/// (`dataset,algorithm,subset,test_error,cv_error`). The `cv_error` column
/// may be empty per row, or absent altogether. Lines starting with `#` are
/// comments.
pub fn ingest_error_table<R: Read>(source: R) -> Result<ErrorTable> {
    let mut rdr = reader(source);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.is_empty() {
        return Err(Error::Empty);
    }
    check_header(&header, &ERROR_HEADER, true)?;

    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let dataset = parse_identifier(&row[0], "dataset", line)?;
        let algorithm = parse_identifier(&row[1], "algorithm", line)?;
        let subset = parse_subset(&row[2], line)?;
        let test_error = parse_f64(&row[3], "test_error", line)?;
        check_fraction(test_error, "test_error", line)?;
        let cv_error = match row.get(4) {
            Some(f) if !f.is_empty() => {
                let v = parse_f64(f, "cv_error", line)?;
                check_fraction(v, "cv_error", line)?;
                Some(v)
            }
            _ => None,
        };
        if !seen.insert((dataset.to_string(), algorithm.to_string(), subset)) {
            return Err(Error::DuplicateKey {
                line,
                dataset: dataset.into(),
                algorithm: algorithm.into(),
                subset: subset.number(),
            });
        }
        records.push(ErrorRecord {
            dataset: dataset.into(),
            algorithm: algorithm.into(),
            subset,
            test_error,
            cv_error,
        });
    }
    if records.is_empty() {
        return Err(Error::Empty);
    }
    Ok(ErrorTable { records })
}

/// Parses the timing CSV
/// (`dataset,algorithm,subset,train_test_seconds,hyper_search_seconds,n_hyper_combos`).
pub fn ingest_timing_table<R: Read>(source: R) -> Result<TimingTable> {
    let mut rdr = reader(source);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.is_empty() {
        return Err(Error::Empty);
    }
    check_header(&header, &TIMING_HEADER, false)?;

    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let dataset = parse_identifier(&row[0], "dataset", line)?;
        let algorithm = parse_identifier(&row[1], "algorithm", line)?;
        let subset = parse_subset(&row[2], line)?;
        let train_test_seconds = parse_f64(&row[3], "train_test_seconds", line)?;
        let hyper_search_seconds = parse_f64(&row[4], "hyper_search_seconds", line)?;
        if train_test_seconds < 0.0 || hyper_search_seconds < 0.0 {
            return Err(Error::Parse {
                line,
                message: "negative time".into(),
            });
        }
        let n_hyper_combos: i64 = row[5].parse().map_err(|_| Error::Parse {
            line,
            message: format!("n_hyper_combos: cannot parse '{}' as an integer", &row[5]),
        })?;
        if n_hyper_combos < 1 || n_hyper_combos > i64::from(u32::MAX) {
            return Err(Error::Parse {
                line,
                message: format!("n_hyper_combos must be at least 1, got {n_hyper_combos}"),
            });
        }
        if !seen.insert((dataset.to_string(), algorithm.to_string(), subset)) {
            return Err(Error::DuplicateKey {
                line,
                dataset: dataset.into(),
                algorithm: algorithm.into(),
                subset: subset.number(),
            });
        }
        records.push(TimingRecord {
            dataset: dataset.into(),
            algorithm: algorithm.into(),
            subset,
            train_test_seconds,
            hyper_search_seconds,
            n_hyper_combos: n_hyper_combos as u32,
        });
    }
    if records.is_empty() {
        return Err(Error::Empty);
    }
    Ok(TimingTable { records })
}

/// Writes an error table in the ingestible CSV format. `comments` are
/// emitted first as `# ` lines. Numbers use the shortest round-trip
/// representation.
pub fn write_error_table<W: Write>(
    table: &ErrorTable,
    comments: &[String],
    mut out: W,
) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{}", ERROR_HEADER.join(","))?;
    for r in &table.records {
        let cv = r.cv_error.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            r.dataset, r.algorithm, r.subset, r.test_error, cv
        )?;
    }
    Ok(())
}
