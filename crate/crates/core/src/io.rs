//! Histogram and joint-table readers.
//!
//! Histograms are either CSV (a `label,count` header followed by one row per
//! component, or a single header-less column of counts) or JSON (an array of
//! counts, or `{"labels": [...], "counts": [...]}`). JSON is recognised by a
//! leading `[` or `{`. Joint tables are CSV grids of counts or probabilities
//! and are always divided by their grand total.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::prob::{CountHistogram, JointTable};

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_owned(),
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

pub fn read_histogram(path: &Path) -> Result<CountHistogram> {
    parse_histogram(&read(path)?, path)
}

/// Parses histogram text; `origin` is used in error messages only.
pub fn parse_histogram(text: &str, origin: &Path) -> Result<CountHistogram> {
    let trimmed = text.trim_start();
    let hist = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        parse_json(trimmed, origin)?
    } else {
        parse_csv(text, origin)?
    };
    hist.map_err(|e| parse_err(origin, e.to_string()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonHistogram {
    Counts(Vec<f64>),
    Labelled { labels: Vec<String>, counts: Vec<f64> },
}

fn parse_json(text: &str, origin: &Path) -> Result<Result<CountHistogram>> {
    let parsed: JsonHistogram = serde_json::from_str(text).map_err(|_| {
        parse_err(
            origin,
            "expected a JSON array of counts or an object with \"labels\" and \"counts\"",
        )
    })?;
    Ok(match parsed {
        JsonHistogram::Counts(counts) => CountHistogram::new(counts),
        JsonHistogram::Labelled { labels, counts } => CountHistogram::with_labels(counts, labels),
    })
}

fn parse_number(field: &str, origin: &Path, line: u64) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_err(origin, format!("line {line}: {:?} is not a number", field.trim())))
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn parse_csv(text: &str, origin: &Path) -> Result<Result<CountHistogram>> {
    let mut rows = Vec::new();
    for record in csv_reader(text).records() {
        let record = record.map_err(|e| parse_err(origin, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, record));
    }
    let Some((_, first)) = rows.first() else {
        return Err(parse_err(origin, "empty histogram file"));
    };
    let header: Vec<&str> = first.iter().collect();
    if header == ["label", "count"] {
        let mut labels = Vec::with_capacity(rows.len() - 1);
        let mut counts = Vec::with_capacity(rows.len() - 1);
        for (line, record) in &rows[1..] {
            if record.len() != 2 {
                return Err(parse_err(
                    origin,
                    format!("line {line}: expected 2 columns (label,count), found {}", record.len()),
                ));
            }
            labels.push(record[0].to_owned());
            counts.push(parse_number(&record[1], origin, *line)?);
        }
        Ok(CountHistogram::with_labels(counts, labels))
    } else if header.len() == 1 {
        let mut counts = Vec::with_capacity(rows.len());
        for (line, record) in &rows {
            if record.len() != 1 {
                return Err(parse_err(
                    origin,
                    format!("line {line}: expected a single column of counts, found {}", record.len()),
                ));
            }
            counts.push(parse_number(&record[0], origin, *line)?);
        }
        Ok(CountHistogram::new(counts))
    } else {
        Err(parse_err(
            origin,
            "CSV histogram needs a `label,count` header or a single column of counts",
        ))
    }
}

pub fn read_joint_table(path: &Path) -> Result<JointTable> {
    parse_joint_table(&read(path)?, path)
}

pub fn parse_joint_table(text: &str, origin: &Path) -> Result<JointTable> {
    let mut grid = Vec::new();
    for record in csv_reader(text).records() {
        let record = record.map_err(|e| parse_err(origin, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|f| parse_number(f, origin, line))
            .collect::<Result<Vec<_>>>()?;
        grid.push(row);
    }
    JointTable::from_counts(grid).map_err(|e| parse_err(origin, e.to_string()))
}

/// Regular files in `dir` with a `.csv` or `.json` extension, sorted by name.
pub fn histogram_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let io_err = |e: std::io::Error| Error::Io {
        path: dir.to_owned(),
        message: e.to_string(),
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        let known = matches!(
            path.extension().and_then(|e| e.to_str()),
            Some("csv" | "json")
        );
        if known && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}
