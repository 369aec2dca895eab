//! Dense CSV and sparse index-list readers and writers.
//!
//! Dense CSV: a header `label,<name>,...` followed by one row per sample with
//! values in {0,1}.
//!
//! Sparse list: a header line `#k=<dim>`, then one line per sample of the form
//! `<label> <idx>:1 <idx>:1 ...` with 0-based, strictly increasing indices.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{Error, Label, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    DenseCsv,
    SparseList,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense-csv" | "dense" | "csv" => Ok(DataFormat::DenseCsv),
            "sparse-list" | "sparse" => Ok(DataFormat::SparseList),
            other => Err(Error::config(format!("unknown data format `{other}`"))),
        }
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataFormat::DenseCsv => "dense-csv",
            DataFormat::SparseList => "sparse-list",
        })
    }
}

pub fn load_dataset(path: impl AsRef<Path>, format: DataFormat) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    read_dataset(BufReader::new(file), format)
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>, format: DataFormat) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = BufWriter::new(file);
    write_dataset(ds, &mut out, format)?;
    out.flush()?;
    Ok(())
}

pub fn read_dataset(reader: impl BufRead, format: DataFormat) -> Result<Dataset> {
    match format {
        DataFormat::DenseCsv => read_dense(reader),
        DataFormat::SparseList => read_sparse(reader),
    }
}

pub fn write_dataset(ds: &Dataset, out: &mut impl Write, format: DataFormat) -> Result<()> {
    match format {
        DataFormat::DenseCsv => {
            write!(out, "label")?;
            for name in ds.feature_names() {
                write!(out, ",{name}")?;
            }
            writeln!(out)?;
            for (row, &y) in ds.features().rows().into_iter().zip(ds.labels()) {
                write!(out, "{y}")?;
                for v in row {
                    write!(out, ",{v}")?;
                }
                writeln!(out)?;
            }
        }
        DataFormat::SparseList => {
            writeln!(out, "#k={}", ds.k())?;
            for (row, &y) in ds.features().rows().into_iter().zip(ds.labels()) {
                write!(out, "{y}")?;
                for (j, &v) in row.iter().enumerate() {
                    if v == 1 {
                        write!(out, " {j}:1")?;
                    }
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn parse_bit(token: &str, line: usize, what: &str) -> Result<u8> {
    match token.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Error::parse(line, format!("{what} `{other}` is not 0 or 1"))),
    }
}

/// Non-blank lines with their 1-based line numbers.
fn numbered_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, line)| line.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()))
}

fn read_dense(reader: impl BufRead) -> Result<Dataset> {
    let mut lines = numbered_lines(reader);
    let (header_line, header) = lines.next().ok_or_else(|| Error::Empty("dense CSV".into()))??;
    let mut columns = header.trim().split(',');
    if columns.next().map(str::trim) != Some("label") {
        return Err(Error::parse(header_line, "header must start with `label`"));
    }
    let names: Vec<String> = columns.map(|c| c.trim().to_string()).collect();
    let k = names.len();
    if k == 0 {
        return Err(Error::parse(header_line, "header names no feature columns"));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for item in lines {
        let (line_no, line) = item?;
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != k + 1 {
            return Err(Error::parse(
                line_no,
                format!("expected {} fields, found {}", k + 1, fields.len()),
            ));
        }
        labels.push(parse_bit(fields[0], line_no, "label")?);
        for field in &fields[1..] {
            values.push(parse_bit(field, line_no, "feature value")?);
        }
    }
    if labels.is_empty() {
        return Err(Error::Empty("dense CSV".into()));
    }
    let features = Array2::from_shape_vec((labels.len(), k), values).expect("row arity checked");
    Dataset::new(features, labels, names)
}

fn read_sparse(reader: impl BufRead) -> Result<Dataset> {
    let mut lines = numbered_lines(reader);
    let (header_line, header) = lines.next().ok_or_else(|| Error::Empty("sparse list".into()))??;
    let k: usize = header
        .trim()
        .strip_prefix("#k=")
        .and_then(|d| d.trim().parse().ok())
        .ok_or_else(|| Error::parse(header_line, "expected dimension header `#k=<dim>`"))?;
    if k == 0 {
        return Err(Error::parse(header_line, "dimension must be at least 1"));
    }

    let mut values = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    for item in lines {
        let (line_no, line) = item?;
        let mut tokens = line.split_whitespace();
        let label = tokens.next().expect("blank lines are skipped");
        labels.push(parse_bit(label, line_no, "label")?);
        let mut row = vec![0u8; k];
        let mut previous: Option<usize> = None;
        for token in tokens {
            let (idx, val) = token
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, format!("entry `{token}` is not `<idx>:1`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::parse(line_no, format!("feature id `{idx}` is not an index")))?;
            if idx >= k {
                return Err(Error::parse(line_no, format!("unknown feature id {idx} (k={k})")));
            }
            if previous.is_some_and(|p| idx <= p) {
                return Err(Error::parse(line_no, "feature ids must be strictly increasing"));
            }
            if val != "1" {
                return Err(Error::parse(line_no, format!("feature value `{val}` must be 1")));
            }
            row[idx] = 1;
            previous = Some(idx);
        }
        values.extend(row);
    }
    if labels.is_empty() {
        return Err(Error::Empty("sparse list".into()));
    }
    let features = Array2::from_shape_vec((labels.len(), k), values).expect("row width fixed");
    Dataset::new(features, labels, Dataset::default_names(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn dense(text: &str) -> Result<Dataset> {
        read_dataset(text.as_bytes(), DataFormat::DenseCsv)
    }

    fn sparse(text: &str) -> Result<Dataset> {
        read_dataset(text.as_bytes(), DataFormat::SparseList)
    }

    #[test]
    fn dense_three_rows() {
        let ds = dense("label,f1,f2\n1,0,1\n0,1,1\n1,0,0\n").unwrap();
        assert_eq!((ds.n(), ds.k()), (3, 2));
        assert_eq!(ds.labels(), &[1, 0, 1]);
        assert_eq!(ds.feature_names(), &["f1", "f2"]);
        assert_eq!(ds.features(), &array![[0, 1], [1, 1], [0, 0]]);
        assert_eq!(ds.row_ids(), &[0, 1, 2]);
    }

    #[test]
    fn dense_non_binary_value_names_line() {
        match dense("label,f1,f2\n1,0,1\n0,2,1\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dense_wrong_arity() {
        match dense("label,a,b\n1,0\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_inputs_fail() {
        assert!(matches!(dense("").unwrap_err(), Error::Empty(_)));
        assert!(matches!(dense("label,a\n").unwrap_err(), Error::Empty(_)));
        assert!(matches!(sparse("").unwrap_err(), Error::Empty(_)));
        assert!(matches!(sparse("#k=4\n").unwrap_err(), Error::Empty(_)));
    }

    #[test]
    fn sparse_line_sets_indices() {
        let ds = sparse("#k=10\n1 3:1 7:1\n").unwrap();
        assert_eq!(ds.labels(), &[1]);
        let row: Vec<u8> = ds.features().row(0).to_vec();
        assert_eq!(row, vec![0, 0, 0, 1, 0, 0, 0, 1, 0, 0]);
    }

    #[test]
    fn sparse_errors() {
        let line_of = |text: &str| match sparse(text).unwrap_err() {
            Error::Parse { line, .. } => line,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(line_of("#k=4\n0 1:1\n1 4:1\n"), 3);
        assert_eq!(line_of("#k=4\n0 2:1 1:1\n"), 2);
        assert_eq!(line_of("#k=4\n0 1:0\n"), 2);
        assert_eq!(line_of("#k=4\n2 1:1\n"), 2);
        assert_eq!(line_of("k=4\n0 1:1\n"), 1);
        assert_eq!(line_of("#k=4\n0 x:1\n"), 2);
    }

    #[test]
    fn label_only_sparse_row_is_all_zero() {
        let ds = sparse("#k=3\n0\n1 0:1\n").unwrap();
        assert_eq!(ds.features(), &array![[0, 0, 0], [1, 0, 0]]);
    }
}
