//! Multilabel svmlight text: `label[,label...] idx:val [idx:val...]`.
//!
//! Lines that are blank or start with `#` are skipped, and anything after a
//! `#` elsewhere on a line is ignored. A line whose first token contains `:`
//! has no labels. Duplicate feature indices on one line are summed and
//! explicit zeros dropped, so parsing always yields canonical CSR.

use std::fmt::Write as _;
use std::path::Path;

use rembed_core::{Dataset, SparseMatrix};

use crate::error::{CliError, Result};

/// Index conventions and dimension overrides.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SvmlightOptions {
    /// Index of the first label in the file (0 or 1).
    pub labels_base: usize,
    /// Index of the first feature in the file (0 or 1).
    pub features_base: usize,
    /// Feature count `d`; inferred as max index + 1 when absent.
    pub features: Option<usize>,
    /// Class count `c`; inferred as max label + 1 when absent.
    pub classes: Option<usize>,
}

impl Default for SvmlightOptions {
    fn default() -> Self {
        Self {
            labels_base: 0,
            features_base: 1,
            features: None,
            classes: None,
        }
    }
}

/// Features and labels as read, before the [`Dataset`] checks (rows may lack labels).
#[derive(Clone, Debug, PartialEq)]
pub struct Labeled {
    pub x: SparseMatrix,
    pub y: SparseMatrix,
}

impl Labeled {
    pub fn into_dataset(self) -> Result<Dataset> {
        Ok(Dataset::new(self.x, self.y)?)
    }
}

impl From<&Dataset> for Labeled {
    fn from(d: &Dataset) -> Self {
        Labeled {
            x: d.x().clone(),
            y: d.y().clone(),
        }
    }
}

struct Row {
    line: usize,
    labels: Vec<(usize, f64)>,
    features: Vec<(usize, f64)>,
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(CliError::Parse { line, msg: msg.into() })
}

fn index_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(CliError::Index { line, msg: msg.into() })
}

fn rebase(raw: &str, base: usize, what: &str, line: usize) -> Result<usize> {
    let v: usize = match raw.parse() {
        Ok(v) => v,
        Err(_) => return parse_err(line, format!("invalid {what} index {raw:?}")),
    };
    match v.checked_sub(base) {
        Some(i) => Ok(i),
        None => index_err(line, format!("{what} index {v} is below the base {base}")),
    }
}

fn parse_line(content: &str, line: usize, opts: &SvmlightOptions) -> Result<Row> {
    let mut tokens = content.split_whitespace().peekable();
    let mut labels = Vec::new();
    if let Some(first) = tokens.peek() {
        if !first.contains(':') {
            for raw in first.split(',') {
                if raw.is_empty() {
                    return parse_err(line, "empty label in label list");
                }
                labels.push((rebase(raw, opts.labels_base, "label", line)?, 1.0));
            }
            tokens.next();
        }
    }
    let mut features = Vec::new();
    for tok in tokens {
        let Some((idx, val)) = tok.split_once(':') else {
            return parse_err(line, format!("expected idx:val, got {tok:?}"));
        };
        let j = rebase(idx, opts.features_base, "feature", line)?;
        let v: f64 = match val.parse() {
            Ok(v) => v,
            Err(_) => return parse_err(line, format!("non-numeric value {val:?}")),
        };
        if !v.is_finite() {
            return parse_err(line, format!("non-finite value {val:?}"));
        }
        features.push((j, v));
    }
    Ok(Row { line, labels, features })
}

fn resolve_dim(
    rows: &[Row],
    declared: Option<usize>,
    pick: impl Fn(&Row) -> &[(usize, f64)],
    what: &str,
) -> Result<usize> {
    let mut needed = 0;
    for row in rows {
        for &(j, _) in pick(row) {
            if let Some(limit) = declared {
                if j >= limit {
                    return index_err(row.line, format!("{what} index {j} out of range for {limit} {what}s"));
                }
            }
            needed = needed.max(j + 1);
        }
    }
    Ok(declared.unwrap_or(needed))
}

pub fn parse_svmlight(text: &str, opts: &SvmlightOptions) -> Result<Labeled> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        rows.push(parse_line(content, i + 1, opts)?);
    }
    let d = resolve_dim(&rows, opts.features, |r| &r.features, "feature")?;
    let c = resolve_dim(&rows, opts.classes, |r| &r.labels, "label")?;
    let (xs, ys): (Vec<_>, Vec<_>) = rows.into_iter().map(|r| (r.features, r.labels)).unzip();
    // repeated labels collapse to one positive
    let ys: Vec<Vec<(usize, f64)>> = ys
        .into_iter()
        .map(|mut l| {
            l.sort_by_key(|e| e.0);
            l.dedup_by_key(|e| e.0);
            l
        })
        .collect();
    Ok(Labeled {
        x: SparseMatrix::from_rows(d, &xs)?,
        y: SparseMatrix::from_rows(c, &ys)?,
    })
}

pub fn load_svmlight(path: &Path, opts: &SvmlightOptions) -> Result<Labeled> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_svmlight(&text, opts)
}

/// Canonical text for `data`: one line per row, sorted indices, values in
/// shortest round-trip decimal.
pub fn write_svmlight(data: &Labeled, opts: &SvmlightOptions) -> Result<String> {
    if data.x.rows() != data.y.rows() {
        return Err(CliError::Format(format!(
            "{} feature rows but {} label rows",
            data.x.rows(),
            data.y.rows()
        )));
    }
    let mut out = String::new();
    for i in 0..data.x.rows() {
        let (labels, _) = data.y.row(i);
        let (idx, vals) = data.x.row(i);
        if labels.is_empty() && idx.is_empty() {
            return Err(CliError::Format(format!("row {i} has neither labels nor features")));
        }
        let mut sep = "";
        for (n, l) in labels.iter().enumerate() {
            let _ = write!(out, "{}{}", if n == 0 { "" } else { "," }, l + opts.labels_base);
            sep = " ";
        }
        for (j, v) in idx.iter().zip(vals) {
            let _ = write!(out, "{sep}{}:{v}", j + opts.features_base);
            sep = " ";
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn save_svmlight(path: &Path, data: &Labeled, opts: &SvmlightOptions) -> Result<()> {
    let text = write_svmlight(data, opts)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Labeled> {
        parse_svmlight(text, &SvmlightOptions::default())
    }

    #[test]
    fn parses_multilabel_line() {
        let l = parse("3,7 1:0.5 4:1.2\n").unwrap();
        assert_eq!(l.y.row(0).0, &[3, 7]);
        assert_eq!(l.x.row(0), (&[0usize, 3][..], &[0.5, 1.2][..]));
        assert_eq!((l.x.cols(), l.y.cols()), (4, 8));
    }

    #[test]
    fn repeated_single_label_lines() {
        let text = "0 2:1\n".repeat(5);
        let data = parse(&text).unwrap().into_dataset().unwrap();
        assert_eq!(data.n(), 5);
        assert!(data.c() >= 1);
        assert_eq!(data.avg_label_sparsity(), 1.0);
    }

    #[test]
    fn bad_value_names_the_line() {
        match parse("1:x") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        match parse("# header\n\n0 1:1\n0 1:abc\n") {
            Err(CliError::Parse { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("abc"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("0 1:nan"), Err(CliError::Parse { .. })));
        assert!(matches!(parse("0 1"), Err(CliError::Parse { .. })));
        assert!(matches!(parse("a 1:1"), Err(CliError::Parse { .. })));
        assert!(matches!(parse("0,,1 1:1"), Err(CliError::Parse { .. })));
    }

    #[test]
    fn comments_blanks_and_duplicates() {
        let l = parse("# c\n\n  \n1 2:1 2:2 3:0 # trailing\n").unwrap();
        assert_eq!(l.x.rows(), 1);
        assert_eq!(l.x.row(0), (&[1usize][..], &[3.0][..]));
    }

    #[test]
    fn declared_dimensions() {
        let opts = SvmlightOptions {
            features: Some(10),
            classes: Some(4),
            ..Default::default()
        };
        let l = parse_svmlight("1 2:1\n", &opts).unwrap();
        assert_eq!((l.x.cols(), l.y.cols()), (10, 4));
        match parse_svmlight("0 1:1\n4 1:1\n", &opts) {
            Err(CliError::Index { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_svmlight("0 11:1\n", &opts),
            Err(CliError::Index { .. })
        ));
    }

    #[test]
    fn index_bases() {
        let one_based_labels = SvmlightOptions {
            labels_base: 1,
            features_base: 0,
            ..Default::default()
        };
        let l = parse_svmlight("1,2 0:5\n", &one_based_labels).unwrap();
        assert_eq!(l.y.row(0).0, &[0, 1]);
        assert_eq!(l.x.row(0).0, &[0]);
        assert!(matches!(
            parse_svmlight("0 0:1\n", &one_based_labels),
            Err(CliError::Index { .. })
        ));
        assert!(matches!(parse("0 0:1\n"), Err(CliError::Index { .. })));
    }

    #[test]
    fn unlabeled_rows_parse_but_are_not_datasets() {
        let l = parse("1:1\n0 1:2\n").unwrap();
        assert_eq!(l.y.row_nnz(0), 0);
        assert!(l.into_dataset().is_err());
    }

    #[test]
    fn round_trip_is_canonical() {
        let text = "2,0 3:0.1 1:-2.5e-7 3:0.2\n1\n0 5:1e300\n";
        for opts in [
            SvmlightOptions::default(),
            SvmlightOptions {
                labels_base: 1,
                features_base: 0,
                ..Default::default()
            },
        ] {
            let text = if opts.labels_base == 1 {
                "3,1 2:0.1 0:-2.5e-7 2:0.2\n2\n1 4:1e300\n"
            } else {
                text
            };
            let a = parse_svmlight(text, &opts).unwrap();
            let written = write_svmlight(&a, &opts).unwrap();
            let b = parse_svmlight(&written, &opts).unwrap();
            assert_eq!(a, b);
            assert_eq!(written, write_svmlight(&b, &opts).unwrap());
        }
    }
}
