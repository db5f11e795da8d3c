//! Text files for embeddings, trained models and predictions.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`), which is
//! enough for every binary64 value to read back to the same bits.

use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use rembed_core::downstream::{ModelKind, TrainedModel};
use rembed_core::{DenseMatrix, Embedding};

use crate::error::{CliError, Result};

pub const EMBEDDING_MAGIC: &str = "REMBED";
pub const MODEL_MAGIC: &str = "REMODEL";
pub const VERSION: &str = "v1";

/// Loads warn when `‖VᵀV - I‖_max` exceeds this.
pub const ORTHONORMALITY_WARNING: f64 = 1e-6;

fn fmt_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Format(msg.into()))
}

fn write_values(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        let _ = write!(out, "{v:.16e}");
        first = false;
    }
    out.push('\n');
}

fn write_rows(out: &mut String, m: &DenseMatrix) {
    for i in 0..m.rows() {
        write_values(out, m.row(i));
    }
}

/// Line cursor that reports positions 1-based.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    what: &'static str,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, what: &'static str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            what,
        }
    }

    fn next_line(&mut self, expect: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => Ok((i + 1, l)),
            None => fmt_err(format!("{} file truncated: expected {expect}", self.what)),
        }
    }

    fn values(&mut self, count: usize, expect: &str) -> Result<Vec<f64>> {
        let (n, line) = self.next_line(expect)?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .or_else(|_| fmt_err(format!("line {n}: non-numeric value in {expect}")))?;
        if vals.len() != count {
            return fmt_err(format!("line {n}: expected {count} values in {expect}, found {}", vals.len()));
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return fmt_err(format!("line {n}: non-finite value in {expect}"));
        }
        Ok(vals)
    }

    fn matrix(&mut self, rows: usize, cols: usize, name: &str) -> Result<DenseMatrix> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            data.extend(self.values(cols, &format!("{name} row {i}"))?);
        }
        Ok(DenseMatrix::from_row_major(rows, cols, &data)?)
    }

    fn finish(mut self) -> Result<()> {
        for (i, l) in self.inner.by_ref() {
            if !l.trim().is_empty() {
                return fmt_err(format!("line {}: unexpected data after the last row", i + 1));
            }
        }
        Ok(())
    }
}

fn header<'a>(line: &'a str, magic: &str, fields: usize) -> Result<Vec<&'a str>> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != fields || toks[0] != magic || toks[1] != VERSION {
        return fmt_err(format!("bad header {line:?}, expected \"{magic} {VERSION} ...\" with {fields} fields"));
    }
    Ok(toks)
}

fn dim(tok: &str, name: &str) -> Result<usize> {
    tok.parse()
        .or_else(|_| fmt_err(format!("header field {name} is not a count: {tok:?}")))
}

pub fn write_embedding(emb: &Embedding) -> String {
    let mut out = format!("{EMBEDDING_MAGIC} {VERSION} {} {}\n", emb.c(), emb.k());
    write_values(&mut out, emb.sigma().iter().copied());
    write_rows(&mut out, emb.v());
    out
}

pub fn read_embedding(text: &str) -> Result<Embedding> {
    let mut lines = Lines::new(text, "embedding");
    let (_, head) = lines.next_line("header")?;
    let toks = header(head, EMBEDDING_MAGIC, 4)?;
    let (c, k) = (dim(toks[2], "c")?, dim(toks[3], "k")?);
    let sigma = lines.values(k, "sigma")?;
    let v = lines.matrix(c, k, "V")?;
    lines.finish()?;
    let emb = Embedding::new(v, sigma).or_else(|e| fmt_err(format!("invalid embedding: {e}")))?;
    let defect = emb.orthonormality_defect();
    if defect > ORTHONORMALITY_WARNING {
        warn!("embedding columns are not orthonormal (max |VᵀV - I| = {defect:e})");
    }
    Ok(emb)
}

pub fn save_embedding(path: &Path, emb: &Embedding) -> Result<()> {
    std::fs::write(path, write_embedding(emb)).map_err(|e| CliError::io(path, e))
}

pub fn load_embedding(path: &Path) -> Result<Embedding> {
    read_embedding(&std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?)
}

/// `REMODEL v1 kind d c k`, then `Z` (d rows), `V` (c rows) and, for the
/// logistic kind, the heads (c rows of k weights followed by the bias).
pub fn write_model(model: &TrainedModel) -> String {
    let mut out = format!(
        "{MODEL_MAGIC} {VERSION} {} {} {} {}\n",
        model.kind().as_str(),
        model.d(),
        model.c(),
        model.k()
    );
    write_rows(&mut out, model.z());
    write_rows(&mut out, model.v());
    if let Some(h) = model.heads() {
        write_rows(&mut out, h);
    }
    out
}

pub fn read_model(text: &str) -> Result<TrainedModel> {
    let mut lines = Lines::new(text, "model");
    let (_, head) = lines.next_line("header")?;
    let toks = header(head, MODEL_MAGIC, 6)?;
    let kind: ModelKind = toks[2]
        .parse()
        .or_else(|_| fmt_err(format!("unknown model kind {:?}", toks[2])))?;
    let (d, c, k) = (dim(toks[3], "d")?, dim(toks[4], "c")?, dim(toks[5], "k")?);
    let z = lines.matrix(d, k, "Z")?;
    let v = lines.matrix(c, k, "V")?;
    let heads = match kind {
        ModelKind::InnerProduct => None,
        ModelKind::IndependentLogistic => Some(lines.matrix(c, k + 1, "heads")?),
    };
    lines.finish()?;
    TrainedModel::new(kind, z, v, heads).or_else(|e| fmt_err(format!("invalid model: {e}")))
}

pub fn save_model(path: &Path, model: &TrainedModel) -> Result<()> {
    std::fs::write(path, write_model(model)).map_err(|e| CliError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    read_model(&std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?)
}

/// One line per example: predicted labels, best first, space-separated,
/// shifted by `labels_base`.
pub fn write_predictions(preds: &[Vec<usize>], labels_base: usize) -> String {
    let mut out = String::new();
    for p in preds {
        let line: Vec<String> = p.iter().map(|l| (l + labels_base).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_predictions(text: &str, labels_base: usize) -> Result<Vec<Vec<usize>>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            line.split_whitespace()
                .map(|t| {
                    let v: usize = t.parse().or_else(|_| {
                        Err(CliError::Parse {
                            line: i + 1,
                            msg: format!("invalid label {t:?}"),
                        })
                    })?;
                    v.checked_sub(labels_base).ok_or(CliError::Index {
                        line: i + 1,
                        msg: format!("label {v} is below the base {labels_base}"),
                    })
                })
                .collect()
        })
        .collect()
}
