//! LIBSVM sparse text data and partitioned logistic regression.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::{Objective, ProblemInstance};
use crate::vector::DenseVector;

/// A sparse example: 0-based `(feature, value)` pairs.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LibsvmData {
    /// Labels mapped to `{−1, +1}`.
    pub labels: Vec<f64>,
    pub rows: Vec<SparseRow>,
    /// Largest 1-based feature index seen.
    pub max_index: usize,
}

impl LibsvmData {
    pub fn parse<R: Read>(input: R, source: &Path) -> Result<Self> {
        let reader = BufReader::new(input);
        let mut data = LibsvmData::default();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let err = |reason: String| Error::Parse {
                path: source.to_path_buf(),
                line: lineno + 1,
                reason,
            };
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut tokens = content.split_whitespace();
            let label_tok = tokens.next().expect("non-empty line has a token");
            let label: f64 = label_tok
                .parse()
                .map_err(|_| err(format!("invalid label `{label_tok}`")))?;
            let mut row = SparseRow::new();
            let mut prev = 0usize;
            for tok in tokens {
                let (idx, val) = tok
                    .split_once(':')
                    .ok_or_else(|| err(format!("expected index:value, got `{tok}`")))?;
                let idx: usize = idx
                    .parse()
                    .map_err(|_| err(format!("invalid feature index `{idx}`")))?;
                if idx == 0 {
                    return Err(err("feature indices are 1-based".into()));
                }
                if idx <= prev {
                    return Err(err(format!("feature indices must increase, got {idx} after {prev}")));
                }
                let val: f64 = val
                    .parse()
                    .map_err(|_| err(format!("invalid feature value `{val}`")))?;
                if !val.is_finite() {
                    return Err(err(format!("non-finite feature value `{val}`")));
                }
                prev = idx;
                data.max_index = data.max_index.max(idx);
                row.push((idx - 1, val));
            }
            data.labels.push(if label > 0.0 { 1.0 } else { -1.0 });
            data.rows.push(row);
        }
        Ok(data)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Self::parse(file, path)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Serializes back to LIBSVM text with `+1`/`-1` labels.
    pub fn to_libsvm_string(&self) -> String {
        let mut out = String::new();
        for (label, row) in self.labels.iter().zip(&self.rows) {
            out.push_str(if *label > 0.0 { "+1" } else { "-1" });
            for (idx, val) in row {
                write!(out, " {}:{}", idx + 1, val).expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }
}

/// `f_i(x) = (1/M) Σ_m ln(1 + exp(−b_{i,m} a_{i,m}ᵀ x))`.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    d: usize,
    per_worker: usize,
    labels: Vec<f64>,
    rows: Vec<SparseRow>,
}

fn sparse_dot(row: &SparseRow, x: &[f64]) -> f64 {
    row.iter().map(|&(j, v)| v * x[j]).sum()
}

/// `ln(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl LogisticObjective {
    fn range(&self, worker: usize) -> std::ops::Range<usize> {
        worker * self.per_worker..(worker + 1) * self.per_worker
    }

    /// Largest eigenvalue of `A_iᵀA_i` by power iteration on the sparse rows.
    fn gram_norm(&self, worker: usize) -> f64 {
        let mut v = DenseVector::filled(self.d, 1.0 / (self.d as f64).sqrt());
        let mut est = 0.0;
        for _ in 0..500 {
            let mut w = DenseVector::zeros(self.d);
            for m in self.range(worker) {
                let t = sparse_dot(&self.rows[m], &v);
                for &(j, a) in &self.rows[m] {
                    w[j] += t * a;
                }
            }
            let norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            let next = v.dot(&w);
            w.scale(1.0 / norm);
            v = w;
            if (next - est).abs() <= 1e-13 * next {
                return next;
            }
            est = next;
        }
        est
    }
}

impl Objective for LogisticObjective {
    fn workers(&self) -> usize {
        self.labels.len() / self.per_worker
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn local_value(&self, worker: usize, x: &[f64]) -> f64 {
        let total: f64 = self
            .range(worker)
            .map(|m| softplus(-self.labels[m] * sparse_dot(&self.rows[m], x)))
            .sum();
        total / self.per_worker as f64
    }

    fn local_grad_into(&self, worker: usize, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let scale = 1.0 / self.per_worker as f64;
        for m in self.range(worker) {
            let b = self.labels[m];
            let coef = -b * sigmoid(-b * sparse_dot(&self.rows[m], x)) * scale;
            for &(j, a) in &self.rows[m] {
                out[j] += coef * a;
            }
        }
    }
}

/// Options for [`load_libsvm`].
#[derive(Debug, Clone, Default)]
pub struct LibsvmOptions {
    /// Points per worker; defaults to `⌊N / n⌋`.
    pub per_worker: Option<usize>,
    /// Feature dimension; defaults to the largest index in the file.
    pub dim: Option<usize>,
}

/// Loads a LIBSVM file and partitions it contiguously: worker `i` owns points `iM .. (i+1)M`.
pub fn load_libsvm(path: &Path, n: usize, opts: &LibsvmOptions) -> Result<ProblemInstance> {
    let data = LibsvmData::load(path)?;
    logistic_from_data(data, n, opts, path.to_path_buf())
}

pub fn logistic_from_data(data: LibsvmData, n: usize, opts: &LibsvmOptions, source: PathBuf) -> Result<ProblemInstance> {
    if n == 0 {
        return Err(Error::invalid("logistic regression needs n >= 1"));
    }
    let per_worker = opts.per_worker.unwrap_or(data.len() / n);
    if per_worker == 0 || data.len() < n * per_worker {
        return Err(Error::invalid(format!(
            "{}: {} usable points, need n*M = {}*{} ",
            source.display(),
            data.len(),
            n,
            per_worker.max(1)
        )));
    }
    let d = opts.dim.unwrap_or(data.max_index);
    if d < data.max_index {
        return Err(Error::invalid(format!(
            "dimension {d} is smaller than the largest feature index {}",
            data.max_index
        )));
    }
    let used = n * per_worker;
    let objective = LogisticObjective {
        d,
        per_worker,
        labels: data.labels[..used].to_vec(),
        rows: data.rows[..used].to_vec(),
    };
    let l = (0..n)
        .map(|i| objective.gram_norm(i))
        .fold(0.0f64, f64::max)
        / (4.0 * per_worker as f64);
    let l = if l > 0.0 { l } else { f64::MIN_POSITIVE };
    Ok(ProblemInstance::new("logistic", Arc::new(objective), l, 0.0, DenseVector::zeros(d))?
        .with_meta("source", source.display())
        .with_meta("M", per_worker))
}
