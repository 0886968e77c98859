//! Per-round run records and their CSV form.

use std::io::{Read, Write};

use serde::Deserialize;

use crate::error::{Error, Result};

/// Exact header of the raw trace CSV.
pub const TRACE_HEADER: &str = "algorithm,compressor,omega,n,d,seed,trial,round,bits_cum,subopt,lyapunov";

/// Floor applied to recorded suboptimality so traces stay log-plottable.
pub const SUBOPT_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub algorithm: String,
    pub compressor: String,
    pub omega: f64,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub trial: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub round: usize,
    /// Cumulative bits sent by a single worker (averaged across workers).
    pub bits_cum: f64,
    pub subopt: f64,
    pub lyapunov: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub meta: TraceMeta,
    records: Vec<TraceRecord>,
    pub diverged: bool,
}

impl Trace {
    pub fn new(meta: TraceMeta) -> Self {
        Trace {
            meta,
            records: Vec::new(),
            diverged: false,
        }
    }

    /// Appends a record. Suboptimality is clamped at [`SUBOPT_FLOOR`].
    ///
    /// Panics if the round index does not increase or the bit count decreases.
    pub fn push(&mut self, round: usize, bits_cum: f64, subopt: f64, lyapunov: Option<f64>) {
        if let Some(last) = self.records.last() {
            assert!(round > last.round, "trace rounds must strictly increase");
            assert!(bits_cum >= last.bits_cum, "cumulative bits must not decrease");
        }
        self.records.push(TraceRecord {
            round,
            bits_cum,
            subopt: subopt.max(SUBOPT_FLOOR),
            lyapunov,
        });
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_subopt(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.subopt)
    }

    pub fn write_csv_rows<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let m = &self.meta;
        for r in &self.records {
            let lyap = r.lyapunov.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                m.algorithm, m.compressor, m.omega, m.n, m.d, m.seed, m.trial, r.round, r.bits_cum, r.subopt, lyap
            )?;
        }
        Ok(())
    }
}

/// Writes an ensemble of traces with the header, ordered by trial then round.
pub fn write_traces_csv<W: Write>(traces: &[Trace], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    let mut order: Vec<&Trace> = traces.iter().collect();
    order.sort_by_key(|t| t.meta.trial);
    for t in order {
        t.write_csv_rows(&mut out)?;
    }
    out.flush()
}

#[derive(Debug, Deserialize)]
struct Row {
    algorithm: String,
    compressor: String,
    omega: f64,
    n: usize,
    d: usize,
    seed: u64,
    trial: usize,
    round: usize,
    bits_cum: f64,
    subopt: f64,
    lyapunov: Option<f64>,
}

/// Reads a raw trace CSV back into one trace per `(algorithm, compressor, seed, trial)`.
pub fn read_traces_csv<R: Read>(input: R) -> Result<Vec<Trace>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != TRACE_HEADER {
        return Err(Error::Config(format!(
            "trace CSV header mismatch: expected `{TRACE_HEADER}`, got `{}`",
            header.join(",")
        )));
    }
    let mut traces: Vec<Trace> = Vec::new();
    for row in reader.deserialize() {
        let row: Row = row?;
        let meta = TraceMeta {
            algorithm: row.algorithm,
            compressor: row.compressor,
            omega: row.omega,
            n: row.n,
            d: row.d,
            seed: row.seed,
            trial: row.trial,
        };
        let same = traces.last().is_some_and(|t| {
            t.meta.trial == meta.trial
                && t.meta.seed == meta.seed
                && t.meta.algorithm == meta.algorithm
                && t.meta.compressor == meta.compressor
        });
        if !same {
            traces.push(Trace::new(meta));
        }
        let t = traces.last_mut().expect("just pushed");
        if t.last().is_some_and(|r| r.round >= row.round || r.bits_cum > row.bits_cum) {
            return Err(Error::Config(format!(
                "trace for trial {} is not ordered by round",
                t.meta.trial
            )));
        }
        t.push(row.round, row.bits_cum, row.subopt, row.lyapunov);
    }
    Ok(traces)
}
