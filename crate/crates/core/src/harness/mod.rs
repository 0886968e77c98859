//! Experiment orchestration: multi-trial runs, summaries, total communication cost and grid tuning.

pub mod config;
pub mod tune;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::algorithms::{AlgorithmSpec, RunOptions};
use crate::compressors::{derive_seed, CompressorState};
use crate::error::Result;
use crate::problem::ProblemInstance;
use crate::trace::{write_traces_csv, Trace};

pub use config::{ExperimentConfig, ProblemSpec, RunSection, SEED_ENV};
pub use tune::{tune_grid, tune_grid_on, GridAxis, GridSpec, TuneResult};

/// Header of the summary CSV. `bits_cum` is the trial mean of cumulative bits per worker,
/// where each round's cost is averaged over the workers.
pub const SUMMARY_HEADER: &str = "algorithm,compressor,omega,n,d,round,trials,bits_cum,subopt_mean,subopt_std";

/// Per-round statistics over an ensemble of traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub round: usize,
    /// Number of trials that recorded this round.
    pub trials: usize,
    pub bits_cum: f64,
    pub subopt_mean: f64,
    /// Sample standard deviation (0 for a single trial).
    pub subopt_std: f64,
}

/// Per-round mean and standard deviation of suboptimality, aligned by round index.
///
/// A trace that diverged counts as infinitely suboptimal at every round after its last record.
pub fn summarize(traces: &[Trace]) -> Vec<SummaryRow> {
    let mut rounds: Vec<usize> = traces.iter().flat_map(|t| t.records().iter().map(|r| r.round)).collect();
    rounds.sort_unstable();
    rounds.dedup();
    let mut cursors = vec![0usize; traces.len()];
    let mut rows = Vec::with_capacity(rounds.len());
    for &k in &rounds {
        let mut vals = Vec::with_capacity(traces.len());
        let mut bits = Vec::with_capacity(traces.len());
        for (t, c) in traces.iter().zip(cursors.iter_mut()) {
            let recs = t.records();
            while *c < recs.len() && recs[*c].round < k {
                *c += 1;
            }
            if *c < recs.len() && recs[*c].round == k {
                vals.push(recs[*c].subopt);
                bits.push(recs[*c].bits_cum);
            } else if t.diverged && recs.last().is_none_or(|r| r.round < k) {
                vals.push(f64::INFINITY);
            }
        }
        let m = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / m;
        let std = if vals.len() > 1 && mean.is_finite() {
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
        } else if mean.is_finite() {
            0.0
        } else {
            f64::INFINITY
        };
        let bits_mean = if bits.is_empty() {
            f64::NAN
        } else {
            bits.iter().sum::<f64>() / bits.len() as f64
        };
        rows.push(SummaryRow {
            round: k,
            trials: vals.len(),
            bits_cum: bits_mean,
            subopt_mean: mean,
            subopt_std: std,
        });
    }
    rows
}

/// Rounds and per-worker bits needed to reach accuracy `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tcc {
    pub eps: f64,
    /// `None` when no recorded round reaches `eps`.
    pub rounds: Option<usize>,
    pub bits: Option<f64>,
}

impl Tcc {
    pub fn reached(&self) -> bool {
        self.rounds.is_some()
    }
}

/// First round at which the trial-averaged suboptimality is at most `eps`, with the
/// cumulative per-worker bits at that round.
pub fn compute_tcc(traces: &[Trace], eps: f64) -> Tcc {
    tcc_from_summary(&summarize(traces), eps)
}

pub fn tcc_from_summary(summary: &[SummaryRow], eps: f64) -> Tcc {
    match summary.iter().find(|r| r.subopt_mean <= eps) {
        Some(r) => Tcc {
            eps,
            rounds: Some(r.round),
            bits: Some(r.bits_cum),
        },
        None => Tcc {
            eps,
            rounds: None,
            bits: None,
        },
    }
}

/// Output of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// One trace per trial, in trial order.
    pub traces: Vec<Trace>,
    pub summary: Vec<SummaryRow>,
    pub tcc: Vec<Tcc>,
    /// Some trial diverged.
    pub partial: bool,
}

impl ExperimentResult {
    pub fn write_raw<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_traces_csv(&self.traces, out)
    }

    pub fn write_summary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SUMMARY_HEADER}")?;
        let Some(first) = self.traces.first() else {
            return Ok(());
        };
        let m = &first.meta;
        for r in &self.summary {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                m.algorithm, m.compressor, m.omega, m.n, m.d, r.round, r.trials, r.bits_cum, r.subopt_mean, r.subopt_std
            )?;
        }
        Ok(())
    }

    /// Writes `raw.csv` and `summary.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut raw = BufWriter::new(fs::File::create(dir.join("raw.csv"))?);
        self.write_raw(&mut raw)?;
        raw.flush()?;
        let mut summary = BufWriter::new(fs::File::create(dir.join("summary.csv"))?);
        self.write_summary(&mut summary)?;
        summary.flush()
    }
}

impl RunSection {
    pub fn options(&self) -> RunOptions {
        RunOptions {
            rounds: self.rounds,
            max_bits: self.max_bits,
            checkpoint_every: self.checkpoint_every,
            lyapunov: self.lyapunov,
            divergence_threshold: crate::algorithms::DIVERGENCE_THRESHOLD,
        }
    }
}

/// Seed of trial `t` under master seed `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    derive_seed(&[seed, trial as u64])
}

/// Runs `trials` independently seeded runs of `algorithm` on `problem`.
///
/// Trials run in parallel; results are returned in trial order.
pub fn run_trials(
    problem: &ProblemInstance,
    algorithm: &AlgorithmSpec,
    compressor: &crate::compressors::CompressorSpec,
    opts: &RunOptions,
    trials: usize,
    seed: u64,
) -> Result<Vec<Trace>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let state = CompressorState::new(*compressor, problem.dim(), trial_seed(seed, t))?;
            let mut trace = algorithm.run(problem, &state, opts)?;
            trace.meta.trial = t;
            trace.meta.seed = seed;
            Ok(trace)
        })
        .collect()
}

/// Builds the problem and runs the configured experiment; writes CSVs when `run.output` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let problem = config.problem.build()?;
    run_experiment_on(&problem, config)
}

/// As [`run_experiment`] with a prebuilt problem.
pub fn run_experiment_on(problem: &ProblemInstance, config: &ExperimentConfig) -> Result<ExperimentResult> {
    let run = &config.run;
    let traces = run_trials(problem, &config.algorithm, &config.compressor, &run.options(), run.trials, run.seed)?;
    let summary = summarize(&traces);
    let tcc = run.eps.iter().map(|&e| tcc_from_summary(&summary, e)).collect();
    let partial = traces.iter().any(|t| t.diverged);
    let result = ExperimentResult {
        traces,
        summary,
        tcc,
        partial,
    };
    if let Some(dir) = &run.output {
        result.write_to(dir)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceMeta;

    fn trace(trial: usize, points: &[(usize, f64, f64)]) -> Trace {
        let mut t = Trace::new(TraceMeta {
            algorithm: "a".into(),
            compressor: "c".into(),
            omega: 0.0,
            n: 1,
            d: 1,
            seed: 0,
            trial,
        });
        for &(k, b, s) in points {
            t.push(k, b, s, None);
        }
        t
    }

    #[test]
    fn tcc_at_round_zero() {
        let t = trace(0, &[(0, 0.0, 1e-3), (1, 10.0, 1e-4)]);
        let tcc = compute_tcc(&[t], 1e-2);
        assert_eq!((tcc.rounds, tcc.bits), (Some(0), Some(0.0)));
    }

    #[test]
    fn tcc_uses_trial_mean() {
        let a = trace(0, &[(0, 0.0, 1.0), (1, 5.0, 0.1), (2, 10.0, 0.01)]);
        let b = trace(1, &[(0, 0.0, 1.0), (1, 5.0, 0.3), (2, 10.0, 0.01)]);
        let tcc = compute_tcc(&[a.clone(), b.clone()], 0.15);
        assert_eq!(tcc.rounds, Some(2));
        assert_eq!(compute_tcc(&[a, b], 1e-3).rounds, None);
    }

    #[test]
    fn diverged_trials_block_later_rounds() {
        let a = trace(0, &[(0, 0.0, 1.0), (1, 5.0, 0.1), (2, 10.0, 0.01)]);
        let mut b = trace(1, &[(0, 0.0, 1.0)]);
        b.diverged = true;
        let s = summarize(&[a, b]);
        assert_eq!(s.len(), 3);
        assert!(s[1].subopt_mean.is_infinite());
        assert_eq!(compute_tcc(&s_traces(), 0.5).rounds, Some(1));
    }

    fn s_traces() -> Vec<Trace> {
        vec![trace(0, &[(0, 0.0, 1.0), (1, 5.0, 0.1)])]
    }

    #[test]
    fn single_trial_has_zero_std() {
        let s = summarize(&[trace(0, &[(0, 0.0, 1.0), (3, 5.0, 0.5)])]);
        assert!(s.iter().all(|r| r.subopt_std == 0.0 && r.trials == 1));
    }
}
