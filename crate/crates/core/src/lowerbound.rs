//! Progress measure, progress simulation under random sparsification, suboptimality floors
//! and order-level round-complexity evaluators.

use rand::Rng;
use rayon::prelude::*;

use crate::algorithms::{adiana_round, AdianaState, ParamSchedule};
use crate::compressors::{derive_seed, keyed_rng, CompressorState, Welford};
use crate::error::{Error, Result};
use crate::problems::zero_chain::{chain_decay, HardInstance};

/// Absolute tolerance below which a coordinate counts as zero.
pub const PROG_TOL: f64 = 1e-12;

/// Largest 1-based index `k` with `|x_k| > tol`, or 0.
pub fn prog(x: &[f64], tol: f64) -> usize {
    x.iter().rposition(|v| v.abs() > tol).map_or(0, |k| k + 1)
}

/// `(μ/2) q^{2·prog} Δ` with `q` the chain decay ratio for `(κ, n)`.
pub fn sc_floor(prog_value: usize, mu: f64, kappa: f64, n: usize, delta: f64) -> f64 {
    let q = chain_decay(kappa, n);
    let e = 2 * prog_value;
    let qe = if e == 0 { 1.0 } else { q.powf(e as f64) };
    0.5 * mu * qe * delta
}

/// `min_{prog(x) <= k} f(x) = −λ² L k / (4 n (k+1))` for the generally convex chain.
pub fn gc_opt_at_prog(k: usize, lambda: f64, l: f64, n: usize) -> f64 {
    let k = k as f64;
    -lambda * lambda * l * k / (4.0 * n as f64 * (k + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    StronglyConvex,
    GenerallyConvex,
}

/// Order-level lower bound on communication rounds to reach accuracy `eps`, with unit constants.
///
/// Strongly convex: `(ω + (1 + ω/√n)√κ) ln(μΔ/ε)`. Generally convex (`mu` ignored):
/// `ω ln(LΔ/ε) + (1 + ω/√n)√(LΔ/ε)`.
pub fn theory_rounds(regime: Regime, omega: f64, n: usize, l: f64, mu: f64, delta: f64, eps: f64) -> f64 {
    let w = 1.0 + omega / (n as f64).sqrt();
    match regime {
        Regime::StronglyConvex => (omega + w * (l / mu).sqrt()) * (mu * delta / eps).ln(),
        Regime::GenerallyConvex => omega * (l * delta / eps).ln() + w * (l * delta / eps).sqrt(),
    }
}

/// Ratio of independent to shared-randomness round complexity:
/// `(ω + (1 + ω/√n)√κ) / ((1+ω)√κ)`.
pub fn savings_ratio(omega: f64, kappa: f64, n: usize) -> f64 {
    let sk = kappa.sqrt();
    (omega + (1.0 + omega / (n as f64).sqrt()) * sk) / ((1.0 + omega) * sk)
}

/// Per-round chain depth `B^t` reached by one simulated trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgressTrace {
    pub omega: f64,
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    /// `B^0, B^1, ..., B^T`.
    pub depth: Vec<usize>,
}

impl ProgressTrace {
    pub fn final_depth(&self) -> usize {
        *self.depth.last().unwrap_or(&0)
    }
}

#[derive(Debug, Clone)]
pub struct ProgressStats {
    pub omega: f64,
    pub n: usize,
    pub rounds: usize,
    pub traces: Vec<ProgressTrace>,
    pub mean_final: f64,
    pub se_final: f64,
    /// Fraction of trials with `B^T <= e·T/(1+ω)`.
    pub frac_below_bound: f64,
}

/// One trial of the active-worker chain: each round the worker owning the next link advances
/// the depth iff its fresh coordinate survives sparsification (probability `1/(1+ω)`).
pub fn simulate_progress_trial(omega: f64, n: usize, rounds: usize, seed: u64) -> ProgressTrace {
    let p = 1.0 / (1.0 + omega);
    let mut rng = keyed_rng(&[seed]);
    let mut depth = Vec::with_capacity(rounds + 1);
    depth.push(0);
    let mut b = 0usize;
    for _ in 0..rounds {
        // The active worker is `b mod n`; every other worker's gradient stays inside the span.
        if rng.random::<f64>() < p {
            b += 1;
        }
        depth.push(b);
    }
    ProgressTrace {
        omega,
        n,
        p,
        seed,
        depth,
    }
}

pub fn simulate_progress(omega: f64, n: usize, rounds: usize, trials: usize, seed: u64) -> Result<ProgressStats> {
    if !(omega >= 0.0) || n == 0 || trials == 0 {
        return Err(Error::invalid("progress simulation needs omega >= 0, n >= 1, trials >= 1"));
    }
    if (rounds as f64) < (1.0 + omega).ceil() {
        return Err(Error::invalid(format!(
            "progress simulation needs T >= ceil(1+omega) = {}, got {rounds}",
            (1.0 + omega).ceil()
        )));
    }
    let traces: Vec<ProgressTrace> = (0..trials)
        .into_par_iter()
        .map(|t| {
            simulate_progress_trial(omega, n, rounds, derive_seed(&[seed, t as u64]))
        })
        .collect();
    let bound = std::f64::consts::E * rounds as f64 / (1.0 + omega);
    let mut stat = Welford::default();
    let mut below = 0usize;
    for tr in &traces {
        let b = tr.final_depth();
        stat.push(b as f64);
        if b as f64 <= bound {
            below += 1;
        }
    }
    Ok(ProgressStats {
        omega,
        n,
        rounds,
        mean_final: stat.mean(),
        se_final: stat.standard_error(),
        frac_below_bound: below as f64 / trials as f64,
        traces,
    })
}

/// Suboptimality of the ADIANA output against the floor implied by its progress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorCheck {
    pub round: usize,
    pub subopt: f64,
    pub prog: usize,
    pub floor: f64,
}

impl FloorCheck {
    /// `subopt >= floor · (1 − rel_tol)`.
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.subopt >= self.floor * (1.0 - rel_tol)
    }
}

/// Runs ADIANA on a strongly convex hard instance and compares the output at every
/// `every`-th round with the progress floor.
pub fn audit_sc_floor(
    hard: &HardInstance,
    compressor: &CompressorState,
    schedule: &ParamSchedule,
    rounds: usize,
    every: usize,
) -> Result<Vec<FloorCheck>> {
    let problem = &hard.problem;
    let f_star = problem.f_star().ok_or(Error::FStarUnavailable)?;
    if every == 0 {
        return Err(Error::invalid("audit cadence must be >= 1"));
    }
    let mut state = AdianaState::new(problem);
    let mut checks = Vec::new();
    for k in 0..=rounds {
        if k > 0 {
            adiana_round(&mut state, problem, compressor, schedule)?;
        }
        if k % every == 0 || k == rounds {
            let (x, value) = state.output(problem);
            let floor = hard
                .suboptimality_floor(x)
                .ok_or_else(|| Error::invalid(format!("no progress floor for family {}", hard.family)))?;
            checks.push(FloorCheck {
                round: k,
                subopt: value - f_star,
                prog: prog(x, PROG_TOL),
                floor,
            });
        }
    }
    Ok(checks)
}
