//! ADIANA and the baseline methods, their parameter schedules and named fixture presets.

pub mod adiana;
pub mod canita;
pub mod diana;
pub mod ef21;
pub mod nesterov;
pub mod presets;
pub mod schedule;

use crate::compressors::CompressorState;
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::trace::{Trace, TraceMeta};

pub use adiana::{adiana_round, lyapunov, run_adiana, AdianaState};
pub use canita::{canita_schedule, CanitaParams};
pub use diana::run_diana;
pub use ef21::run_ef21;
pub use nesterov::run_nesterov;
pub use presets::{preset, preset_names, Preset};
pub use schedule::{ManualParams, ParamSchedule, Regime, RoundParams, Sequence};

/// Suboptimality above which a run is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Stopping and recording options shared by all runners.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Maximum number of rounds `T`.
    pub rounds: usize,
    /// Stop after the first round at which cumulative per-worker bits reach this value.
    pub max_bits: Option<f64>,
    /// Record every this many rounds; `None` picks a cadence from the problem size.
    pub checkpoint_every: Option<usize>,
    /// Record the Lyapunov value (ADIANA only; needs `x*`).
    pub lyapunov: bool,
    pub divergence_threshold: f64,
}

impl RunOptions {
    pub fn new(rounds: usize) -> Self {
        RunOptions {
            rounds,
            max_bits: None,
            checkpoint_every: None,
            lyapunov: false,
            divergence_threshold: DIVERGENCE_THRESHOLD,
        }
    }

    pub fn with_max_bits(mut self, bits: f64) -> Self {
        self.max_bits = Some(bits);
        self
    }

    pub fn with_lyapunov(mut self) -> Self {
        self.lyapunov = true;
        self
    }

    pub fn with_checkpoint_every(mut self, every: usize) -> Self {
        self.checkpoint_every = Some(every);
        self
    }
}

/// Every round for `d·n <= 1e5`, every 10 rounds otherwise.
pub fn default_cadence(problem: &ProblemInstance) -> usize {
    if problem.dim() * problem.workers() <= 100_000 {
        1
    } else {
        10
    }
}

pub(crate) fn meta(algorithm: &str, compressor: &CompressorState, problem: &ProblemInstance) -> TraceMeta {
    TraceMeta {
        algorithm: algorithm.to_string(),
        compressor: compressor.spec().to_string(),
        omega: compressor.omega(),
        n: problem.workers(),
        d: problem.dim(),
        seed: compressor.master_seed(),
        trial: 0,
    }
}

/// Records checkpoints and decides when a run stops.
pub(crate) struct Recorder {
    trace: Trace,
    f_star: f64,
    every: usize,
    rounds: usize,
    max_bits: f64,
    threshold: f64,
}

impl Recorder {
    pub(crate) fn new(problem: &ProblemInstance, meta: TraceMeta, opts: &RunOptions) -> Result<Self> {
        let f_star = problem.f_star().ok_or(Error::FStarUnavailable)?;
        let every = opts.checkpoint_every.unwrap_or_else(|| default_cadence(problem));
        if every == 0 {
            return Err(Error::invalid("checkpoint cadence must be >= 1"));
        }
        Ok(Recorder {
            trace: Trace::new(meta),
            f_star,
            every,
            rounds: opts.rounds,
            max_bits: opts.max_bits.unwrap_or(f64::INFINITY),
            threshold: opts.divergence_threshold,
        })
    }

    /// Whether round `k` (after `k` updates) needs its output evaluated.
    pub(crate) fn due(&self, k: usize, bits: f64) -> bool {
        k % self.every == 0 || k >= self.rounds || bits >= self.max_bits
    }

    /// Whether the run should stop after round `k`.
    pub(crate) fn done(&self, k: usize, bits: f64) -> bool {
        k >= self.rounds || bits >= self.max_bits || self.trace.diverged
    }

    /// Records the objective value of the output; flags divergence.
    pub(crate) fn record(&mut self, k: usize, bits: f64, value: f64, lyapunov: Option<f64>) {
        let subopt = value - self.f_star;
        if !subopt.is_finite() || subopt > self.threshold {
            self.trace.diverged = true;
            return;
        }
        self.trace.push(k, bits, subopt, lyapunov);
    }

    pub(crate) fn finish(self) -> Trace {
        self.trace
    }
}

/// How ADIANA's parameters are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    StronglyConvex,
    GenerallyConvex,
    Manual(ManualParams),
}

impl ScheduleSpec {
    pub fn resolve(&self, problem: &ProblemInstance, omega: f64) -> Result<ParamSchedule> {
        let (l, mu, n) = (problem.smoothness, problem.strong_convexity, problem.workers());
        match self {
            ScheduleSpec::StronglyConvex => ParamSchedule::strongly_convex(l, mu, n, omega),
            ScheduleSpec::GenerallyConvex => ParamSchedule::generally_convex(l, n, omega),
            ScheduleSpec::Manual(m) => Ok(ParamSchedule::manual(*m, l, mu, omega)),
        }
    }
}

/// An algorithm with its step-size parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmSpec {
    Adiana { schedule: ScheduleSpec },
    Diana { gamma: f64, alpha: Option<f64> },
    Ef21 { gamma: f64 },
    Nesterov { eta: f64, theta: f64 },
}

impl AlgorithmSpec {
    pub fn id(&self) -> &'static str {
        match self {
            AlgorithmSpec::Adiana { .. } => "adiana",
            AlgorithmSpec::Diana { .. } => "diana",
            AlgorithmSpec::Ef21 { .. } => "ef21",
            AlgorithmSpec::Nesterov { .. } => "nesterov",
        }
    }

    /// Whether the run draws random numbers (and so depends on the seed).
    pub fn is_randomized(&self, compressor: &CompressorState) -> bool {
        !matches!(self, AlgorithmSpec::Nesterov { .. })
            && compressor.spec().kind != crate::compressors::CompressorKind::Identity
    }

    /// The step size used for tie-breaking during tuning.
    pub fn step_size(&self) -> f64 {
        match self {
            AlgorithmSpec::Adiana {
                schedule: ScheduleSpec::Manual(m),
            } => m.eta.at(0),
            AlgorithmSpec::Adiana { .. } => 0.0,
            AlgorithmSpec::Diana { gamma, .. } | AlgorithmSpec::Ef21 { gamma } => *gamma,
            AlgorithmSpec::Nesterov { eta, .. } => *eta,
        }
    }

    /// Runs the algorithm; the compressor is ignored by Nesterov beyond its `r_bits`.
    pub fn run(&self, problem: &ProblemInstance, compressor: &CompressorState, opts: &RunOptions) -> Result<Trace> {
        match self {
            AlgorithmSpec::Adiana { schedule } => {
                let sched = schedule.resolve(problem, compressor.omega())?;
                run_adiana(problem, compressor, &sched, opts)
            }
            AlgorithmSpec::Diana { gamma, alpha } => run_diana(problem, compressor, *gamma, *alpha, opts),
            AlgorithmSpec::Ef21 { gamma } => run_ef21(problem, compressor, *gamma, opts),
            AlgorithmSpec::Nesterov { eta, theta } => {
                run_nesterov(problem, *eta, *theta, compressor.spec().r_bits, opts)
            }
        }
    }
}
