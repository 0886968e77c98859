//! Experiment configuration read from TOML with `[problem]`, `[algorithm]`, `[compressor]` and
//! `[run]` sections.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::algorithms::presets::{preset, preset_names, PresetProblem};
use crate::algorithms::{AlgorithmSpec, ManualParams, ScheduleSpec, Sequence};
use crate::compressors::{CompressorKind, CompressorSpec, Randomness, DEFAULT_R_BITS};
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::problems::{
    gen_constructed_quadratic, gen_least_squares, gen_zero_chain_gc, gen_zero_chain_gc3, gen_zero_chain_sc,
    load_libsvm, LeastSquaresSpec, LibsvmOptions,
};

/// Environment variable overriding `[run] seed`.
pub const SEED_ENV: &str = "COMMSIM_SEED";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Constructed {
        #[serde(default = "one")]
        mu: f64,
        #[serde(default = "ten_thousand")]
        l: f64,
        #[serde(default = "twenty")]
        d: usize,
        #[serde(default = "four_hundred")]
        n: usize,
    },
    LeastSquares {
        n: usize,
        m: usize,
        d: usize,
        #[serde(default = "hundred")]
        cond: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        gaussian_rhs: bool,
    },
    Libsvm {
        path: PathBuf,
        n: usize,
        per_worker: Option<usize>,
        dim: Option<usize>,
    },
    ZeroChainSc {
        l: f64,
        mu: f64,
        n: usize,
        d: usize,
        #[serde(default = "one")]
        delta: f64,
    },
    ZeroChainGc {
        l: f64,
        n: usize,
        d: usize,
        #[serde(default = "one")]
        delta: f64,
    },
    ZeroChainGc3 {
        l: f64,
        n: usize,
        d: usize,
        #[serde(default = "one")]
        delta: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn ten_thousand() -> f64 {
    1e4
}
fn hundred() -> f64 {
    100.0
}
fn twenty() -> usize {
    20
}
fn four_hundred() -> usize {
    400
}

impl ProblemSpec {
    /// Builds the instance; `f*` is precomputed when it has no closed form.
    pub fn build(&self) -> Result<ProblemInstance> {
        let mut problem = match self {
            ProblemSpec::Constructed { mu, l, d, n } => gen_constructed_quadratic(*mu, *l, *d, *n)?,
            ProblemSpec::LeastSquares {
                n,
                m,
                d,
                cond,
                seed,
                gaussian_rhs,
            } => gen_least_squares(&LeastSquaresSpec {
                n: *n,
                m: *m,
                d: *d,
                cond: *cond,
                seed: *seed,
                gaussian_rhs: *gaussian_rhs,
            })?,
            ProblemSpec::Libsvm {
                path,
                n,
                per_worker,
                dim,
            } => load_libsvm(
                path,
                *n,
                &LibsvmOptions {
                    per_worker: *per_worker,
                    dim: *dim,
                },
            )?,
            ProblemSpec::ZeroChainSc { l, mu, n, d, delta } => gen_zero_chain_sc(*l, *mu, *n, *d, *delta)?.problem,
            ProblemSpec::ZeroChainGc { l, n, d, delta } => gen_zero_chain_gc(*l, *n, *d, *delta)?.problem,
            ProblemSpec::ZeroChainGc3 { l, n, d, delta } => gen_zero_chain_gc3(*l, *n, *d, *delta)?.problem,
        };
        if problem.f_star().is_none() {
            problem.precompute_f_star();
        }
        Ok(problem)
    }

    /// The default problem a preset was tuned on (logistic presets need a data path and are excluded).
    pub fn for_preset(problem: PresetProblem) -> Option<Self> {
        match problem {
            PresetProblem::Constructed => Some(ProblemSpec::Constructed {
                mu: 1.0,
                l: 1e4,
                d: 20,
                n: 400,
            }),
            PresetProblem::LeastSquares => Some(ProblemSpec::LeastSquares {
                n: 400,
                m: 25,
                d: 20,
                cond: 100.0,
                seed: 0,
                gaussian_rhs: false,
            }),
            PresetProblem::A9a | PresetProblem::W8a => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgorithmSection {
    name: Option<String>,
    preset: Option<String>,
    schedule: Option<String>,
    eta: Option<Sequence>,
    theta1: Option<Sequence>,
    theta2: Option<f64>,
    theta: Option<f64>,
    p: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompressorSection {
    kind: String,
    s: Option<usize>,
    levels: Option<usize>,
    #[serde(default)]
    randomness: Randomness,
    #[serde(default = "default_r_bits")]
    r_bits: u32,
}

fn default_r_bits() -> u32 {
    DEFAULT_R_BITS
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Maximum rounds `T`.
    pub rounds: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Accuracy targets, strictly decreasing.
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    /// Directory receiving `raw.csv` and `summary.csv`.
    pub output: Option<PathBuf>,
    pub max_bits: Option<f64>,
    pub checkpoint_every: Option<usize>,
    #[serde(default)]
    pub lyapunov: bool,
    /// Share of `rounds` used when tuning.
    #[serde(default = "default_budget")]
    pub budget_fraction: f64,
}

fn default_trials() -> usize {
    20
}
fn default_eps() -> Vec<f64> {
    vec![1e-2, 1e-4, 1e-6]
}
fn default_budget() -> f64 {
    0.2
}

impl RunSection {
    pub fn new(rounds: usize, trials: usize, seed: u64) -> Self {
        RunSection {
            rounds,
            trials,
            seed,
            eps: default_eps(),
            output: None,
            max_bits: None,
            checkpoint_every: None,
            lyapunov: false,
            budget_fraction: default_budget(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: Option<ProblemSpec>,
    #[serde(default)]
    algorithm: AlgorithmSection,
    compressor: Option<CompressorSection>,
    run: RunSection,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub algorithm: AlgorithmSpec,
    pub compressor: CompressorSpec,
    pub run: RunSection,
}

impl ExperimentConfig {
    /// Parses TOML text. Does not consult the environment.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let preset = match &raw.algorithm.preset {
            Some(name) => Some(preset(name).ok_or_else(|| {
                Error::Config(format!("unknown preset `{name}`; known presets: {}", preset_names().join(", ")))
            })?),
            None => None,
        };
        let algorithm = match &preset {
            Some(p) => {
                let a = &raw.algorithm;
                if a.name.is_some() || a.schedule.is_some() || a.eta.is_some() || a.gamma.is_some() || a.theta.is_some() || a.theta1.is_some() {
                    return Err(Error::Config("`preset` cannot be combined with explicit algorithm parameters".into()));
                }
                p.algorithm.clone()
            }
            None => algorithm_from_section(&raw.algorithm)?,
        };
        let compressor = match (&raw.compressor, &preset) {
            (Some(c), _) => compressor_from_section(c)?,
            (None, Some(p)) => p.compressor,
            (None, None) => CompressorSpec::identity(),
        };
        let problem = match (raw.problem, &preset) {
            (Some(p), _) => p,
            (None, Some(p)) => ProblemSpec::for_preset(p.problem)
                .ok_or_else(|| Error::Config(format!("preset `{}` needs an explicit [problem] section", p.name)))?,
            (None, None) => return Err(Error::Config("missing [problem] section".into())),
        };
        let cfg = ExperimentConfig {
            problem,
            algorithm,
            compressor,
            run: raw.run,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies the seed override from the environment.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.apply_env()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.run.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}={v} is not an unsigned integer")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.run;
        if r.trials == 0 {
            return Err(Error::Config("run.trials must be >= 1".into()));
        }
        if r.rounds == 0 {
            return Err(Error::Config("run.rounds must be >= 1".into()));
        }
        if r.eps.iter().any(|e| !(*e > 0.0)) || r.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(format!("run.eps must be positive and strictly decreasing, got {:?}", r.eps)));
        }
        if !(r.budget_fraction > 0.0 && r.budget_fraction <= 1.0) {
            return Err(Error::Config(format!("run.budget_fraction must lie in (0, 1], got {}", r.budget_fraction)));
        }
        if r.checkpoint_every == Some(0) {
            return Err(Error::Config("run.checkpoint_every must be >= 1".into()));
        }
        Ok(())
    }
}

fn require<T: Copy>(v: Option<T>, name: &str, alg: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("algorithm `{alg}` needs `{name}`")))
}

fn algorithm_from_section(a: &AlgorithmSection) -> Result<AlgorithmSpec> {
    let name = a
        .name
        .as_deref()
        .ok_or_else(|| Error::Config("[algorithm] needs `name` or `preset`".into()))?;
    let const_eta = |alg: &str| -> Result<f64> {
        match require(a.eta, "eta", alg)? {
            Sequence::Const(v) => Ok(v),
            _ => Err(Error::Config(format!("algorithm `{alg}` needs a constant `eta`"))),
        }
    };
    match name {
        "adiana" => {
            let schedule = match a.schedule.as_deref().unwrap_or("manual") {
                "strongly_convex" => ScheduleSpec::StronglyConvex,
                "generally_convex" => ScheduleSpec::GenerallyConvex,
                "manual" => ScheduleSpec::Manual(ManualParams {
                    eta: require(a.eta, "eta", name)?,
                    theta1: require(a.theta1, "theta1", name)?,
                    theta2: require(a.theta2, "theta2", name)?,
                    p: require(a.p, "p", name)?,
                    alpha: a.alpha,
                    beta: a.beta,
                    gamma: a.gamma,
                }),
                other => return Err(Error::Config(format!("unknown schedule `{other}`"))),
            };
            Ok(AlgorithmSpec::Adiana { schedule })
        }
        "diana" => Ok(AlgorithmSpec::Diana {
            gamma: require(a.gamma, "gamma", name)?,
            alpha: a.alpha,
        }),
        "ef21" => Ok(AlgorithmSpec::Ef21 {
            gamma: require(a.gamma, "gamma", name)?,
        }),
        "nesterov" => Ok(AlgorithmSpec::Nesterov {
            eta: const_eta(name)?,
            theta: require(a.theta, "theta", name)?,
        }),
        other => Err(Error::Config(format!(
            "unknown algorithm `{other}` (expected adiana, diana, ef21 or nesterov)"
        ))),
    }
}

fn compressor_from_section(c: &CompressorSection) -> Result<CompressorSpec> {
    let s = || c.s.ok_or_else(|| Error::Config(format!("compressor `{}` needs `s`", c.kind)));
    let kind = match c.kind.as_str() {
        "identity" => CompressorKind::Identity,
        "random_s" => CompressorKind::RandomS { s: s()? },
        "unscaled_random_s" => CompressorKind::UnscaledRandomS { s: s()? },
        "natural" => CompressorKind::Natural,
        "quantize" => CompressorKind::Quantize { levels: c.levels },
        other => {
            return Err(Error::Config(format!(
                "unknown compressor `{other}` (expected identity, random_s, unscaled_random_s, natural or quantize)"
            )))
        }
    };
    Ok(CompressorSpec {
        kind,
        randomness: c.randomness,
        r_bits: c.r_bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[problem]
kind = "least_squares"
n = 4
m = 5
d = 3

[algorithm]
name = "adiana"
eta = 0.01
theta1 = { num = 1.0, offset = 4.0 }
theta2 = 0.2
p = 0.5

[compressor]
kind = "random_s"
s = 1
randomness = "shared"

[run]
rounds = 10
trials = 2
seed = 7
eps = [1e-1, 1e-3]
"#;

    #[test]
    fn parses_full_config() {
        let cfg = ExperimentConfig::parse(FULL).unwrap();
        assert_eq!(cfg.compressor, CompressorSpec::random_s(1, Randomness::Shared));
        assert_eq!(cfg.run.trials, 2);
        match cfg.algorithm {
            AlgorithmSpec::Adiana {
                schedule: ScheduleSpec::Manual(m),
            } => {
                assert_eq!(m.theta1, Sequence::Harmonic { num: 1.0, offset: 4.0 });
                assert_eq!(m.eta, Sequence::Const(0.01));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(cfg.problem, ProblemSpec::LeastSquares { cond, .. } if cond == 100.0));
    }

    #[test]
    fn preset_supplies_problem_and_compressor() {
        let cfg = ExperimentConfig::parse("[algorithm]\npreset = \"cq-adiana-sd-rand1\"\n[run]\nrounds = 5\n").unwrap();
        assert_eq!(cfg.compressor, CompressorSpec::random_s(1, Randomness::Shared));
        assert!(matches!(cfg.problem, ProblemSpec::Constructed { n: 400, .. }));
        assert_eq!(cfg.run.eps, vec![1e-2, 1e-4, 1e-6]);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "[run]\nrounds = 5\n",
            "[problem]\nkind = \"constructed\"\n[algorithm]\nname = \"nesterov\"\neta = 0.1\n[run]\nrounds = 5\n",
            "[problem]\nkind = \"constructed\"\n[algorithm]\nname = \"ef21\"\ngamma = 0.1\n[run]\nrounds = 5\neps = [1e-3, 1e-2]\n",
            "[problem]\nkind = \"constructed\"\nbogus = 1\n[algorithm]\nname = \"ef21\"\ngamma = 0.1\n[run]\nrounds = 5\n",
            "[problem]\nkind = \"constructed\"\n[algorithm]\npreset = \"missing\"\n[run]\nrounds = 5\n",
            "[problem]\nkind = \"constructed\"\n[algorithm]\nname = \"ef21\"\ngamma = 0.1\n[run]\nrounds = 5\ntrials = 0\n",
        ] {
            assert!(matches!(ExperimentConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }
}
