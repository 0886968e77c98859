//! Deterministic grid search over algorithm parameters on a truncated horizon.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::algorithms::{AlgorithmSpec, ScheduleSpec, Sequence};
use crate::error::{Error, Result};
use crate::harness::{run_trials, summarize, ExperimentConfig};
use crate::problem::ProblemInstance;

/// Candidate values of one parameter.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridAxis {
    Values(Vec<f64>),
    /// `points` log-spaced values from `min` to `max` inclusive.
    Log { min: f64, max: f64, points: usize },
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            GridAxis::Values(ref v) => v.clone(),
            GridAxis::Log { min, max, points } => {
                if points <= 1 {
                    return vec![min];
                }
                let (a, b) = (min.ln(), max.ln());
                (0..points)
                    .map(|i| match i {
                        0 => min,
                        i if i == points - 1 => max,
                        i => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
                    })
                    .collect()
            }
        }
    }
}

/// Parameter name to candidate values; points are the Cartesian product.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
pub struct GridSpec {
    #[serde(default)]
    pub budget_fraction: Option<f64>,
    #[serde(flatten)]
    pub axes: BTreeMap<String, GridAxis>,
}

impl GridSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("grid: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn axis(mut self, name: &str, axis: GridAxis) -> Self {
        self.axes.insert(name.to_string(), axis);
        self
    }

    /// All grid points as `(name, value)` lists in name order.
    pub fn points(&self) -> Vec<Vec<(String, f64)>> {
        let mut out: Vec<Vec<(String, f64)>> = vec![Vec::new()];
        for (name, axis) in &self.axes {
            let vals = axis.values();
            out = out
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push((name.clone(), v));
                        q
                    })
                })
                .collect();
        }
        out
    }
}

/// Overrides named parameters of `base`.
pub fn apply_point(base: &AlgorithmSpec, point: &[(String, f64)]) -> Result<AlgorithmSpec> {
    let mut spec = base.clone();
    for (name, v) in point {
        let v = *v;
        let ok = match (&mut spec, name.as_str()) {
            (AlgorithmSpec::Nesterov { eta, .. }, "eta") => {
                *eta = v;
                true
            }
            (AlgorithmSpec::Nesterov { theta, .. }, "theta") => {
                *theta = v;
                true
            }
            (AlgorithmSpec::Diana { gamma, .. } | AlgorithmSpec::Ef21 { gamma }, "gamma") => {
                *gamma = v;
                true
            }
            (AlgorithmSpec::Diana { alpha, .. }, "alpha") => {
                *alpha = Some(v);
                true
            }
            (
                AlgorithmSpec::Adiana {
                    schedule: ScheduleSpec::Manual(m),
                },
                field,
            ) => match field {
                "eta" => {
                    m.eta = Sequence::Const(v);
                    true
                }
                "theta1" => {
                    m.theta1 = Sequence::Const(v);
                    true
                }
                "theta2" => {
                    m.theta2 = v;
                    true
                }
                "p" => {
                    m.p = v;
                    true
                }
                "alpha" => {
                    m.alpha = Some(v);
                    true
                }
                _ => false,
            },
            _ => false,
        };
        if !ok {
            return Err(Error::Config(format!("parameter `{name}` is not tunable for `{}`", base.id())));
        }
    }
    Ok(spec)
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridEval {
    pub point: Vec<(String, f64)>,
    pub algorithm: AlgorithmSpec,
    /// Trial-mean suboptimality at the end of the horizon; `None` if a trial diverged.
    pub final_subopt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub best: GridEval,
    pub rounds: usize,
    pub evaluations: Vec<GridEval>,
}

fn rank(a: &GridEval, b: &GridEval) -> Ordering {
    let fa = a.final_subopt.unwrap_or(f64::INFINITY);
    let fb = b.final_subopt.unwrap_or(f64::INFINITY);
    fa.total_cmp(&fb)
        .then(a.algorithm.step_size().total_cmp(&b.algorithm.step_size()))
        .then_with(|| {
            a.point
                .iter()
                .zip(&b.point)
                .map(|((_, x), (_, y))| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

/// Builds the configured problem and tunes on it; see [`tune_grid_on`].
pub fn tune_grid(config: &ExperimentConfig, grid: &GridSpec, budget_fraction: Option<f64>) -> Result<TuneResult> {
    let problem = config.problem.build()?;
    tune_grid_on(&problem, config, grid, budget_fraction)
}

/// Runs every grid point for `⌈fraction · T⌉` rounds and returns the one with the smallest
/// trial-mean final suboptimality; ties go to the smaller step size, then to the
/// lexicographically smaller parameter vector.
pub fn tune_grid_on(
    problem: &ProblemInstance,
    config: &ExperimentConfig,
    grid: &GridSpec,
    budget_fraction: Option<f64>,
) -> Result<TuneResult> {
    let fraction = budget_fraction.or(grid.budget_fraction).unwrap_or(config.run.budget_fraction);
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("budget fraction must lie in (0, 1], got {fraction}")));
    }
    let rounds = ((config.run.rounds as f64 * fraction).ceil() as usize).max(1);
    let mut opts = config.run.options();
    opts.rounds = rounds;
    opts.max_bits = None;
    opts.lyapunov = false;
    let mut evaluations = Vec::new();
    for point in grid.points() {
        let algorithm = apply_point(&config.algorithm, &point)?;
        let traces = run_trials(problem, &algorithm, &config.compressor, &opts, config.run.trials, config.run.seed);
        let final_subopt = match traces {
            Ok(traces) if !traces.iter().any(|t| t.diverged) => summarize(&traces).last().map(|r| r.subopt_mean),
            Ok(_) => None,
            // Parameters outside the schedule's domain count as divergent.
            Err(Error::Schedule { .. }) | Err(Error::InvalidParameter(_)) => None,
            Err(e) => return Err(e),
        };
        evaluations.push(GridEval {
            point,
            algorithm,
            final_subopt,
        });
    }
    let best = evaluations
        .iter()
        .filter(|e| e.final_subopt.is_some())
        .min_by(|a, b| rank(a, b))
        .cloned()
        .ok_or_else(|| {
            let listing: Vec<String> = evaluations
                .iter()
                .map(|e| {
                    let kv: Vec<String> = e.point.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    format!("{{{}}}", kv.join(", "))
                })
                .collect();
            Error::AllDiverged(listing.join(" "))
        })?;
    Ok(TuneResult {
        best,
        rounds,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_axis_endpoints() {
        let v = GridAxis::Log {
            min: 1e-3,
            max: 1e-1,
            points: 3,
        }
        .values();
        assert!((v[0] - 1e-3).abs() < 1e-15 && (v[1] - 1e-2).abs() < 1e-15 && (v[2] - 1e-1).abs() < 1e-14);
    }

    #[test]
    fn grid_file_parses() {
        let g = GridSpec::parse("budget_fraction = 0.5\neta = [1.0, 2.0]\ntheta = { min = 0.01, max = 1.0, points = 3 }\n").unwrap();
        assert_eq!(g.budget_fraction, Some(0.5));
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0][0].0, "eta");
        assert_eq!(pts[0][1].0, "theta");
    }

    #[test]
    fn unknown_parameter_rejected() {
        let base = AlgorithmSpec::Ef21 { gamma: 1.0 };
        assert!(apply_point(&base, &[("theta".into(), 0.1)]).is_err());
        let tuned = apply_point(&base, &[("gamma".into(), 0.5)]).unwrap();
        assert_eq!(tuned, AlgorithmSpec::Ef21 { gamma: 0.5 });
    }
}
