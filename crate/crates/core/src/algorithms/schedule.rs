//! Per-round ADIANA parameters: the two theory-driven schedules and hand-tuned manual ones.

use serde::Deserialize;

use crate::error::{Error, Result};

/// Parameters in force during one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundParams {
    pub eta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    StronglyConvex,
    GenerallyConvex,
    Manual,
}

/// A scalar sequence indexed by the round `k`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Sequence {
    Const(f64),
    /// `num / (k + offset)`.
    Harmonic { num: f64, offset: f64 },
    /// `min((k + offset) / scale, cap)`.
    Ramp { offset: f64, scale: f64, cap: f64 },
}

impl Sequence {
    pub fn at(&self, k: usize) -> f64 {
        let k = k as f64;
        match *self {
            Sequence::Const(v) => v,
            Sequence::Harmonic { num, offset } => num / (k + offset),
            Sequence::Ramp { offset, scale, cap } => ((k + offset) / scale).min(cap),
        }
    }
}

impl From<f64> for Sequence {
    fn from(v: f64) -> Self {
        Sequence::Const(v)
    }
}

/// Manually chosen parameters. `beta` and `gamma` default to
/// `2θ₁/(2θ₁+ημ)` and `η/(2θ₁+ημ)`; `alpha` defaults to `1/(1+ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManualParams {
    pub eta: Sequence,
    pub theta1: Sequence,
    pub theta2: f64,
    pub p: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Constant(RoundParams),
    GenerallyConvex { l: f64, n: usize, omega: f64 },
    Manual { params: ManualParams, alpha: f64, mu: f64 },
}

/// A per-round parameter schedule for ADIANA.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSchedule {
    kind: Kind,
    l: f64,
}

impl ParamSchedule {
    /// Strongly convex schedule: constant parameters driven by `κ = L/μ`, `n` and `ω`.
    pub fn strongly_convex(l: f64, mu: f64, n: usize, omega: f64) -> Result<Self> {
        if !(mu > 0.0) || !(l >= mu) || n == 0 {
            return Err(Error::invalid(format!("strongly convex schedule needs L >= mu > 0, n >= 1; got L={l}, mu={mu}, n={n}")));
        }
        if !(omega > 0.0) {
            return Err(Error::invalid(
                "strongly convex schedule needs omega > 0; run lossless compressors through a manual schedule or Nesterov",
            ));
        }
        let nf = n as f64;
        let kappa = l / mu;
        let theta1 = 1.0 / (3.0 * kappa.sqrt());
        let theta2 = 1.0 / (3.0 * nf.sqrt() + 3.0 * nf / omega);
        let eta = nf * theta2 / (120.0 * omega * l);
        let alpha = 1.0 / (1.0 + omega);
        let denom = 2.0 * theta1 + eta * mu;
        let params = RoundParams {
            eta,
            theta1,
            theta2,
            alpha,
            beta: 2.0 * theta1 / denom,
            gamma: eta / denom,
            p: alpha,
        };
        Ok(ParamSchedule {
            kind: Kind::Constant(params),
            l,
        })
    }

    /// Generally convex schedule with increasing step sizes.
    pub fn generally_convex(l: f64, n: usize, omega: f64) -> Result<Self> {
        if !(l > 0.0) || n == 0 || !(omega >= 0.0) {
            return Err(Error::invalid(format!("generally convex schedule needs L > 0, n >= 1, omega >= 0; got L={l}, n={n}, omega={omega}")));
        }
        Ok(ParamSchedule {
            kind: Kind::GenerallyConvex { l, n, omega },
            l,
        })
    }

    /// Manual parameters; `mu` is the problem's strong convexity and `omega` the compressor's.
    pub fn manual(params: ManualParams, l: f64, mu: f64, omega: f64) -> Self {
        ParamSchedule {
            kind: Kind::Manual {
                params,
                alpha: params.alpha.unwrap_or(1.0 / (1.0 + omega)),
                mu,
            },
            l,
        }
    }

    pub fn regime(&self) -> Regime {
        match self.kind {
            Kind::Constant(_) => Regime::StronglyConvex,
            Kind::GenerallyConvex { .. } => Regime::GenerallyConvex,
            Kind::Manual { .. } => Regime::Manual,
        }
    }

    /// Parameters for round `k`.
    pub fn at(&self, k: usize) -> RoundParams {
        match &self.kind {
            Kind::Constant(p) => *p,
            Kind::GenerallyConvex { l, n, omega } => gc_params(*l, *n, *omega, k),
            Kind::Manual { params, alpha, mu } => {
                let eta = params.eta.at(k);
                let theta1 = params.theta1.at(k);
                let denom = 2.0 * theta1 + eta * mu;
                RoundParams {
                    eta,
                    theta1,
                    theta2: params.theta2,
                    alpha: *alpha,
                    beta: params.beta.unwrap_or(2.0 * theta1 / denom),
                    gamma: params.gamma.unwrap_or(eta / denom),
                    p: params.p,
                }
            }
        }
    }

    /// Parameters for round `k`, checked against the schedule invariants.
    ///
    /// The step-size cap `η ≤ 1/(2L)` is enforced for the theory-driven schedules only.
    pub fn checked(&self, k: usize) -> Result<RoundParams> {
        let p = self.at(k);
        let fail = |reason: String| Err(Error::Schedule { round: k, reason });
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(p.theta1) || !open_unit(p.theta2) || !open_unit(1.0 - p.theta1 - p.theta2) {
            return fail(format!("need theta1, theta2, 1-theta1-theta2 in (0,1); got theta1={}, theta2={}", p.theta1, p.theta2));
        }
        if !(p.eta > 0.0) || !p.eta.is_finite() {
            return fail(format!("eta must be positive, got {}", p.eta));
        }
        if self.regime() != Regime::Manual && p.eta > 0.5 / self.l * (1.0 + 1e-12) {
            return fail(format!("eta={} exceeds 1/(2L)={}", p.eta, 0.5 / self.l));
        }
        if !(p.alpha > 0.0 && p.alpha <= 1.0) || !(p.p > 0.0 && p.p <= 1.0) {
            return fail(format!("need alpha, p in (0,1]; got alpha={}, p={}", p.alpha, p.p));
        }
        if !(p.gamma > 0.0) || !p.gamma.is_finite() || !(p.beta > 0.0 && p.beta <= 1.0) {
            return fail(format!("need gamma > 0 and beta in (0,1]; got gamma={}, beta={}", p.gamma, p.beta));
        }
        Ok(p)
    }
}

fn gc_params(l: f64, n: usize, omega: f64, k: usize) -> RoundParams {
    let a = 1.0 + omega;
    let kf = k as f64;
    let theta1 = 9.0 / (kf + 27.0 * a);
    let ramp = (kf + 1.0 + 27.0 * a) / (9.0 * a * a * (1.0 + 27.0 * a) * l);
    let variance_cap = if omega > 0.0 {
        3.0 * n as f64 / (200.0 * omega * a * l)
    } else {
        f64::INFINITY
    };
    let eta = ramp.min(variance_cap).min(0.5 / l);
    let theta2 = 1.0 / (3.0 * a);
    RoundParams {
        eta,
        theta1,
        theta2,
        alpha: 1.0 / a,
        beta: 1.0,
        gamma: eta / (2.0 * theta1),
        p: theta2,
    }
}
