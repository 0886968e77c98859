//! Accelerated compressed-gradient method with per-worker gradient shifts and a randomly
//! refreshed anchor point.

use rand::Rng;

use crate::algorithms::schedule::{ParamSchedule, RoundParams};
use crate::algorithms::{meta, Recorder, RunOptions};
use crate::compressors::CompressorState;
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::trace::Trace;
use crate::vector::{axpy, check_dim, DenseVector};

/// Server iterates and worker shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct AdianaState {
    pub x: DenseVector,
    pub y: DenseVector,
    pub z: DenseVector,
    pub w: DenseVector,
    /// Server copy of the average shift.
    pub h: DenseVector,
    /// Per-worker shifts `h_i`.
    pub shifts: Vec<DenseVector>,
    pub round: usize,
    /// `∇f_i(w)` for every worker, refreshed whenever `w` moves.
    grad_w: Vec<DenseVector>,
    value_w: f64,
}

impl AdianaState {
    /// All iterates at `x⁰`, all shifts zero.
    pub fn new(problem: &ProblemInstance) -> Self {
        let d = problem.dim();
        let shifts = vec![DenseVector::zeros(d); problem.workers()];
        Self::with_shifts(problem, shifts).expect("zero shifts have the problem dimension")
    }

    /// All iterates at `x⁰` with the given worker shifts; the server shift is their mean.
    pub fn with_shifts(problem: &ProblemInstance, shifts: Vec<DenseVector>) -> Result<Self> {
        let n = problem.workers();
        let d = problem.dim();
        if shifts.len() != n {
            return Err(Error::invalid(format!("expected {n} shifts, got {}", shifts.len())));
        }
        let mut h = DenseVector::zeros(d);
        for s in &shifts {
            check_dim(d, s.dim())?;
            axpy(&mut h, 1.0 / n as f64, s);
        }
        let x0 = problem.x0().clone();
        let mut state = AdianaState {
            x: x0.clone(),
            y: x0.clone(),
            z: x0.clone(),
            w: x0,
            h,
            shifts,
            round: 0,
            grad_w: Vec::new(),
            value_w: 0.0,
        };
        state.refresh_anchor(problem);
        Ok(state)
    }

    /// Starts from `x⁰` with `h_i = ∇f_i(x⁰)`.
    pub fn with_local_gradient_shifts(problem: &ProblemInstance) -> Self {
        let shifts = (0..problem.workers()).map(|i| problem.local_grad(i, problem.x0())).collect();
        Self::with_shifts(problem, shifts).expect("gradients have the problem dimension")
    }

    fn refresh_anchor(&mut self, problem: &ProblemInstance) {
        self.grad_w = (0..problem.workers()).map(|i| problem.local_grad(i, &self.w)).collect();
        self.value_w = problem.objective().value(&self.w);
    }

    /// The output rule: `w` if `f(w) <= f(y)`, else `y`, with its objective value.
    pub fn output(&self, problem: &ProblemInstance) -> (&DenseVector, f64) {
        let fy = problem.objective().value(&self.y);
        if self.value_w <= fy {
            (&self.w, self.value_w)
        } else {
            (&self.y, fy)
        }
    }

    /// `max_j |h_j − (1/n) Σ_i h_i,j|`.
    pub fn shift_gap(&self) -> f64 {
        let n = self.shifts.len() as f64;
        (0..self.h.dim())
            .map(|j| {
                let mean: f64 = self.shifts.iter().map(|s| s[j]).sum::<f64>() / n;
                (self.h[j] - mean).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Scratch buffers reused across rounds.
#[derive(Debug)]
struct Buffers {
    grad: Vec<f64>,
    diff: Vec<f64>,
    msg: Vec<f64>,
    m_sum: Vec<f64>,
    c_sum: Vec<f64>,
}

impl Buffers {
    fn new(d: usize) -> Self {
        Buffers {
            grad: vec![0.0; d],
            diff: vec![0.0; d],
            msg: vec![0.0; d],
            m_sum: vec![0.0; d],
            c_sum: vec![0.0; d],
        }
    }
}

/// Executes one round and returns the per-worker bits it cost (averaged over workers).
///
/// The schedule is validated before any state changes.
pub fn adiana_round(
    state: &mut AdianaState,
    problem: &ProblemInstance,
    compressor: &CompressorState,
    schedule: &ParamSchedule,
) -> Result<f64> {
    let mut buf = Buffers::new(problem.dim());
    round_with(state, problem, compressor, schedule, &mut buf)
}

fn round_with(
    state: &mut AdianaState,
    problem: &ProblemInstance,
    compressor: &CompressorState,
    schedule: &ParamSchedule,
    buf: &mut Buffers,
) -> Result<f64> {
    let k = state.round;
    let p = schedule.checked(k)?;
    check_dim(problem.dim(), compressor.dim())?;
    let n = problem.workers();
    let inv_n = 1.0 / n as f64;

    let rest = 1.0 - p.theta1 - p.theta2;
    for j in 0..state.x.dim() {
        state.x[j] = p.theta1 * state.z[j] + p.theta2 * state.w[j] + rest * state.y[j];
    }

    buf.m_sum.iter_mut().for_each(|v| *v = 0.0);
    buf.c_sum.iter_mut().for_each(|v| *v = 0.0);
    let mut bits = 0u64;
    for i in 0..n {
        let h_i = &mut state.shifts[i];
        problem.local_grad_into(i, &state.x, &mut buf.grad);
        for j in 0..buf.diff.len() {
            buf.diff[j] = buf.grad[j] - h_i[j];
        }
        bits += compressor.compress_into(i, k, 0, &buf.diff, &mut buf.msg)?;
        axpy(&mut buf.m_sum, 1.0, &buf.msg);

        let gw = &state.grad_w[i];
        for j in 0..buf.diff.len() {
            buf.diff[j] = gw[j] - h_i[j];
        }
        bits += compressor.compress_into(i, k, 1, &buf.diff, &mut buf.msg)?;
        axpy(&mut buf.c_sum, 1.0, &buf.msg);
        axpy(h_i, p.alpha, &buf.msg);
    }

    // g = h + mean(m_i), stored in `grad`.
    for j in 0..buf.grad.len() {
        buf.grad[j] = state.h[j] + inv_n * buf.m_sum[j];
    }
    axpy(&mut state.h, p.alpha * inv_n, &buf.c_sum);

    let step = p.gamma / p.eta;
    for j in 0..state.x.dim() {
        let x = state.x[j];
        let y_next = x - p.eta * buf.grad[j];
        state.z[j] = p.beta * state.z[j] + (1.0 - p.beta) * x + step * (y_next - x);
        // The anchor candidate is the previous y; keep it in `diff` until the draw.
        buf.diff[j] = state.y[j];
        state.y[j] = y_next;
    }

    if compressor.server_rng(k).random::<f64>() < p.p {
        state.w.copy_from_slice(&buf.diff);
        state.refresh_anchor(problem);
    }
    state.round += 1;
    Ok(bits as f64 * inv_n)
}

/// `Ψ = λW + (2γβ/θ₁)Y + Z + (10ηω(1+ω)γβ/(θ₁n))H` with
/// `λ = (γβ/(pθ₁))(θ₁ + θ₂ − p + √((p − θ₁ − θ₂)² + 4pθ₂))`.
pub fn lyapunov(state: &AdianaState, params: &RoundParams, omega: f64, problem: &ProblemInstance) -> Result<f64> {
    let f_star = problem.f_star().ok_or(Error::FStarUnavailable)?;
    let x_star = problem.x_star().ok_or(Error::XStarUnavailable)?;
    let RoundParams {
        eta,
        theta1,
        beta,
        gamma,
        ..
    } = *params;
    let n = problem.workers() as f64;
    let lambda = lyapunov_lambda(params);
    let w_gap = state.value_w - f_star;
    let y_gap = problem.objective().value(&state.y) - f_star;
    let z_gap = state.z.dist_sq(x_star);
    let h_gap = state
        .shifts
        .iter()
        .zip(&state.grad_w)
        .map(|(h, g)| h.dist_sq(g))
        .sum::<f64>()
        / n;
    Ok(lambda * w_gap
        + 2.0 * gamma * beta / theta1 * y_gap
        + z_gap
        + 10.0 * eta * omega * (1.0 + omega) * gamma * beta / (theta1 * n) * h_gap)
}

/// The weight `λ` of the anchor gap in the Lyapunov function.
pub fn lyapunov_lambda(params: &RoundParams) -> f64 {
    let RoundParams {
        theta1,
        theta2,
        beta,
        gamma,
        p,
        ..
    } = *params;
    let s = theta1 + theta2;
    gamma * beta / (p * theta1) * (s - p + ((p - s).powi(2) + 4.0 * p * theta2).sqrt())
}

/// Runs `opts.rounds` rounds from [`AdianaState::new`].
pub fn run_adiana(
    problem: &ProblemInstance,
    compressor: &CompressorState,
    schedule: &ParamSchedule,
    opts: &RunOptions,
) -> Result<Trace> {
    run_adiana_from(AdianaState::new(problem), problem, compressor, schedule, opts)
}

pub fn run_adiana_from(
    mut state: AdianaState,
    problem: &ProblemInstance,
    compressor: &CompressorState,
    schedule: &ParamSchedule,
    opts: &RunOptions,
) -> Result<Trace> {
    let mut rec = Recorder::new(problem, meta("adiana", compressor, problem), opts)?;
    let omega = compressor.omega();
    let mut buf = Buffers::new(problem.dim());
    let mut bits = 0.0;
    let lyap = |state: &AdianaState, k: usize| -> Result<Option<f64>> {
        if opts.lyapunov {
            lyapunov(state, &schedule.at(k), omega, problem).map(Some)
        } else {
            Ok(None)
        }
    };
    rec.record(0, 0.0, state.output(problem).1, lyap(&state, 0)?);
    let mut k = 0;
    while !rec.done(k, bits) {
        bits += round_with(&mut state, problem, compressor, schedule, &mut buf)?;
        k += 1;
        if rec.due(k, bits) {
            let value = state.output(problem).1;
            rec.record(k, bits, value, lyap(&state, k)?);
        }
    }
    Ok(rec.finish())
}
