//! Compressed gradient descent with learned per-worker gradient shifts.

use crate::algorithms::{meta, Recorder, RunOptions};
use crate::compressors::CompressorState;
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::trace::Trace;
use crate::vector::{axpy, DenseVector};

/// Runs `x ← x − γ (1/n) Σ (h_i + C_i(∇f_i(x) − h_i))` with `h_i ← h_i + α C_i(∇f_i(x) − h_i)`,
/// starting from zero shifts. `alpha` defaults to `1/(1+ω)`.
pub fn run_diana(
    problem: &ProblemInstance,
    compressor: &CompressorState,
    gamma: f64,
    alpha: Option<f64>,
    opts: &RunOptions,
) -> Result<Trace> {
    let omega = compressor.omega();
    let alpha = alpha.unwrap_or(1.0 / (1.0 + omega));
    if !(gamma > 0.0) || !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("diana needs gamma > 0 and alpha in (0,1]; got gamma={gamma}, alpha={alpha}")));
    }
    let n = problem.workers();
    let d = problem.dim();
    let inv_n = 1.0 / n as f64;
    let mut rec = Recorder::new(problem, meta("diana", compressor, problem), opts)?;
    let mut x = problem.x0().clone();
    let mut shifts = vec![DenseVector::zeros(d); n];
    let (mut grad, mut diff, mut msg, mut g) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut bits = 0.0;
    rec.record(0, 0.0, problem.objective().value(&x), None);
    let mut k = 0;
    while !rec.done(k, bits) {
        g.iter_mut().for_each(|v| *v = 0.0);
        let mut round_bits = 0u64;
        for (i, h_i) in shifts.iter_mut().enumerate() {
            problem.local_grad_into(i, &x, &mut grad);
            for j in 0..d {
                diff[j] = grad[j] - h_i[j];
            }
            round_bits += compressor.compress_into(i, k, 0, &diff, &mut msg)?;
            axpy(&mut g, 1.0, h_i);
            axpy(&mut g, 1.0, &msg);
            axpy(h_i, alpha, &msg);
        }
        axpy(&mut x, -gamma * inv_n, &g);
        bits += round_bits as f64 * inv_n;
        k += 1;
        if rec.due(k, bits) {
            rec.record(k, bits, problem.objective().value(&x), None);
        }
    }
    Ok(rec.finish())
}
