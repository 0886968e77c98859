//! Error-feedback compressed gradient descent.

use crate::algorithms::{meta, Recorder, RunOptions};
use crate::compressors::CompressorState;
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::trace::Trace;
use crate::vector::{axpy, DenseVector};

/// Runs `g_i ← g_i + C_i(∇f_i(x) − g_i)`, `x ← x − γ (1/n) Σ g_i` from `g_i = 0`, so the first
/// round transmits `C_i(∇f_i(x⁰))`. Intended for the unscaled random-`s` compressor.
pub fn run_ef21(problem: &ProblemInstance, compressor: &CompressorState, gamma: f64, opts: &RunOptions) -> Result<Trace> {
    if !(gamma > 0.0) {
        return Err(Error::invalid(format!("ef21 needs gamma > 0, got {gamma}")));
    }
    let n = problem.workers();
    let d = problem.dim();
    let inv_n = 1.0 / n as f64;
    let mut rec = Recorder::new(problem, meta("ef21", compressor, problem), opts)?;
    let mut x = problem.x0().clone();
    let mut states = vec![DenseVector::zeros(d); n];
    let mut g = DenseVector::zeros(d);
    let (mut grad, mut diff, mut msg) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut bits = 0.0;
    rec.record(0, 0.0, problem.objective().value(&x), None);
    let mut k = 0;
    while !rec.done(k, bits) {
        let mut round_bits = 0u64;
        for (i, g_i) in states.iter_mut().enumerate() {
            problem.local_grad_into(i, &x, &mut grad);
            for j in 0..d {
                diff[j] = grad[j] - g_i[j];
            }
            round_bits += compressor.compress_into(i, k, 0, &diff, &mut msg)?;
            axpy(g_i, 1.0, &msg);
            axpy(&mut g, inv_n, &msg);
        }
        axpy(&mut x, -gamma, &g);
        bits += round_bits as f64 * inv_n;
        k += 1;
        if rec.due(k, bits) {
            rec.record(k, bits, problem.objective().value(&x), None);
        }
    }
    Ok(rec.finish())
}
