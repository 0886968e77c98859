//! Uncompressed distributed accelerated gradient method.

use crate::algorithms::{Recorder, RunOptions};
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::trace::{Trace, TraceMeta};

/// Runs `y = (1−θ)x + θz`, `x⁺ = y − η∇f(y)`, `z⁺ = x + (x⁺ − x)/θ` from `x = z = x⁰`.
/// Every worker sends its full gradient each round (`r·d` bits).
pub fn run_nesterov(problem: &ProblemInstance, eta: f64, theta: f64, r_bits: u32, opts: &RunOptions) -> Result<Trace> {
    if !(eta > 0.0) || !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::invalid(format!("nesterov needs eta > 0 and theta in (0,1]; got eta={eta}, theta={theta}")));
    }
    let d = problem.dim();
    let meta = TraceMeta {
        algorithm: "nesterov".into(),
        compressor: "identity".into(),
        omega: 0.0,
        n: problem.workers(),
        d,
        seed: 0,
        trial: 0,
    };
    let mut rec = Recorder::new(problem, meta, opts)?;
    let per_round = f64::from(r_bits) * d as f64;
    let mut x = problem.x0().clone();
    let mut z = x.clone();
    let mut y = vec![0.0; d];
    let mut grad = vec![0.0; d];
    let mut bits = 0.0;
    rec.record(0, 0.0, problem.objective().value(&x), None);
    let mut k = 0;
    while !rec.done(k, bits) {
        for j in 0..d {
            y[j] = (1.0 - theta) * x[j] + theta * z[j];
        }
        problem.objective().grad_into(&y, &mut grad);
        for j in 0..d {
            let next = y[j] - eta * grad[j];
            z[j] = x[j] + (next - x[j]) / theta;
            x[j] = next;
        }
        bits += per_round;
        k += 1;
        if rec.due(k, bits) {
            rec.record(k, bits, problem.objective().value(&x), None);
        }
    }
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::constructed::gen_constructed_quadratic;

    #[test]
    fn theta_one_is_gradient_descent() {
        let problem = gen_constructed_quadratic(1.0, 10.0, 4, 2).unwrap();
        let eta = 0.05;
        let trace = run_nesterov(&problem, eta, 1.0, 64, &RunOptions::new(3)).unwrap();
        let mut x = problem.x0().clone();
        for k in 1..=3 {
            let g = problem.grad_full(&x).unwrap();
            x.axpy(-eta, &g);
            let expected = problem.suboptimality(&x).unwrap();
            assert!((trace.records()[k].subopt - expected).abs() < 1e-14);
        }
        assert_eq!(trace.last().unwrap().bits_cum, 3.0 * 64.0 * 4.0);
    }

    #[test]
    fn accelerated_rate_on_ill_conditioned_quadratic() {
        let problem = gen_constructed_quadratic(1.0, 1e4, 20, 4).unwrap();
        let l = problem.smoothness;
        let theta = 1.0 / problem.condition_number().sqrt();
        let trace = run_nesterov(&problem, 1.0 / l, theta, 64, &RunOptions::new(3000)).unwrap();
        assert!(trace.final_subopt() < 1e-6, "{}", trace.final_subopt());
    }
}
