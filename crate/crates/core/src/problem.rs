//! The distributed problem abstraction: `f(x) = (1/n) Σ f_i(x)` with per-worker oracles.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::vector::{axpy, check_dim, DenseVector};

/// Per-worker value and gradient oracles. Implementations must be pure.
pub trait Objective: Send + Sync + fmt::Debug {
    fn workers(&self) -> usize;

    fn dim(&self) -> usize;

    fn local_value(&self, worker: usize, x: &[f64]) -> f64;

    /// Writes `∇f_i(x)` into `out`.
    fn local_grad_into(&self, worker: usize, x: &[f64], out: &mut [f64]);

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.workers();
        (0..n).map(|i| self.local_value(i, x)).sum::<f64>() / n as f64
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.workers();
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut buf = vec![0.0; self.dim()];
        for i in 0..n {
            self.local_grad_into(i, x, &mut buf);
            axpy(out, 1.0, &buf);
        }
        out.iter_mut().for_each(|v| *v /= n as f64);
    }

    /// The Hessian of the averaged objective, when it is a quadratic.
    fn hessian(&self) -> Option<DMatrix<f64>> {
        None
    }
}

/// A problem instance: objectives plus the constants the algorithms are tuned against.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    name: String,
    objective: Arc<dyn Objective>,
    /// Smoothness constant `L` used by parameter schedules.
    pub smoothness: f64,
    /// Largest smoothness constant over the local objectives.
    pub local_smoothness: f64,
    /// Strong convexity constant `μ` (0 for generally convex).
    pub strong_convexity: f64,
    /// Bound `Δ` on `‖x⁰ − x*‖²`.
    pub delta: f64,
    x0: DenseVector,
    f_star: Option<f64>,
    x_star: Option<DenseVector>,
    metadata: Vec<(String, String)>,
}

impl ProblemInstance {
    pub fn new(
        name: impl Into<String>,
        objective: Arc<dyn Objective>,
        smoothness: f64,
        strong_convexity: f64,
        x0: DenseVector,
    ) -> Result<Self> {
        check_dim(objective.dim(), x0.dim())?;
        if !(smoothness > 0.0) || !(strong_convexity >= 0.0) || strong_convexity > smoothness {
            return Err(Error::invalid(format!(
                "need L >= mu >= 0 and L > 0, got L={smoothness}, mu={strong_convexity}"
            )));
        }
        Ok(ProblemInstance {
            name: name.into(),
            objective,
            smoothness,
            local_smoothness: smoothness,
            strong_convexity,
            delta: f64::INFINITY,
            x0,
            f_star: None,
            x_star: None,
            metadata: Vec::new(),
        })
    }

    /// Sets a known minimizer; `f*` and `Δ` follow from it.
    pub fn with_minimizer(mut self, x_star: DenseVector) -> Result<Self> {
        check_dim(self.dim(), x_star.dim())?;
        self.f_star = Some(self.objective.value(&x_star));
        self.delta = self.x0.dist_sq(&x_star);
        self.x_star = Some(x_star);
        Ok(self)
    }

    pub fn with_f_star(mut self, f_star: f64) -> Self {
        self.f_star = Some(f_star);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_local_smoothness(mut self, l: f64) -> Self {
        self.local_smoothness = l;
        self
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.push_meta(key, value);
        self
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective.as_ref()
    }

    pub fn workers(&self) -> usize {
        self.objective.workers()
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn x0(&self) -> &DenseVector {
        &self.x0
    }

    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    pub fn x_star(&self) -> Option<&DenseVector> {
        self.x_star.as_ref()
    }

    pub fn condition_number(&self) -> f64 {
        if self.strong_convexity > 0.0 {
            self.smoothness / self.strong_convexity
        } else {
            f64::INFINITY
        }
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    /// Metadata as `key = value` lines.
    pub fn metadata_text(&self) -> String {
        let mut out = format!("name = {}\nn = {}\nd = {}\nL = {}\nL_local = {}\nmu = {}\ndelta = {}\n",
            self.name, self.workers(), self.dim(), self.smoothness, self.local_smoothness,
            self.strong_convexity, self.delta);
        if let Some(f) = self.f_star {
            out.push_str(&format!("f_star = {f}\n"));
        }
        for (k, v) in &self.metadata {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.objective.value(x))
    }

    pub fn local_value(&self, worker: usize, x: &[f64]) -> f64 {
        self.objective.local_value(worker, x)
    }

    pub fn local_grad_into(&self, worker: usize, x: &[f64], out: &mut [f64]) {
        self.objective.local_grad_into(worker, x, out)
    }

    pub fn local_grad(&self, worker: usize, x: &[f64]) -> DenseVector {
        let mut g = DenseVector::zeros(self.dim());
        self.objective.local_grad_into(worker, x, &mut g);
        g
    }

    /// `(1/n) Σ ∇f_i(x)`.
    pub fn grad_full(&self, x: &[f64]) -> Result<DenseVector> {
        check_dim(self.dim(), x.len())?;
        let mut g = DenseVector::zeros(self.dim());
        self.objective.grad_into(x, &mut g);
        Ok(g)
    }

    /// `f(x) − f*`.
    pub fn suboptimality(&self, x: &[f64]) -> Result<f64> {
        let f_star = self.f_star.ok_or(Error::FStarUnavailable)?;
        Ok(self.value(x)? - f_star)
    }

    /// Computes and caches `f*` with an uncompressed accelerated run when it is not known.
    pub fn precompute_f_star(&mut self) -> f64 {
        if let Some(f) = self.f_star {
            return f;
        }
        let x = reference_minimize(self, 100_000, 1e-12);
        let f = self.objective.value(&x);
        self.f_star = Some(f);
        if self.strong_convexity > 0.0 {
            self.delta = self.x0.dist_sq(&x);
            self.x_star = Some(x);
        }
        f
    }

    /// Estimates `(L, μ)` of the averaged objective.
    ///
    /// Quadratics use power iteration on the Hessian. Other objectives use
    /// curvature probes `⟨∇f(y) − ∇f(x), y − x⟩ / ‖y − x‖²` on `trials` random pairs.
    pub fn estimate_smoothness(&self, trials: usize, seed: u64) -> (f64, f64) {
        if let Some(h) = self.objective.hessian() {
            return extreme_eigenvalues(&h, seed);
        }
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut l_est = 0.0f64;
        let mut mu_est = f64::INFINITY;
        let mut gx = vec![0.0; d];
        let mut gy = vec![0.0; d];
        for _ in 0..trials.max(1) {
            let x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let y: Vec<f64> = x
                .iter()
                .map(|v| v + rng.sample::<f64, _>(StandardNormal))
                .collect();
            self.objective.grad_into(&x, &mut gx);
            self.objective.grad_into(&y, &mut gy);
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..d {
                num += (gy[j] - gx[j]) * (y[j] - x[j]);
                den += (y[j] - x[j]) * (y[j] - x[j]);
            }
            if den > 0.0 {
                l_est = l_est.max(num / den);
                mu_est = mu_est.min(num / den);
            }
        }
        (l_est, mu_est.max(0.0))
    }
}

/// Largest and smallest eigenvalue of a symmetric positive semidefinite matrix
/// by power iteration (the smallest via the shifted matrix `λ_max I − H`).
pub fn extreme_eigenvalues(h: &DMatrix<f64>, seed: u64) -> (f64, f64) {
    let d = h.nrows();
    let lmax = power_iteration(d, seed, |v, out| {
        out.copy_from(&(h * v));
    });
    let shifted = power_iteration(d, seed.wrapping_add(1), |v, out| {
        out.copy_from(&(v * lmax - h * v));
    });
    (lmax, (lmax - shifted).max(0.0))
}

fn power_iteration(
    d: usize,
    seed: u64,
    apply: impl Fn(&nalgebra::DVector<f64>, &mut nalgebra::DVector<f64>),
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = nalgebra::DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    v /= v.norm();
    let mut w = nalgebra::DVector::zeros(d);
    let mut rayleigh = 0.0;
    let mut stable = 0;
    for _ in 0..200_000 {
        apply(&v, &mut w);
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v.copy_from(&w);
        v /= norm;
        if (next - rayleigh).abs() <= 1e-15 * next.abs().max(1e-300) {
            stable += 1;
            if stable >= 20 {
                return next;
            }
        } else {
            stable = 0;
        }
        rayleigh = next;
    }
    rayleigh
}

/// Accelerated gradient descent with adaptive restart, used to obtain reference optima.
pub(crate) fn reference_minimize(problem: &ProblemInstance, max_iter: usize, grad_tol: f64) -> DenseVector {
    let obj = problem.objective();
    let d = problem.dim();
    let step = 1.0 / problem.smoothness;
    let mut x = problem.x0().clone();
    let mut y = x.clone();
    let mut g = DenseVector::zeros(d);
    let mut k = 0usize;
    let mut fx = obj.value(&x);
    for _ in 0..max_iter {
        obj.grad_into(&y, &mut g);
        if g.norm() <= grad_tol {
            x.copy_from_slice(&y);
            break;
        }
        let mut x_next = y.clone();
        x_next.axpy(-step, &g);
        let f_next = obj.value(&x_next);
        if f_next > fx {
            // restart momentum
            k = 0;
            y.copy_from_slice(&x);
            continue;
        }
        let momentum = k as f64 / (k as f64 + 3.0);
        y = x_next.clone();
        for j in 0..d {
            y[j] += momentum * (x_next[j] - x[j]);
        }
        x = x_next;
        fx = f_next;
        k += 1;
    }
    x
}

/// Central finite differences of a local value oracle.
pub fn finite_difference_gradient(obj: &dyn Objective, worker: usize, x: &[f64], h: f64) -> DenseVector {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|j| {
            let orig = xp[j];
            xp[j] = orig + h;
            let fp = obj.local_value(worker, &xp);
            xp[j] = orig - h;
            let fm = obj.local_value(worker, &xp);
            xp[j] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}
