//! Zero-chain hard instances: chain quadratics whose links are spread round-robin over workers,
//! so that a gradient step can extend the support of `x` by at most one coordinate.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lowerbound::{gc_opt_at_prog, prog, sc_floor, PROG_TOL};
use crate::problem::ProblemInstance;
use crate::problems::quadratic::{FormBuilder, QuadraticObjective, QuadraticTerm};
use crate::vector::DenseVector;

/// Target accuracy used to judge whether a truncated strongly convex chain is deep enough.
pub const TRUNCATION_TARGET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardFamily {
    /// Strongly convex chain with links round-robin over workers.
    ScExample1,
    /// Generally convex chain (Dirichlet ends) with links round-robin over workers.
    GcExample1,
    /// `L/2‖x‖²` on every worker plus a dense linear term on the last worker.
    GcExample3,
    /// Every worker holds the same single-worker strongly convex chain.
    ScHomogeneous,
}

impl fmt::Display for HardFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HardFamily::ScExample1 => "sc-example1",
            HardFamily::GcExample1 => "gc-example1",
            HardFamily::GcExample3 => "gc-example3",
            HardFamily::ScHomogeneous => "sc-homogeneous",
        })
    }
}

#[derive(Debug, Clone)]
pub struct HardInstance {
    pub problem: ProblemInstance,
    pub family: HardFamily,
    /// Scale of the linear term.
    pub lambda: f64,
    /// Decay ratio of the minimizer (strongly convex chains).
    pub q: Option<f64>,
}

/// Decay ratio `q = 1 − 2 / (1 + √(1 + 2(κ−1)/n))`.
pub fn chain_decay(kappa: f64, n: usize) -> f64 {
    1.0 - 2.0 / (1.0 + (1.0 + 2.0 * (kappa - 1.0) / n as f64).sqrt())
}

/// Owner (0-based) of the link between 1-based coordinates `j` and `j+1`.
fn link_owner(j: usize, n: usize) -> usize {
    let r = j % n;
    if r == 0 {
        n - 1
    } else {
        r - 1
    }
}

/// Chain terms per worker: worker owning `j ≡ i (mod n)` gets link `(j, j+1)`; the last
/// worker also gets `[x]_1²`. Links past `d` are dropped unless `dirichlet_end` is set, in
/// which case the link `(d, d+1)` becomes `[x]_d²`.
fn chain_forms(d: usize, n: usize, weight: f64, ridge: f64, dirichlet_end: bool) -> Vec<FormBuilder> {
    let mut forms: Vec<FormBuilder> = (0..n).map(|_| FormBuilder::default()).collect();
    for f in forms.iter_mut() {
        f.identity(d, ridge);
    }
    forms[n - 1].square(0, weight);
    for j in 1..d {
        forms[link_owner(j, n)].link(j - 1, j, weight);
    }
    if dirichlet_end {
        forms[link_owner(d, n)].square(d - 1, weight);
    }
    forms
}

fn assemble(forms: Vec<FormBuilder>, linear_worker: usize, linear: DenseVector, d: usize) -> Result<QuadraticObjective> {
    let locals = forms
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            let c = if i == linear_worker {
                linear.clone()
            } else {
                DenseVector::zeros(d)
            };
            Arc::new(QuadraticTerm::new(f.hessian(d), c, 0.0))
        })
        .collect();
    QuadraticObjective::new(locals)
}

/// Strongly convex zero-chain family truncated at depth `d` (free boundary).
pub fn gen_zero_chain_sc(l: f64, mu: f64, n: usize, d: usize, delta: f64) -> Result<HardInstance> {
    if !(l > mu && mu > 0.0) || n == 0 || d < 2 || !(delta > 0.0) {
        return Err(Error::invalid(format!(
            "zero-chain (sc) needs L > mu > 0, n >= 1, d >= 2, delta > 0; got L={l}, mu={mu}, n={n}, d={d}, delta={delta}"
        )));
    }
    sc_chain(l, mu, n, d, delta, HardFamily::ScExample1)
}

/// Every worker holds the single-worker chain (`n = 1` decay) on dimension `d`.
pub fn gen_zero_chain_sc_homogeneous(l: f64, mu: f64, n: usize, d: usize, delta: f64) -> Result<HardInstance> {
    if !(l > mu && mu > 0.0) || n == 0 || d < 2 || !(delta > 0.0) {
        return Err(Error::invalid("zero-chain (homogeneous) needs L > mu > 0, n >= 1, d >= 2, delta > 0"));
    }
    sc_chain(l, mu, n, d, delta, HardFamily::ScHomogeneous)
}

fn sc_chain(l: f64, mu: f64, n: usize, d: usize, delta: f64, family: HardFamily) -> Result<HardInstance> {
    let kappa = l / mu;
    let chain_workers = if family == HardFamily::ScHomogeneous { 1 } else { n };
    let q = chain_decay(kappa, chain_workers);
    let lambda = ((1.0 - q * q) * delta / (q * q)).sqrt();
    let w = (l - mu) / 4.0;
    let mut linear = DenseVector::zeros(d);
    linear[0] = 2.0 * w * lambda;
    let objective = if family == HardFamily::ScHomogeneous {
        let single = chain_forms(d, 1, w, mu / 2.0, false).pop().expect("one worker");
        let term = Arc::new(QuadraticTerm::new(single.hessian(d), linear, 0.0));
        QuadraticObjective::new(vec![term; n])?
    } else {
        assemble(chain_forms(d, n, w, mu / 2.0, false), n - 1, linear, d)?
    };
    let x_star = objective.solve_minimizer()?;
    let mut problem = ProblemInstance::new(family.to_string(), Arc::new(objective), l, mu, DenseVector::zeros(d))?
        .with_minimizer(x_star)?;
    let truncated_delta = problem.delta;
    let depth = (50.0 * (1.0 / TRUNCATION_TARGET).ln() / (1.0 / q).ln()).ceil();
    problem.delta = delta;
    problem.push_meta("family", family);
    problem.push_meta("q", q);
    problem.push_meta("lambda", lambda);
    problem.push_meta("delta_truncation_error", truncated_delta - delta);
    problem.push_meta("depth_required", depth);
    if (d as f64) < depth {
        problem.push_meta(
            "warning",
            format!("truncation depth d={d} is below {depth} needed for eps={TRUNCATION_TARGET}"),
        );
    }
    Ok(HardInstance {
        problem,
        family,
        lambda,
        q: Some(q),
    })
}

/// Generally convex zero-chain family with `λ = √(3Δ/d)`.
pub fn gen_zero_chain_gc(l: f64, n: usize, d: usize, delta: f64) -> Result<HardInstance> {
    if !(l > 0.0) || n == 0 || d < 2 || !(delta > 0.0) {
        return Err(Error::invalid(format!(
            "zero-chain (gc) needs L > 0, n >= 1, d >= 2, delta > 0; got L={l}, n={n}, d={d}, delta={delta}"
        )));
    }
    let lambda = (3.0 * delta / d as f64).sqrt();
    let w = l / 4.0;
    let mut linear = DenseVector::zeros(d);
    linear[0] = 2.0 * w * lambda;
    let objective = assemble(chain_forms(d, n, w, 0.0, true), n - 1, linear, d)?;
    let f_star = -lambda * lambda * l * d as f64 / (4.0 * n as f64 * (d + 1) as f64);
    let x_star: DenseVector = (1..=d).map(|k| lambda * (1.0 - k as f64 / (d + 1) as f64)).collect();
    let mut problem = ProblemInstance::new("gc-example1", Arc::new(objective), l, 0.0, DenseVector::zeros(d))?;
    let delta_exact = x_star.norm_sq();
    problem = problem
        .with_f_star(f_star)
        .with_delta(delta_exact)
        .with_meta("family", HardFamily::GcExample1)
        .with_meta("lambda", lambda);
    let problem = problem.with_minimizer(x_star)?.with_f_star(f_star);
    Ok(HardInstance {
        problem,
        family: HardFamily::GcExample1,
        lambda,
        q: None,
    })
}

/// `L/2‖x‖²` on workers `1..n−1`, plus `nλ⟨1, x⟩` on worker `n`, with `λ = L√(Δ/d)`.
pub fn gen_zero_chain_gc3(l: f64, n: usize, d: usize, delta: f64) -> Result<HardInstance> {
    if !(l > 0.0) || n == 0 || d == 0 || !(delta > 0.0) {
        return Err(Error::invalid("gc-example3 needs L > 0, n >= 1, d >= 1, delta > 0"));
    }
    let lambda = l * (delta / d as f64).sqrt();
    let forms: Vec<FormBuilder> = (0..n)
        .map(|_| {
            let mut f = FormBuilder::default();
            f.identity(d, l / 2.0);
            f
        })
        .collect();
    let linear = DenseVector::filled(d, -(n as f64) * lambda);
    let objective = assemble(forms, n - 1, linear, d)?;
    let x_star = DenseVector::filled(d, -lambda / l);
    let problem = ProblemInstance::new("gc-example3", Arc::new(objective), l, 0.0, DenseVector::zeros(d))?
        .with_minimizer(x_star)?
        .with_meta("family", HardFamily::GcExample3)
        .with_meta("lambda", lambda);
    Ok(HardInstance {
        problem,
        family: HardFamily::GcExample3,
        lambda,
        q: None,
    })
}

impl HardInstance {
    /// Closed-form minimizer of the untruncated construction, restricted to `d` coordinates.
    pub fn closed_form_minimizer(&self) -> DenseVector {
        let d = self.problem.dim();
        match self.family {
            HardFamily::ScExample1 | HardFamily::ScHomogeneous => {
                let q = self.q.expect("strongly convex chains carry q");
                (1..=d).map(|j| self.lambda * q.powi(j as i32)).collect()
            }
            HardFamily::GcExample1 => (1..=d)
                .map(|k| self.lambda * (1.0 - k as f64 / (d + 1) as f64))
                .collect(),
            HardFamily::GcExample3 => DenseVector::filled(d, -self.lambda / self.problem.smoothness),
        }
    }

    /// Lower bound on `f(x) − f*` implied by `prog(x)` for strongly convex chains.
    pub fn suboptimality_floor(&self, x: &[f64]) -> Option<f64> {
        match self.family {
            HardFamily::ScExample1 | HardFamily::ScHomogeneous => {
                let n = if self.family == HardFamily::ScHomogeneous {
                    1
                } else {
                    self.problem.workers()
                };
                Some(sc_floor(
                    prog(x, PROG_TOL),
                    self.problem.strong_convexity,
                    self.problem.condition_number(),
                    n,
                    self.problem.delta,
                ))
            }
            _ => None,
        }
    }

    /// `min_{prog(x) <= k} f(x)` for the generally convex chain.
    pub fn gc_opt_at_prog(&self, k: usize) -> Option<f64> {
        (self.family == HardFamily::GcExample1).then(|| {
            gc_opt_at_prog(k, self.lambda, self.problem.smoothness, self.problem.workers())
        })
    }
}
