//! Two-family chain quadratic where odd and even links of a chain live on different halves of the workers.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::problems::quadratic::{FormBuilder, QuadraticObjective, QuadraticTerm};
use crate::vector::DenseVector;

/// Builds the instance. Workers `i <= n/2` hold
/// `μ/2‖x‖² + (L−μ)/4 ([x]_1² + Σ_r ([x]_{2r} − [x]_{2r+1})² + [x]_d² − 2[x]_1)`,
/// the other half hold `μ/2‖x‖² + (L−μ)/4 Σ_r ([x]_{2r−1} − [x]_{2r})²`.
pub fn gen_constructed_quadratic(mu: f64, l: f64, d: usize, n: usize) -> Result<ProblemInstance> {
    if d % 2 != 0 || n % 2 != 0 || d == 0 || n == 0 {
        return Err(Error::invalid(format!(
            "constructed quadratic needs even positive d and n, got d={d}, n={n}"
        )));
    }
    if !(mu > 0.0 && l >= mu) {
        return Err(Error::invalid(format!("need L >= mu > 0, got L={l}, mu={mu}")));
    }
    let w = (l - mu) / 4.0;

    let mut odd = FormBuilder::default();
    odd.identity(d, mu / 2.0);
    odd.square(0, w);
    for r in 1..d / 2 {
        odd.link(2 * r - 1, 2 * r, w);
    }
    odd.square(d - 1, w);
    let mut c = DenseVector::zeros(d);
    c[0] = 2.0 * w;
    let first = Arc::new(QuadraticTerm::new(odd.hessian(d), c, 0.0));

    let mut even = FormBuilder::default();
    even.identity(d, mu / 2.0);
    for r in 1..=d / 2 {
        even.link(2 * r - 2, 2 * r - 1, w);
    }
    let second = Arc::new(QuadraticTerm::new(even.hessian(d), DenseVector::zeros(d), 0.0));

    let locals = (0..n)
        .map(|i| if i < n / 2 { first.clone() } else { second.clone() })
        .collect();
    let objective = QuadraticObjective::new(locals)?;
    let x_star = objective.solve_minimizer()?;
    ProblemInstance::new("constructed", Arc::new(objective), l, mu, DenseVector::zeros(d))?
        .with_minimizer(x_star)
}
