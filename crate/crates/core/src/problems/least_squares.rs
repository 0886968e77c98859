//! Distributed least squares with a prescribed singular spectrum.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::problem::{extreme_eigenvalues, ProblemInstance};
use crate::problems::quadratic::{QuadraticObjective, QuadraticTerm, SparseSym};
use crate::vector::DenseVector;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeastSquaresSpec {
    /// Number of workers.
    pub n: usize,
    /// Rows held by each worker.
    pub m: usize,
    pub d: usize,
    /// Condition number of the stacked data matrix; its singular values are
    /// replaced by an arithmetic sequence from 1 to `cond`.
    #[serde(default = "default_cond")]
    pub cond: f64,
    #[serde(default)]
    pub seed: u64,
    /// Draw Gaussian right-hand sides instead of zeros.
    #[serde(default)]
    pub gaussian_rhs: bool,
}

fn default_cond() -> f64 {
    100.0
}

impl LeastSquaresSpec {
    pub fn new(n: usize, m: usize, d: usize, seed: u64) -> Self {
        LeastSquaresSpec {
            n,
            m,
            d,
            cond: default_cond(),
            seed,
            gaussian_rhs: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.d == 0 {
            return Err(Error::invalid("least squares needs n, M, d >= 1"));
        }
        if self.n * self.m < self.d {
            return Err(Error::invalid(format!(
                "least squares needs n*M >= d, got n*M = {} < d = {}",
                self.n * self.m,
                self.d
            )));
        }
        if !(self.cond >= 1.0) {
            return Err(Error::invalid("condition number must be >= 1"));
        }
        Ok(())
    }
}

/// The stacked data matrix with singular values replaced by `linspace(1, cond, d)`.
pub fn conditioned_matrix(spec: &LeastSquaresSpec, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let rows = spec.n * spec.m;
    let g = DMatrix::from_fn(rows, spec.d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let svd = g.svd(true, true);
    let u = svd.u.expect("U requested");
    let v_t = svd.v_t.expect("V requested");
    // nalgebra returns singular values in descending order; keep that pairing.
    let k = spec.d;
    let sigma = DVector::from_fn(k, |i, _| {
        if k == 1 {
            spec.cond
        } else {
            spec.cond - (spec.cond - 1.0) * i as f64 / (k - 1) as f64
        }
    });
    &u * DMatrix::from_diagonal(&sigma) * &v_t
}

/// Builds `f_i(x) = ½‖A_i x − b_i‖²` where worker `i` owns rows `iM .. (i+1)M` of the stacked matrix.
pub fn gen_least_squares(spec: &LeastSquaresSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let g = conditioned_matrix(spec, &mut rng);
    let rows = spec.n * spec.m;
    let b: Vec<f64> = if spec.gaussian_rhs {
        (0..rows).map(|_| rng.sample(StandardNormal)).collect()
    } else {
        vec![0.0; rows]
    };
    // With zero right-hand sides the minimizer is 0, so start from a random point instead.
    let x0: DenseVector = if spec.gaussian_rhs {
        DenseVector::zeros(spec.d)
    } else {
        (0..spec.d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    };

    let mut locals = Vec::with_capacity(spec.n);
    let mut local_l = 0.0f64;
    for i in 0..spec.n {
        let a = g.rows(i * spec.m, spec.m);
        let bi = DVector::from_column_slice(&b[i * spec.m..(i + 1) * spec.m]);
        let q = a.transpose() * a;
        let c = a.transpose() * &bi;
        local_l = local_l.max(extreme_eigenvalues(&q, spec.seed ^ i as u64).0);
        locals.push(Arc::new(QuadraticTerm::new(
            SparseSym::from_dense(&q),
            DenseVector::from_vec(c.as_slice().to_vec()),
            0.5 * bi.norm_squared(),
        )));
    }
    let objective = QuadraticObjective::new(locals)?;
    let x_star = objective.solve_minimizer()?;
    let n = spec.n as f64;
    let l = spec.cond * spec.cond / n;
    let mu = 1.0 / n;
    let problem = ProblemInstance::new("least_squares", Arc::new(objective), l, mu, x0)?
        .with_minimizer(x_star)?
        .with_local_smoothness(local_l)
        .with_meta("M", spec.m)
        .with_meta("cond", spec.cond)
        .with_meta("seed", spec.seed)
        .with_meta("gaussian_rhs", spec.gaussian_rhs);
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_underdetermined() {
        let spec = LeastSquaresSpec::new(2, 1, 3, 0);
        assert!(gen_least_squares(&spec).is_err());
    }

    #[test]
    fn spectrum_is_arithmetic() {
        let spec = LeastSquaresSpec::new(10, 5, 4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let g = conditioned_matrix(&spec, &mut rng);
        let mut s: Vec<f64> = g.singular_values().iter().copied().collect();
        s.sort_by(f64::total_cmp);
        for (got, want) in s.iter().zip([1.0, 34.0, 67.0, 100.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }
}
