//! Quadratic local objectives `f_i(x) = ½ xᵀQ_i x − c_iᵀx + e_i` with sparse Hessians.
//!
//! Sparse products keep structural zeros exact, which the zero-chain instances rely on.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::Objective;
use crate::vector::{dot, DenseVector};

/// Symmetric matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// Builds from `(row, col, value)` entries; duplicates are summed, zeros dropped.
    pub fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut m = SparseSym { dim, row_ptr, cols, vals };
        m.drop_zeros();
        m
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let d = m.nrows();
        let mut entries = Vec::new();
        for r in 0..d {
            for c in 0..d {
                let v = m[(r, c)];
                if v != 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        Self::from_triplets(d, entries)
    }

    fn drop_zeros(&mut self) {
        let mut row_ptr = vec![0; self.dim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k] != 0.0 {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    /// `xᵀ Q x`
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for r in 0..self.dim {
            if x[r] == 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            total += x[r] * acc;
        }
        total
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }
}

/// One quadratic `½ xᵀQx − cᵀx + e`.
#[derive(Debug, Clone)]
pub struct QuadraticTerm {
    pub hessian: Arc<SparseSym>,
    pub linear: DenseVector,
    pub constant: f64,
}

impl QuadraticTerm {
    pub fn new(hessian: SparseSym, linear: DenseVector, constant: f64) -> Self {
        QuadraticTerm {
            hessian: Arc::new(hessian),
            linear,
            constant,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.hessian.quad_form(x) - dot(&self.linear, x) + self.constant
    }

    pub fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        self.hessian.mul_into(x, out);
        for (o, c) in out.iter_mut().zip(self.linear.iter()) {
            *o -= c;
        }
    }
}

/// Per-worker quadratics together with their average.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    locals: Vec<Arc<QuadraticTerm>>,
    average: QuadraticTerm,
}

impl QuadraticObjective {
    pub fn new(locals: Vec<Arc<QuadraticTerm>>) -> Result<Self> {
        let n = locals.len();
        if n == 0 {
            return Err(Error::invalid("at least one worker is required"));
        }
        let d = locals[0].hessian.dim();
        let mut entries = Vec::new();
        let mut linear = DenseVector::zeros(d);
        let mut constant = 0.0;
        let w = 1.0 / n as f64;
        for t in &locals {
            if t.hessian.dim() != d || t.linear.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: t.hessian.dim(),
                });
            }
            entries.extend(t.hessian.entries().map(|(r, c, v)| (r, c, v * w)));
            linear.axpy(w, &t.linear);
            constant += w * t.constant;
        }
        let average = QuadraticTerm::new(SparseSym::from_triplets(d, entries), linear, constant);
        Ok(QuadraticObjective { locals, average })
    }

    pub fn average(&self) -> &QuadraticTerm {
        &self.average
    }

    pub fn local(&self, worker: usize) -> &QuadraticTerm {
        &self.locals[worker]
    }

    /// Solves `∇f(x) = 0` by a dense Cholesky factorization of the averaged Hessian.
    pub fn solve_minimizer(&self) -> Result<DenseVector> {
        let h = self.average.hessian.to_dense();
        let rhs = DVector::from_column_slice(&self.average.linear);
        let chol = h
            .cholesky()
            .ok_or_else(|| Error::invalid("averaged Hessian is not positive definite"))?;
        Ok(DenseVector::from_vec(chol.solve(&rhs).as_slice().to_vec()))
    }
}

impl Objective for QuadraticObjective {
    fn workers(&self) -> usize {
        self.locals.len()
    }

    fn dim(&self) -> usize {
        self.average.hessian.dim()
    }

    fn local_value(&self, worker: usize, x: &[f64]) -> f64 {
        self.locals[worker].value(x)
    }

    fn local_grad_into(&self, worker: usize, x: &[f64], out: &mut [f64]) {
        self.locals[worker].grad_into(x, out)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.average.value(x)
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        self.average.grad_into(x, out)
    }

    fn hessian(&self) -> Option<DMatrix<f64>> {
        Some(self.average.hessian.to_dense())
    }
}

/// Accumulates a quadratic form written as a sum of squared links and squares.
#[derive(Debug, Default)]
pub(crate) struct FormBuilder {
    entries: Vec<(usize, usize, f64)>,
}

impl FormBuilder {
    /// Adds `w · (x_a − x_b)²` (0-based indices).
    pub fn link(&mut self, a: usize, b: usize, w: f64) {
        self.entries.push((a, a, w));
        self.entries.push((b, b, w));
        self.entries.push((a, b, -w));
        self.entries.push((b, a, -w));
    }

    /// Adds `w · x_a²`.
    pub fn square(&mut self, a: usize, w: f64) {
        self.entries.push((a, a, w));
    }

    /// Adds `w · ‖x‖²`.
    pub fn identity(&mut self, d: usize, w: f64) {
        for a in 0..d {
            self.square(a, w);
        }
    }

    /// Hessian of the accumulated form (twice the coefficient matrix).
    pub fn hessian(self, d: usize) -> SparseSym {
        let entries = self.entries.into_iter().map(|(r, c, v)| (r, c, 2.0 * v)).collect();
        SparseSym::from_triplets(d, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_matches_dense() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let s = SparseSym::from_dense(&m);
        assert_eq!(s.nnz(), 7);
        let x = [1.0, 2.0, 3.0];
        let mut out = [0.0; 3];
        s.mul_into(&x, &mut out);
        assert_eq!(out, [0.0, 0.0, 4.0]);
        assert_eq!(s.quad_form(&x), 12.0);
        assert_eq!(s.to_dense(), m);
    }

    #[test]
    fn duplicate_triplets_sum_and_cancel() {
        let s = SparseSym::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (0, 1, 1.0), (0, 1, -1.0)]);
        assert_eq!(s.nnz(), 1);
        assert_eq!(s.to_dense()[(0, 0)], 3.0);
    }

    #[test]
    fn form_builder_hessian() {
        let mut b = FormBuilder::default();
        b.link(0, 1, 1.0);
        let h = b.hessian(2).to_dense();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]));
    }
}
