//! Simulation of distributed convex optimization under communication compression.
//!
//! The crate provides problem generators, compressors with bit accounting, accelerated and
//! baseline compressed-gradient algorithms, zero-chain lower-bound tooling and an experiment
//! harness producing CSV traces.

pub mod algorithms;
pub mod compressors;
pub mod error;
pub mod harness;
pub mod lowerbound;
pub mod problem;
pub mod problems;
pub mod trace;
pub mod vector;

pub use error::{Error, Result};
pub use problem::{Objective, ProblemInstance};
pub use trace::{Trace, TraceMeta, TraceRecord};
pub use vector::DenseVector;
