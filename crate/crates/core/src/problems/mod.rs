//! Problem generators: conditioned least squares, LIBSVM logistic regression,
//! the two-family constructed quadratic, and zero-chain hard instances.

pub mod constructed;
pub mod least_squares;
pub mod logistic;
pub mod quadratic;
pub mod zero_chain;

pub use constructed::gen_constructed_quadratic;
pub use least_squares::{gen_least_squares, LeastSquaresSpec};
pub use logistic::{load_libsvm, LibsvmData, LibsvmOptions};
pub use quadratic::{QuadraticObjective, QuadraticTerm, SparseSym};
pub use zero_chain::{
    chain_decay, gen_zero_chain_gc, gen_zero_chain_gc3, gen_zero_chain_sc, gen_zero_chain_sc_homogeneous,
    HardFamily, HardInstance,
};
