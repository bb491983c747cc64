//! The tensorization construction.
//!
//! For `mu` with masses in multiples of `1/K`, the class `T_N(mu)` holds the
//! sequences of length `M = NK` in which each `t` occurs `N K mu(t)` times.
//! Given i.i.d. copies `X^(1), ..., X^(M)` of a base process, the averaged
//! process is `X_s = (1/M) sum_i X^(i)_{s_i}` for `s` in the class. Its
//! law is invariant under permuting sequence positions, and its expected
//! supremum tends to Fernique's functional `F(X, mu)` as `N` grows.

mod process;
mod sequences;
mod study;

pub use process::{
    mc_sup_tensorized, stationarity_check, tensor_gaussian_cov, tensor_metric, tensor_subgaussian_check,
    TensorGaussian, TensorSubgaussianReport, COV_CAP,
};
pub use sequences::{
    class_size, enumerate_sequence_class, multinomial, RationalMeasure, SequenceClass, DEFAULT_CAP,
};
pub use study::{convergence_study, reference_functional, StudyRow, StudyTable};
