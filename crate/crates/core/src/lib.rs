//! # subgauss-core
//!
//! Numerical machinery around the comparison of subgaussian processes with
//! Gaussian ones on a finite index set `T`.
//!
//! | Module | What it computes |
//! |--------|------------------|
//! | [`model`] | laws on `R^T`, Gaussian specifications, natural metric, sampling, increment checks |
//! | [`transport`] | Fernique's functional `F(P, mu)`, `W1`, total variation, continuity bounds, martingale-coupling feasibility |
//! | [`tensorization`] | the sequence classes `T_N(mu)`, the averaged process over i.i.d. copies, and its suprema |
//! | [`chaining`] | covering numbers, the entropy integral, and the sandwich check for stationary processes |
//! | [`comparison`] | the sup-decomposition identity and convex-order tests with max-affine witnesses |
//!
//! Every Monte Carlo routine takes an explicit 64-bit seed and is bitwise
//! reproducible regardless of the number of worker threads.

pub mod chaining;
pub mod comparison;
pub mod error;
pub mod model;
pub mod numfmt;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod tensorization;
pub mod transport;

pub use error::{Error, Result};
pub use model::{
    CheckReport, DiscreteLaw, GaussianSpec, IndexSet, MeasureOnT, MetricOnT, ProcessSource,
    SampleBatch,
};
pub use stats::Estimate;
pub use transport::{FeasibilityResult, Norm, Sense, TransportPlan};

/// Crate version, echoed in experiment summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
