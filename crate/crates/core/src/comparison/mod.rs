//! The sup-decomposition identity and convex-order comparison of a
//! discrete law with a scaled standard Gaussian, tested on max-affine
//! functions `f(x) = max_i (<a_i, x> + b_i)`.

mod identity;
mod order;
mod witness;

pub use identity::{argmax_measure, expected_sup_shifted, sup_decomposition_check, PERTURBATION};
pub use order::{
    convex_order_check, convex_order_gaps, estimate_constant, ConstantReport, ConstantRow, GaussMethod, OrderingReport,
    WitnessGap,
};
pub use witness::{MaxAffine, WitnessFamily, ATOM_WITNESS_MAX};
