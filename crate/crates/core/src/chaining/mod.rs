//! Covering numbers, the entropy integral, and the two-sided comparison of
//! expected suprema with the entropy integral for stationary processes.
//!
//! Balls are closed, `B(t, eps) = {s : d(t, s) <= eps}`, and centers are
//! points of `T`.

mod covering;
mod entropy;
mod stationary;

pub use covering::{covering_centers, covering_number, covering_profile, CoverMethod, CoveringProfile, EXACT_MAX_N};
pub use entropy::{entropy_integral, EntropyIntegral};
pub use stationary::{fernique_sandwich_check, verify_stationary, GroupAction, SandwichReport, SANDWICH_BAND};
