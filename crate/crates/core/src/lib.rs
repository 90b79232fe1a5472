//! Exact and Monte Carlo laws, free-energy landscape, limit theorems and pseudolikelihood
//! estimation for the p-tensor Curie–Weiss Potts model
//!
//! ```text
//! P(X) ∝ exp(βN Σ_r X̄_r^p + N h X̄_1),   X ∈ [q]^N.
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod free_energy;
pub mod limit_laws;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod params;
pub mod rng;

pub use error::{PottsError, Result};
pub use params::ModelParams;
