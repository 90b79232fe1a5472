//! The Gibbs measure on `[q]^N`, its magnetization law and the Glauber dynamics.

mod counts;
pub mod exchangeable;
mod glauber;
pub mod io;
mod law;
mod stirling;

pub use counts::{ColorCounts, Compositions};
pub use glauber::{
    conditional_color_distribution, glauber_step, mcmc_magnetization_law, ChainConfig, GlauberMove,
    SpinConfig,
};
pub use law::{
    brute_force_law, centered_stats, conditional_restriction, exact_magnetization_law,
    exact_magnetization_law_with_cap, law_moment, log_weight, total_variation, AtomSampler,
    CenteredStats, LawKind, MagnetizationLaw, BRUTE_FORCE_CAP, DEFAULT_ENUMERATION_CAP,
};
pub use stirling::stirling_density_check;
