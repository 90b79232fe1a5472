//! Distances to limit laws and empirical rate fits.

mod distance;
mod experiment;
mod rates;

pub use distance::{
    default_directions, halfspace_discrepancy, halfspace_discrepancy_points,
    kolmogorov_distance_1d, kolmogorov_distance_1d_steps, kolmogorov_distance_discrete, sort_atoms,
    RANDOM_DIRECTIONS,
};
pub use experiment::{
    berry_esseen_experiment, critical_weights_check, law_for, mean_w_scaling_check, BallWeight,
    CriticalWeights, ExperimentOptions, MeanWReport,
};
pub use rates::{rate_fit, spearman_correlation, DistanceSeries, RateFit, RateReport};
