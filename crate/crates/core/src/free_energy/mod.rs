//! The free-energy functional `H`, its dual `G`, the one-parameter reduction `f` and the
//! classification of parameter points built on them.

mod classify;
mod functional;
mod lambda;
mod maximize;
mod special;

pub use classify::{
    classify, quadratic_coefficients, reduced_quadratic_form, ClassifiedPoint, Diagnostics,
    ReducedForm, Regime, DEFAULT_TOL_ZERO,
};
pub use functional::{
    f_derivative, fixed_point_residual, g_func, grad_g, h_func, hessian_g, k_derivative, k_func,
    mean_field_logits, softmax_weights, x_profile,
};
pub use lambda::{
    cubic_coefficient_check, default_offsets, fit_gradient_along_u, lambda_dense, lambda_matrix,
    null_direction, predicted_cubic_coefficient, CubicFit, LambdaMatrix,
};
pub use maximize::{
    beta_c, beta_c_with_grid, find_maximizers, find_maximizers_with_grid, MaximizerSet,
    StationaryProfile, DEFAULT_TIE_TOL, GRID_POINTS,
};
pub use special::{locate_special_points, SpecialPoint};
