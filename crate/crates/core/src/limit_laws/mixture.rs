use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};
use crate::free_energy::{k_derivative, StationaryProfile};
use crate::numerics::normal_cdf;
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub variance: f64,
}

/// Finite mixture of centered one-dimensional Gaussians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureLaw {
    pub components: Vec<MixtureComponent>,
}

impl MixtureLaw {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(PottsError::InvalidParameter(
                "mixture needs at least one component".into(),
            ));
        }
        if components
            .iter()
            .any(|c| !(c.weight > 0.0) || !(c.variance >= 0.0) || !c.variance.is_finite())
        {
            return Err(PottsError::InvalidParameter(
                "weights must be positive and variances finite and >= 0".into(),
            ));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(PottsError::InvalidParameter(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(MixtureLaw { components })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let f = if c.variance > 0.0 {
                    normal_cdf(x / c.variance.sqrt())
                } else if x >= 0.0 {
                    1.0
                } else {
                    0.0
                };
                c.weight * f
            })
            .sum()
    }
}

/// Unnormalized weight `(|f''(s)| · (−k''(m_q))^{q−2} · Π m_r)^{−1/2}` of a maximizer.
pub fn tau_weight(profile: &StationaryProfile, params: &ModelParams, tol_zero: f64) -> Result<f64> {
    if profile.f2.abs() < tol_zero {
        return Err(PottsError::Degenerate(format!(
            "f'' = {:e} vanishes at s = {}; no mixture law applies",
            profile.f2, profile.s
        )));
    }
    if profile.x.iter().any(|&m| m <= 0.0) {
        return Err(PottsError::Domain("maximizer has a zero coordinate".into()));
    }
    let q = profile.x.len();
    let mq = profile.x[q - 1];
    let dq = k_derivative(mq, params.p, params.beta, 2).abs();
    let prod: f64 = profile.x.iter().product();
    Ok((profile.f2.abs() * dq.powi(q as i32 - 2) * prod).powf(-0.5))
}

/// Normalized weights `τ_i / Σ_j τ_j`, one per listed maximizer.
pub fn mixture_weights(
    profiles: &[StationaryProfile],
    params: &ModelParams,
    tol_zero: f64,
) -> Result<Vec<f64>> {
    let taus: Vec<f64> = profiles
        .iter()
        .map(|p| tau_weight(p, params, tol_zero))
        .collect::<Result<_>>()?;
    let total: f64 = taus.iter().sum();
    Ok(taus.iter().map(|t| t / total).collect())
}
