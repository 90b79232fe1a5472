//! Maximum pseudolikelihood estimation of `β` at `h = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};
use crate::free_energy::{find_maximizers, DEFAULT_TIE_TOL};
use crate::limit_laws::{MixtureComponent, MixtureLaw};
use crate::model::{
    centered_stats, conditional_restriction, exact_magnetization_law, MagnetizationLaw,
};
use crate::numerics::{euclidean_distance, softmax};
use crate::params::ModelParams;
use crate::rng::stream_rng;

/// Default root bracket for [`mpl_estimate`].
pub const DEFAULT_BRACKET: (f64, f64) = (1e-6, 50.0);

const SCORE_TOL: f64 = 1e-10;

/// `y_r = x_r^{p−1}` and the softmax weights of `βp y`.
fn powers_and_weights(xbar: &[f64], p: u32, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let y: Vec<f64> = xbar.iter().map(|x| x.powi(p as i32 - 1)).collect();
    let logits: Vec<f64> = y.iter().map(|v| beta * p as f64 * v).collect();
    let w = softmax(&logits);
    (y, w)
}

/// `S(x̄, β) = Σ x̄_r^p − Σ_r x̄_r^{p−1} softmax_r(βp x̄^{p−1})`.
pub fn score(xbar: &[f64], p: u32, beta: f64) -> f64 {
    let (y, w) = powers_and_weights(xbar, p, beta);
    let energy: f64 = xbar.iter().zip(&y).map(|(x, v)| x * v).sum();
    energy - y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()
}

/// `∂S/∂β = −p Var_w(x̄^{p−1})`.
pub fn score_beta_derivative(xbar: &[f64], p: u32, beta: f64) -> f64 {
    let (y, w) = powers_and_weights(xbar, p, beta);
    let mean: f64 = y.iter().zip(&w).map(|(a, b)| a * b).sum();
    let var: f64 = y
        .iter()
        .zip(&w)
        .map(|(a, b)| b * (a - mean) * (a - mean))
        .sum();
    -(p as f64) * var
}

/// `∂S/∂x̄_r = p x_r^{p−1} − (p−1) x_r^{p−2} w_r (1 + βp(y_r − Σ_s w_s y_s))`.
pub fn score_gradient(xbar: &[f64], p: u32, beta: f64) -> Vec<f64> {
    let (y, w) = powers_and_weights(xbar, p, beta);
    let mean: f64 = y.iter().zip(&w).map(|(a, b)| a * b).sum();
    let pf = p as f64;
    xbar.iter()
        .enumerate()
        .map(|(r, &x)| {
            pf * y[r] - (pf - 1.0) * x.powi(p as i32 - 2) * w[r] * (1.0 + beta * pf * (y[r] - mean))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MplResult {
    pub beta_hat: f64,
    pub score_at_root: f64,
    pub iterations: u32,
    pub bracket: (f64, f64),
}

/// Root of `β ↦ S(x̄, β)` inside `bracket` by Newton steps safeguarded with bisection.
pub fn mpl_estimate(xbar: &[f64], p: u32, bracket: (f64, f64)) -> Result<MplResult> {
    let (lo0, hi0) = bracket;
    if !(lo0 < hi0) || !lo0.is_finite() || !hi0.is_finite() {
        return Err(PottsError::InvalidParameter(format!(
            "invalid bracket ({lo0}, {hi0})"
        )));
    }
    let y: Vec<f64> = xbar.iter().map(|x| x.powi(p as i32 - 1)).collect();
    let ymax = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ymin = y.iter().cloned().fold(f64::INFINITY, f64::min);
    if ymax - ymin <= 1e-15 * ymax.abs() {
        return Err(PottsError::Degenerate(
            "uniform sample: the score vanishes for every beta".into(),
        ));
    }
    let (s_lo, s_hi) = (score(xbar, p, lo0), score(xbar, p, hi0));
    if s_lo == 0.0 {
        return Ok(MplResult {
            beta_hat: lo0,
            score_at_root: 0.0,
            iterations: 0,
            bracket,
        });
    }
    if s_hi == 0.0 {
        return Ok(MplResult {
            beta_hat: hi0,
            score_at_root: 0.0,
            iterations: 0,
            bracket,
        });
    }
    if s_lo.signum() == s_hi.signum() {
        return Err(PottsError::NoSignChange { lo: lo0, hi: hi0 });
    }
    // S decreases in β, so it is positive at lo and negative at hi
    let (mut lo, mut hi) = if s_lo > 0.0 { (lo0, hi0) } else { (hi0, lo0) };
    let mut b = 0.5 * (lo + hi);
    let mut iterations = 0;
    let mut s = score(xbar, p, b);
    while iterations < 500 {
        iterations += 1;
        if s > 0.0 {
            lo = b;
        } else if s < 0.0 {
            hi = b;
        } else {
            break;
        }
        let d = score_beta_derivative(xbar, p, b);
        let newton = b - s / d;
        let (a, c) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let next = if d < 0.0 && newton > a && newton < c {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == b || (c - a) <= 4.0 * f64::EPSILON * b.abs() {
            b = next;
            s = score(xbar, p, b);
            break;
        }
        b = next;
        s = score(xbar, p, b);
        if s.abs() < 1e-3 * SCORE_TOL {
            break;
        }
    }
    if !(s.abs() < SCORE_TOL) {
        return Err(PottsError::BracketFailure(format!(
            "score {s:e} at beta {b} after {iterations} steps"
        )));
    }
    Ok(MplResult {
        beta_hat: b,
        score_at_root: s,
        iterations,
        bracket,
    })
}

/// `ρ = −∇_x S / ∂_β S` at a maximizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoVector {
    pub rho: Vec<f64>,
}

pub fn rho(m: &[f64], p: u32, beta: f64) -> Result<RhoVector> {
    let denom = score_beta_derivative(m, p, beta);
    if denom.abs() < 1e-14 {
        return Err(PottsError::Degenerate(format!(
            "dS/dbeta = {denom:e} is singular at this point"
        )));
    }
    let rho: Vec<f64> = score_gradient(m, p, beta)
        .iter()
        .map(|g| -g / denom)
        .collect();
    if rho.iter().any(|v| !v.is_finite()) {
        return Err(PottsError::Degenerate("rho has non-finite entries".into()));
    }
    Ok(RhoVector { rho })
}

/// Monte Carlo law of `√N(β̂ − β)` from draws of the exact magnetization law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MplSample {
    pub n: u32,
    pub beta: f64,
    /// `β̂` per replicate, `None` when the replicate was excluded.
    pub beta_hats: Vec<Option<f64>>,
    /// Sorted `√N(β̂ − β)` over the retained replicates.
    pub sqrt_n_errors: Vec<f64>,
    /// Replicates with a uniform `X̄`.
    pub degenerate: usize,
    /// Replicates whose root search failed for another reason.
    pub failures: usize,
}

impl MplSample {
    pub fn median(&self) -> Option<f64> {
        let v = &self.sqrt_n_errors;
        match v.len() {
            0 => None,
            k if k % 2 == 1 => Some(v[k / 2]),
            k => Some(0.5 * (v[k / 2 - 1] + v[k / 2])),
        }
    }
}

fn require_zero_field(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.h != 0.0 {
        return Err(PottsError::InvalidParameter(
            "pseudolikelihood estimation assumes h = 0".into(),
        ));
    }
    Ok(())
}

pub fn simulate_mpl_distribution(
    params: &ModelParams,
    n: u32,
    replicates: usize,
    seed: u64,
) -> Result<MplSample> {
    require_zero_field(params)?;
    let law = exact_magnetization_law(params, n)?;
    simulate_mpl_from_law(&law, replicates, seed)
}

/// Replicate `i` draws one atom using the RNG stream `i` of `seed`.
pub fn simulate_mpl_from_law(
    law: &MagnetizationLaw,
    replicates: usize,
    seed: u64,
) -> Result<MplSample> {
    let params = *law.params();
    require_zero_field(&params)?;
    if replicates == 0 {
        return Err(PottsError::InvalidParameter(
            "replicates must be >= 1".into(),
        ));
    }
    let sampler = law.sampler();
    let outcomes: Vec<std::result::Result<f64, bool>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let atom = sampler.sample(&mut rng);
            match mpl_estimate(&law.frequencies(atom), params.p, DEFAULT_BRACKET) {
                Ok(r) => Ok(r.beta_hat),
                Err(PottsError::Degenerate(_)) => Err(true),
                Err(_) => Err(false),
            }
        })
        .collect();
    let sqrt_n = (law.n() as f64).sqrt();
    let mut errs: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.ok())
        .map(|b| sqrt_n * (b - params.beta))
        .collect();
    errs.sort_by(|a, b| a.total_cmp(b));
    Ok(MplSample {
        n: law.n(),
        beta: params.beta,
        beta_hats: outcomes.iter().map(|o| o.ok()).collect(),
        sqrt_n_errors: errs,
        degenerate: outcomes.iter().filter(|o| matches!(o, Err(true))).count(),
        failures: outcomes.iter().filter(|o| matches!(o, Err(false))).count(),
    })
}

/// Mixture `(1/q) Σ_i N(0, ρ_iᵀΣ_iρ_i)` with `Σ_i` the covariance of `W_N` conditioned on the
/// ball of radius `eps` around the maximizer `m_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MplLimit {
    pub maximizers: Vec<Vec<f64>>,
    pub rho: Vec<RhoVector>,
    pub eps: f64,
    pub law: MixtureLaw,
}

impl MplLimit {
    pub fn cdf(&self, x: f64) -> f64 {
        self.law.cdf(x)
    }
}

/// One third of the smallest pairwise distance between maximizers.
pub fn default_ball_radius(maximizers: &[Vec<f64>]) -> Option<f64> {
    let mut best = f64::INFINITY;
    for i in 0..maximizers.len() {
        for j in 0..i {
            best = best.min(euclidean_distance(&maximizers[i], &maximizers[j]));
        }
    }
    best.is_finite().then_some(best / 3.0)
}

pub fn mpl_limit_law(law: &MagnetizationLaw, eps: Option<f64>) -> Result<MplLimit> {
    let params = *law.params();
    require_zero_field(&params)?;
    let set = find_maximizers(&params, DEFAULT_TIE_TOL);
    if set.profiles.iter().any(|p| p.s == 0.0) {
        return Err(PottsError::Degenerate(
            "the uniform profile is a global maximizer; the mixture limit needs beta > beta_c"
                .into(),
        ));
    }
    let maximizers = set.expanded.clone();
    let eps = match eps {
        Some(e) => e,
        None => default_ball_radius(&maximizers).unwrap_or(f64::INFINITY),
    };
    let weight = 1.0 / maximizers.len() as f64;
    let mut rhos = Vec::with_capacity(maximizers.len());
    let mut components = Vec::with_capacity(maximizers.len());
    for m in &maximizers {
        let r = rho(m, params.p, params.beta)?;
        let (restricted, _) = conditional_restriction(law, m, eps)?;
        let cov = centered_stats(&restricted, m).cov_w;
        let v = nalgebra::DVector::from_column_slice(&r.rho);
        let variance = (v.transpose() * cov * &v)[(0, 0)];
        components.push(MixtureComponent { weight, variance });
        rhos.push(r);
    }
    let mut law_out = MixtureLaw { components };
    // 1/q weights may not sum to 1 exactly in floating point
    let total: f64 = law_out.components.iter().map(|c| c.weight).sum();
    for c in &mut law_out.components {
        c.weight /= total;
    }
    let law_out = MixtureLaw::new(law_out.components)?;
    Ok(MplLimit {
        maximizers,
        rho: rhos,
        eps,
        law: law_out,
    })
}
