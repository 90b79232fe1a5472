//! The Glauber exchangeable pair `(X, X')` and its one-step regression.

use nalgebra::DMatrix;

use super::glauber::{conditional_color_distribution, SpinConfig};
use super::law::log_weight_raw;
use crate::error::{PottsError, Result};
use crate::numerics::CompensatedSum;
use crate::params::ModelParams;

/// One of the `N·q` outcomes of a Glauber update from a fixed configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOutcome {
    pub site: usize,
    pub color: u16,
    pub prob: f64,
}

pub fn kernel_outcomes(config: &SpinConfig, params: &ModelParams) -> Vec<KernelOutcome> {
    let n = config.n();
    let mut out = Vec::with_capacity(n * config.q());
    for site in 0..n {
        let probs = conditional_color_distribution(&config.counts_excluding(site), params, n);
        for (r, pr) in probs.into_iter().enumerate() {
            out.push(KernelOutcome {
                site,
                color: r as u16,
                prob: pr / n as f64,
            });
        }
    }
    out
}

fn w_of(counts: &[u32], center: &[f64]) -> Vec<f64> {
    let n: u32 = counts.iter().sum();
    let nf = n as f64;
    counts
        .iter()
        .zip(center)
        .map(|(&c, m)| nf.sqrt() * (c as f64 / nf - m))
        .collect()
}

/// `E[W' − W | X]` by summing over every kernel outcome, with `W = √N(X̄ − center)`.
pub fn kernel_regression(config: &SpinConfig, params: &ModelParams, center: &[f64]) -> Vec<f64> {
    let q = config.q();
    let w = w_of(config.counts(), center);
    let mut acc = vec![CompensatedSum::new(); q];
    for o in kernel_outcomes(config, params) {
        let mut next = config.clone();
        next.set_color(o.site, o.color);
        let w_next = w_of(next.counts(), center);
        for r in 0..q {
            acc[r].add(o.prob * (w_next[r] - w[r]));
        }
    }
    acc.iter().map(|a| a.value()).collect()
}

/// Closed form of the same regression:
/// `−W_r/N − center_r/√N + N^{-3/2} Σ_j P(X'_j = r | X_{-j})`.
pub fn regression_closed_form(
    config: &SpinConfig,
    params: &ModelParams,
    center: &[f64],
) -> Vec<f64> {
    let n = config.n();
    let nf = n as f64;
    let q = config.q();
    let w = w_of(config.counts(), center);
    let mut pi_sum = vec![CompensatedSum::new(); q];
    for site in 0..n {
        let probs = conditional_color_distribution(&config.counts_excluding(site), params, n);
        for r in 0..q {
            pi_sum[r].add(probs[r]);
        }
    }
    (0..q)
        .map(|r| -w[r] / nf - center[r] / nf.sqrt() + pi_sum[r].value() / (nf * nf.sqrt()))
        .collect()
}

/// Every configuration of `[q]^N` in odometer order (site 0 fastest).
pub fn all_configurations(n: usize, q: usize) -> Result<Vec<SpinConfig>> {
    let total = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > 1_000_000 {
        return Err(PottsError::BruteForceTooLarge {
            configs: total,
            cap: 1_000_000,
        });
    }
    let mut out = Vec::with_capacity(total as usize);
    for idx in 0..total as usize {
        let mut rest = idx;
        let colors: Vec<u16> = (0..n)
            .map(|_| {
                let c = rest % q;
                rest /= q;
                c as u16
            })
            .collect();
        out.push(SpinConfig::new(colors, q)?);
    }
    Ok(out)
}

fn config_index(config: &SpinConfig) -> usize {
    let q = config.q();
    config
        .colors()
        .iter()
        .rev()
        .fold(0usize, |acc, &c| acc * q + c as usize)
}

/// Dense Glauber transition matrix over all `q^N` configurations, in the order of
/// [`all_configurations`]. Rows sum to one; the diagonal collects the no-change outcomes.
pub fn transition_matrix(
    params: &ModelParams,
    n: usize,
) -> Result<(Vec<SpinConfig>, DMatrix<f64>)> {
    let states = all_configurations(n, params.qn())?;
    let m = states.len();
    let mut k = DMatrix::zeros(m, m);
    for (i, s) in states.iter().enumerate() {
        for o in kernel_outcomes(s, params) {
            let mut next = s.clone();
            next.set_color(o.site, o.color);
            k[(i, config_index(&next))] += o.prob;
        }
    }
    Ok((states, k))
}

/// Log-probability of a single configuration under the Gibbs measure, given `log(q^N Z_N)`.
pub fn configuration_log_prob(config: &SpinConfig, params: &ModelParams, log_z: f64) -> f64 {
    log_weight_raw(config.counts(), config.n() as u32, params) - log_z
}
