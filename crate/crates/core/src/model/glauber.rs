use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counts::{colex_key, ColorCounts};
use super::law::{LawKind, MagnetizationLaw};
use crate::error::{PottsError, Result};
use crate::numerics::softmax;
use crate::params::ModelParams;
use crate::rng::stream_rng;

/// A full color configuration with its tally kept in sync.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    colors: Vec<u16>,
    counts: Vec<u32>,
}

impl SpinConfig {
    pub fn new(colors: Vec<u16>, q: usize) -> Result<Self> {
        if colors.is_empty() {
            return Err(PottsError::InvalidParameter(
                "configuration needs at least one site".into(),
            ));
        }
        let counts = ColorCounts::from_colors(&colors, q)?.counts().to_vec();
        Ok(SpinConfig { colors, counts })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, q: usize, rng: &mut R) -> Self {
        let colors: Vec<u16> = (0..n).map(|_| rng.random_range(0..q) as u16).collect();
        let mut counts = vec![0u32; q];
        for &c in &colors {
            counts[c as usize] += 1;
        }
        SpinConfig { colors, counts }
    }

    pub fn colors(&self) -> &[u16] {
        &self.colors
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn color_counts(&self) -> ColorCounts {
        ColorCounts::new(self.counts.clone()).expect("q >= 1")
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn q(&self) -> usize {
        self.counts.len()
    }

    /// Counts of the other `N-1` sites.
    pub fn counts_excluding(&self, site: usize) -> Vec<u32> {
        let mut c = self.counts.clone();
        c[self.colors[site] as usize] -= 1;
        c
    }

    pub fn set_color(&mut self, site: usize, color: u16) {
        let old = self.colors[site];
        self.counts[old as usize] -= 1;
        self.counts[color as usize] += 1;
        self.colors[site] = color;
    }
}

/// Law of one site's color given the others.
///
/// `counts_excluding_site` tallies the other `N-1` sites; the local fields use
/// `m_r = count_r / N` (divisor `N`, not `N-1`).
pub fn conditional_color_distribution(
    counts_excluding_site: &[u32],
    params: &ModelParams,
    n: usize,
) -> Vec<f64> {
    let nf = n as f64;
    let pb = params.p as f64 * params.beta;
    let e = params.p as i32 - 1;
    let logits: Vec<f64> = counts_excluding_site
        .iter()
        .enumerate()
        .map(|(r, &c)| pb * (c as f64 / nf).powi(e) + if r == 0 { params.h } else { 0.0 })
        .collect();
    softmax(&logits)
}

/// Outcome of a heat-bath update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlauberMove {
    pub site: usize,
    pub old: u16,
    pub new: u16,
}

/// Picks a uniform site and redraws its color from the conditional law.
pub fn glauber_step<R: Rng + ?Sized>(
    state: &mut SpinConfig,
    params: &ModelParams,
    rng: &mut R,
) -> GlauberMove {
    let n = state.n();
    let site = rng.random_range(0..n);
    let old = state.colors[site];
    state.counts[old as usize] -= 1;
    let probs = conditional_color_distribution(&state.counts, params, n);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut new = probs.len() - 1;
    for (r, pr) in probs.iter().enumerate() {
        acc += pr;
        if u < acc {
            new = r;
            break;
        }
    }
    state.counts[new] += 1;
    state.colors[site] = new as u16;
    GlauberMove {
        site,
        old,
        new: new as u16,
    }
}

/// Settings of a Glauber-chain run. A sweep is `N` single-site updates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub burn_in_sweeps: u32,
    /// Sweeps between recorded samples.
    pub thinning: u32,
    /// Recorded samples per replicate.
    pub samples: u64,
    pub replicates: u32,
    pub seed: u64,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 || self.samples == 0 || self.replicates == 0 {
            return Err(PottsError::InvalidParameter(
                "thinning, samples and replicates must all be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Empirical magnetization law from independent Glauber chains.
///
/// Replicate `i` runs on stream `i` of the configured seed; tallies are merged in colex
/// order, so the result is identical for any thread count.
pub fn mcmc_magnetization_law(
    params: &ModelParams,
    n: u32,
    chain: &ChainConfig,
) -> Result<MagnetizationLaw> {
    params.validate()?;
    chain.validate()?;
    if n == 0 {
        return Err(PottsError::InvalidParameter("N must be >= 1".into()));
    }
    let q = params.qn();
    let n = n as usize;
    let tallies: Vec<BTreeMap<Vec<u32>, u64>> = (0..chain.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(chain.seed, rep as u64);
            let mut state = SpinConfig::random(n, q, &mut rng);
            for _ in 0..chain.burn_in_sweeps as usize * n {
                glauber_step(&mut state, params, &mut rng);
            }
            let mut tally = BTreeMap::new();
            for _ in 0..chain.samples {
                for _ in 0..chain.thinning as usize * n {
                    glauber_step(&mut state, params, &mut rng);
                }
                *tally.entry(colex_key_full(state.counts())).or_insert(0u64) += 1;
            }
            tally
        })
        .collect();
    let mut merged: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for t in tallies {
        for (k, v) in t {
            *merged.entry(k).or_insert(0) += v;
        }
    }
    let total: u64 = merged.values().sum();
    let mut counts = Vec::with_capacity(merged.len() * q);
    let mut log_probs = Vec::with_capacity(merged.len());
    for (key, hits) in merged {
        counts.extend(counts_from_key(&key, n as u32));
        log_probs.push((hits as f64 / total as f64).ln());
    }
    Ok(MagnetizationLaw::from_parts(
        n as u32,
        q,
        *params,
        LawKind::Empirical,
        None,
        counts,
        log_probs,
    ))
}

fn colex_key_full(counts: &[u32]) -> Vec<u32> {
    colex_key(counts)
}

fn counts_from_key(key: &[u32], n: u32) -> Vec<u32> {
    let mut c: Vec<u32> = key.iter().rev().cloned().collect();
    let used: u32 = c.iter().sum();
    c.push(n - used);
    c
}
