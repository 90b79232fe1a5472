use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counts::{colex_key, ColorCounts, Compositions};
use crate::error::{PottsError, Result};
use crate::numerics::{composition_count, log_sum_exp, CompensatedSum, LogFactorial};
use crate::params::ModelParams;

/// Default cap on the number of composition-grid atoms for exact enumeration.
pub const DEFAULT_ENUMERATION_CAP: u128 = 20_000_000;

/// Largest `q^N` the brute-force oracle will enumerate.
pub const BRUTE_FORCE_CAP: u128 = 10_000_000;

/// How a law was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    Exact,
    BruteForce,
    Empirical,
}

/// Distribution of the magnetization vector over the composition grid.
///
/// Atoms are stored flat: atom `i` has counts `counts[i*q..(i+1)*q]` and log-probability
/// `log_probs[i]`. Exact and brute-force laws list every composition in colexicographic
/// order; empirical laws list only the visited ones, in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationLaw {
    pub(crate) n: u32,
    pub(crate) q: usize,
    pub(crate) params: ModelParams,
    pub(crate) kind: LawKind,
    /// `log(q^N Z_N)` for exact laws; absent for empirical ones.
    pub(crate) log_z: Option<f64>,
    pub(crate) counts: Vec<u32>,
    pub(crate) log_probs: Vec<f64>,
}

impl MagnetizationLaw {
    pub(crate) fn from_parts(
        n: u32,
        q: usize,
        params: ModelParams,
        kind: LawKind,
        log_z: Option<f64>,
        counts: Vec<u32>,
        log_probs: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(counts.len(), q * log_probs.len());
        MagnetizationLaw {
            n,
            q,
            params,
            kind,
            log_z,
            counts,
            log_probs,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn log_z(&self) -> Option<f64> {
        self.log_z
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn atom_counts(&self, i: usize) -> &[u32] {
        &self.counts[i * self.q..(i + 1) * self.q]
    }

    pub fn log_prob(&self, i: usize) -> f64 {
        self.log_probs[i]
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.log_probs[i].exp()
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    /// Writes the magnetization vector of atom `i` into `out`.
    pub fn frequencies_into(&self, i: usize, out: &mut [f64]) {
        let n = self.n as f64;
        for (o, &c) in out.iter_mut().zip(self.atom_counts(i)) {
            *o = c as f64 / n;
        }
    }

    pub fn frequencies(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.q];
        self.frequencies_into(i, &mut out);
        out
    }

    /// Total probability, which is 1 up to rounding for any constructed law.
    pub fn total_mass(&self) -> f64 {
        log_sum_exp(&self.log_probs).exp()
    }

    /// Index of the atom with the given counts, if present.
    pub fn find(&self, counts: &[u32]) -> Option<usize> {
        (0..self.len()).find(|&i| self.atom_counts(i) == counts)
    }

    /// `E g(X̄)` with compensated summation.
    pub fn moment<F: Fn(&[f64]) -> f64>(&self, g: F) -> f64 {
        law_moment(self, g)
    }

    /// Cumulative table for drawing atoms.
    pub fn sampler(&self) -> AtomSampler {
        let mut acc = CompensatedSum::new();
        let cdf = self
            .log_probs
            .iter()
            .map(|lp| {
                acc.add(lp.exp());
                acc.value()
            })
            .collect();
        AtomSampler { cdf }
    }
}

/// Inverse-CDF sampler over the atoms of a law.
#[derive(Debug, Clone)]
pub struct AtomSampler {
    cdf: Vec<f64>,
}

impl AtomSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().expect("law has atoms");
        let u: f64 = rng.random::<f64>() * total;
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }
}

#[inline]
pub(crate) fn log_weight_raw(counts: &[u32], n: u32, params: &ModelParams) -> f64 {
    let nf = n as f64;
    let p = params.p as i32;
    let power_sum: f64 = counts.iter().map(|&c| (c as f64 / nf).powi(p)).sum();
    params.beta * nf * power_sum + params.h * counts[0] as f64
}

/// `βN Σ_r (n_r/N)^p + h n_1`, the exponent of the Gibbs weight of any configuration with
/// these counts.
pub fn log_weight(counts: &ColorCounts, params: &ModelParams) -> f64 {
    log_weight_raw(counts.counts(), counts.total(), params)
}

pub fn exact_magnetization_law(params: &ModelParams, n: u32) -> Result<MagnetizationLaw> {
    exact_magnetization_law_with_cap(params, n, DEFAULT_ENUMERATION_CAP)
}

/// Exact law by enumeration of the composition grid.
///
/// Chunks keyed by the slowest colex coordinate are evaluated in parallel and concatenated
/// in order, so the result does not depend on the thread count.
pub fn exact_magnetization_law_with_cap(
    params: &ModelParams,
    n: u32,
    cap: u128,
) -> Result<MagnetizationLaw> {
    params.validate()?;
    if n == 0 {
        return Err(PottsError::InvalidParameter("N must be >= 1".into()));
    }
    let q = params.qn();
    let atoms = composition_count(n as u64, q as u64);
    if atoms > cap {
        return Err(PottsError::GridTooLarge { atoms, cap });
    }
    let lf = LogFactorial::new(n as usize);
    let log_mass = |c: &[u32]| -> f64 {
        let mut m = lf.get(n as usize);
        for &k in c {
            m -= lf.get(k as usize);
        }
        m + log_weight_raw(c, n, params)
    };

    let (counts, masses) = if q == 2 {
        let mut counts = Vec::with_capacity(2 * (n as usize + 1));
        let mut masses = Vec::with_capacity(n as usize + 1);
        for n1 in 0..=n {
            let c = [n1, n - n1];
            counts.extend_from_slice(&c);
            masses.push(log_mass(&c));
        }
        (counts, masses)
    } else {
        let chunks: Vec<(Vec<u32>, Vec<f64>)> = (0..=n)
            .into_par_iter()
            .map(|slow| {
                let rest = n - slow;
                let mut inner = Compositions::new(rest, q - 1);
                let mut tmp = vec![0u32; q - 1];
                let mut full = vec![0u32; q];
                let mut counts = Vec::new();
                let mut masses = Vec::new();
                while inner.next_into(&mut tmp) {
                    full[..q - 2].copy_from_slice(&tmp[..q - 2]);
                    full[q - 2] = slow;
                    full[q - 1] = tmp[q - 2];
                    counts.extend_from_slice(&full);
                    masses.push(log_mass(&full));
                }
                (counts, masses)
            })
            .collect();
        let mut counts = Vec::with_capacity(atoms as usize * q);
        let mut masses = Vec::with_capacity(atoms as usize);
        for (c, m) in chunks {
            counts.extend(c);
            masses.extend(m);
        }
        (counts, masses)
    };

    let log_z = log_sum_exp(&masses);
    let log_probs = masses.into_iter().map(|m| m - log_z).collect();
    Ok(MagnetizationLaw::from_parts(
        n,
        q,
        *params,
        LawKind::Exact,
        Some(log_z),
        counts,
        log_probs,
    ))
}

/// Brute-force law over all `q^N` configurations.
///
/// Each configuration's exponent is computed from the number of monochromatic ordered
/// `p`-tuples, `Σ_r n_r^p` in integer arithmetic, scaled by `N^{1-p}`; multiplicities are
/// counted configuration by configuration. No factorials are involved, which makes this an
/// independent check on [`exact_magnetization_law`].
pub fn brute_force_law(params: &ModelParams, n: u32) -> Result<MagnetizationLaw> {
    params.validate()?;
    if n == 0 {
        return Err(PottsError::InvalidParameter("N must be >= 1".into()));
    }
    let q = params.qn();
    let configs = (q as u128).checked_pow(n).unwrap_or(u128::MAX);
    if configs > BRUTE_FORCE_CAP {
        return Err(PottsError::BruteForceTooLarge {
            configs,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let mut colors = vec![0usize; n as usize];
    let mut tally: HashMap<Vec<u32>, u64> = HashMap::new();
    loop {
        let mut counts = vec![0u32; q];
        for &c in &colors {
            counts[c] += 1;
        }
        *tally.entry(counts).or_insert(0) += 1;
        // odometer increment
        let mut i = 0;
        loop {
            if i == colors.len() {
                break;
            }
            colors[i] += 1;
            if colors[i] < q {
                break;
            }
            colors[i] = 0;
            i += 1;
        }
        if i == colors.len() {
            break;
        }
    }
    let scale = (n as f64).powi(1 - params.p as i32);
    let mut entries: Vec<(Vec<u32>, f64)> = tally
        .into_iter()
        .map(|(counts, mult)| {
            let tuples: u128 = counts.iter().map(|&c| (c as u128).pow(params.p)).sum();
            let exponent = params.beta * scale * tuples as f64 + params.h * counts[0] as f64;
            let lm = (mult as f64).ln() + exponent;
            (counts, lm)
        })
        .collect();
    entries.sort_by_key(|(c, _)| colex_key(c));
    let masses: Vec<f64> = entries.iter().map(|(_, m)| *m).collect();
    let log_z = log_sum_exp(&masses);
    let mut counts = Vec::with_capacity(entries.len() * q);
    let mut log_probs = Vec::with_capacity(entries.len());
    for (c, m) in entries {
        counts.extend(c);
        log_probs.push(m - log_z);
    }
    Ok(MagnetizationLaw::from_parts(
        n,
        q,
        *params,
        LawKind::BruteForce,
        Some(log_z),
        counts,
        log_probs,
    ))
}

/// `Σ_atoms g(x̄)·P(x̄)` with compensated summation; `g` receives the magnetization vector.
pub fn law_moment<F: Fn(&[f64]) -> f64>(law: &MagnetizationLaw, g: F) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut x = vec![0.0; law.q];
    for i in 0..law.len() {
        law.frequencies_into(i, &mut x);
        acc.add(g(&x) * law.prob(i));
    }
    acc.value()
}

/// Mean and covariance of `W = √N (X̄ − center)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredStats {
    pub mean_w: Vec<f64>,
    pub cov_w: DMatrix<f64>,
}

pub fn centered_stats(law: &MagnetizationLaw, center: &[f64]) -> CenteredStats {
    let q = law.q;
    let sqrt_n = (law.n as f64).sqrt();
    let mut x = vec![0.0; q];
    let mut mean_acc = vec![CompensatedSum::new(); q];
    for i in 0..law.len() {
        law.frequencies_into(i, &mut x);
        let pr = law.prob(i);
        for r in 0..q {
            mean_acc[r].add((x[r] - center[r]) * pr);
        }
    }
    let shift: Vec<f64> = mean_acc.iter().map(|a| a.value()).collect();
    let mut cov_acc = vec![CompensatedSum::new(); q * q];
    for i in 0..law.len() {
        law.frequencies_into(i, &mut x);
        let pr = law.prob(i);
        for r in 0..q {
            let dr = x[r] - center[r] - shift[r];
            for s in r..q {
                let ds = x[s] - center[s] - shift[s];
                cov_acc[r * q + s].add(dr * ds * pr);
            }
        }
    }
    let nf = law.n as f64;
    let mut cov_w = DMatrix::zeros(q, q);
    for r in 0..q {
        for s in r..q {
            let v = nf * cov_acc[r * q + s].value();
            cov_w[(r, s)] = v;
            cov_w[(s, r)] = v;
        }
    }
    CenteredStats {
        mean_w: shift.iter().map(|m| sqrt_n * m).collect(),
        cov_w,
    }
}

/// Law conditioned on `‖X̄ − center‖₂ < eps`, together with the mass of that ball.
pub fn conditional_restriction(
    law: &MagnetizationLaw,
    center: &[f64],
    eps: f64,
) -> Result<(MagnetizationLaw, f64)> {
    let q = law.q;
    let mut x = vec![0.0; q];
    let mut keep = Vec::new();
    for i in 0..law.len() {
        law.frequencies_into(i, &mut x);
        let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2.sqrt() < eps {
            keep.push(i);
        }
    }
    if keep.is_empty() {
        return Err(PottsError::EmptyRestriction { eps });
    }
    let kept_lp: Vec<f64> = keep.iter().map(|&i| law.log_probs[i]).collect();
    let log_mass = log_sum_exp(&kept_lp);
    let mut counts = Vec::with_capacity(keep.len() * q);
    for &i in &keep {
        counts.extend_from_slice(law.atom_counts(i));
    }
    let log_probs = kept_lp.iter().map(|lp| lp - log_mass).collect();
    let restricted = MagnetizationLaw::from_parts(
        law.n,
        q,
        law.params,
        law.kind,
        law.log_z.map(|z| z + log_mass),
        counts,
        log_probs,
    );
    Ok((restricted, log_mass.exp()))
}

/// Total variation distance between two laws on the same N and q, matching atoms by counts.
pub fn total_variation(a: &MagnetizationLaw, b: &MagnetizationLaw) -> f64 {
    let mut map: HashMap<&[u32], (f64, f64)> = HashMap::new();
    for i in 0..a.len() {
        map.entry(a.atom_counts(i)).or_insert((0.0, 0.0)).0 += a.prob(i);
    }
    for i in 0..b.len() {
        map.entry(b.atom_counts(i)).or_insert((0.0, 0.0)).1 += b.prob(i);
    }
    let mut keys: Vec<&&[u32]> = map.keys().collect();
    keys.sort();
    0.5 * keys
        .iter()
        .map(|k| (map[**k].0 - map[**k].1).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: u32, q: u32, beta: f64, h: f64) -> ModelParams {
        ModelParams::new(p, q, beta, h).unwrap()
    }

    #[test]
    fn log_weight_examples() {
        let single = ColorCounts::new(vec![1, 0, 0]).unwrap();
        assert_eq!(log_weight(&single, &params(3, 3, 1.0, 0.0)), 1.0);
        let pair = ColorCounts::new(vec![1, 1]).unwrap();
        assert!((log_weight(&pair, &params(2, 2, 1.0, 0.0)) - 1.0).abs() < 1e-15);
        // N=4, counts (2,1,1), p=3: 0.7*4*(1/8+1/64+1/64) + 0.2*2
        let c = ColorCounts::new(vec![2, 1, 1]).unwrap();
        let expect = 0.7 * 4.0 * (0.125 + 2.0 / 64.0) + 0.4;
        assert!((log_weight(&c, &params(3, 3, 0.7, 0.2)) - expect).abs() < 1e-15);
    }

    #[test]
    fn single_site_is_uniform_without_field() {
        for q in 2..5 {
            let law = exact_magnetization_law(&params(3, q, 1.7, 0.0), 1).unwrap();
            assert_eq!(law.len(), q as usize);
            for i in 0..law.len() {
                assert!((law.prob(i) - 1.0 / q as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn brute_force_multiplicities() {
        let law = brute_force_law(&params(2, 2, 1e-12, 0.0), 2).unwrap();
        assert_eq!(law.len(), 3);
        let probs: Vec<f64> = (0..3).map(|i| law.prob(i)).collect();
        assert!((probs[0] - 0.25).abs() < 1e-12);
        assert!((probs[1] - 0.5).abs() < 1e-12);
        assert!((probs[2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn grid_cap_is_enforced() {
        let err = exact_magnetization_law_with_cap(&params(2, 3, 1.0, 0.0), 100, 1000).unwrap_err();
        assert!(matches!(err, PottsError::GridTooLarge { .. }));
        let err = brute_force_law(&params(2, 3, 1.0, 0.0), 20).unwrap_err();
        assert!(matches!(err, PottsError::BruteForceTooLarge { .. }));
    }

    #[test]
    fn restriction_edge_cases() {
        let law = exact_magnetization_law(&params(2, 3, 0.5, 0.1), 10).unwrap();
        let uniform = [1.0 / 3.0; 3];
        let (whole, mass) =
            conditional_restriction(&law, &uniform, std::f64::consts::SQRT_2).unwrap();
        assert_eq!(whole.len(), law.len());
        assert!((mass - 1.0).abs() < 1e-12);
        let err = conditional_restriction(&law, &[0.33, 0.33, 0.34], 1e-3).unwrap_err();
        assert!(matches!(err, PottsError::EmptyRestriction { .. }));
    }
}
