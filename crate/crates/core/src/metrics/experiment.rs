use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::{
    default_directions, halfspace_discrepancy, halfspace_discrepancy_points,
    kolmogorov_distance_1d, sort_atoms,
};
use super::rates::{DistanceSeries, RateReport};
use crate::error::{PottsError, Result};
use crate::free_energy::{classify, ClassifiedPoint, Regime, DEFAULT_TOL_ZERO};
use crate::limit_laws::{
    decompose_f, decompose_tv, empirical_limit_scale, mixture_weights, GaussianLimit, LimitShape,
};
use crate::model::{
    centered_stats, conditional_restriction, exact_magnetization_law_with_cap,
    mcmc_magnetization_law, ChainConfig, MagnetizationLaw, DEFAULT_ENUMERATION_CAP,
};
use crate::numerics::{composition_count, euclidean_distance};
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub tol_zero: f64,
    /// Ball radius at critical points; defaults to a third of the closest maximizer pair.
    pub eps: Option<f64>,
    /// Fail with a regime mismatch unless the point classifies as this.
    pub expected: Option<Regime>,
    pub enumeration_cap: u128,
    /// Glauber fallback for N above the enumeration cap.
    pub mcmc: Option<ChainConfig>,
    /// Half-space directions; defaults to [`default_directions`].
    pub directions: Option<Vec<Vec<f64>>>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            tol_zero: DEFAULT_TOL_ZERO,
            eps: None,
            expected: None,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            mcmc: None,
            directions: None,
        }
    }
}

/// Exact law when the grid fits under `cap`, else the Glauber fallback if configured.
pub fn law_for(
    params: &ModelParams,
    n: u32,
    cap: u128,
    mcmc: Option<&ChainConfig>,
) -> Result<MagnetizationLaw> {
    let atoms = composition_count(n as u64, params.q as u64);
    match (atoms > cap, mcmc) {
        (true, Some(chain)) => mcmc_magnetization_law(params, n, chain),
        _ => exact_magnetization_law_with_cap(params, n, cap),
    }
}

fn check_grid(ns: &[u32]) -> Result<()> {
    if ns.is_empty() {
        return Err(PottsError::InvalidParameter("N grid is empty".into()));
    }
    if ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PottsError::InvalidParameter(
            "Ns must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in 0..i {
            best = best.min(euclidean_distance(&points[i], &points[j]));
        }
    }
    best
}

/// Ball radius for critical conditioning, rejecting radii at which balls meet.
fn critical_eps(point: &ClassifiedPoint, eps: Option<f64>) -> Result<f64> {
    let min_distance = min_pairwise_distance(&point.maximizers.expanded);
    let eps = eps.unwrap_or(min_distance / 3.0);
    if !(eps > 0.0) {
        return Err(PottsError::InvalidParameter(format!(
            "eps must be > 0, got {eps}"
        )));
    }
    if 2.0 * eps >= min_distance {
        return Err(PottsError::OverlappingBalls { eps, min_distance });
    }
    Ok(eps)
}

fn expect_regime(point: &ClassifiedPoint, expected: Option<Regime>) -> Result<()> {
    match expected {
        Some(e) if e != point.kind => Err(PottsError::RegimeMismatch {
            expected: e,
            found: point.kind,
        }),
        _ => Ok(()),
    }
}

/// Gaussian law fitted to `W_N = √N(X̄ − center)` and its half-space discrepancy.
fn gaussian_discrepancy(
    law: &MagnetizationLaw,
    center: &[f64],
    directions: &[Vec<f64>],
) -> Result<f64> {
    let stats = centered_stats(law, center);
    let limit = GaussianLimit::new(stats.cov_w)?;
    Ok(halfspace_discrepancy(law, center, &limit, directions))
}

struct PerN {
    distance: f64,
    secondary: Option<f64>,
    moment: Option<f64>,
}

fn special_i(law: &MagnetizationLaw, mstar: &[f64], directions: &[Vec<f64>]) -> Result<PerN> {
    let n = law.n();
    let limit = empirical_limit_scale(law, mstar, LimitShape::Shape4)?;
    let mut t_atoms = Vec::with_capacity(law.len());
    let mut v_points = Vec::with_capacity(law.len());
    let mut probs = Vec::with_capacity(law.len());
    for i in 0..law.len() {
        let dec = decompose_tv(&law.frequencies(i), mstar, n);
        let p = law.prob(i);
        t_atoms.push((dec.t, p));
        v_points.push(dec.v);
        probs.push(p);
    }
    let distance = kolmogorov_distance_1d(&sort_atoms(t_atoms), |x| limit.cdf(x));
    let q = mstar.len();
    let mut mean = vec![0.0; q];
    for (v, p) in v_points.iter().zip(&probs) {
        for r in 0..q {
            mean[r] += p * v[r];
        }
    }
    let cov = nalgebra::DMatrix::from_fn(q, q, |r, s| {
        v_points
            .iter()
            .zip(&probs)
            .map(|(v, p)| p * (v[r] - mean[r]) * (v[s] - mean[s]))
            .sum()
    });
    let v_limit = GaussianLimit::new(cov)?;
    let secondary = halfspace_discrepancy_points(&v_points, &probs, &v_limit, directions);
    Ok(PerN {
        distance,
        secondary: Some(secondary),
        moment: Some(limit.scale_moment),
    })
}

fn special_ii(law: &MagnetizationLaw, mstar: &[f64]) -> Result<PerN> {
    let n = law.n();
    let limit = empirical_limit_scale(law, mstar, LimitShape::Shape6)?;
    let atoms = (0..law.len())
        .map(|i| Ok((decompose_f(&law.frequencies(i), mstar, n)?, law.prob(i))))
        .collect::<Result<Vec<_>>>()?;
    let distance = kolmogorov_distance_1d(&sort_atoms(atoms), |x| limit.cdf(x));
    Ok(PerN {
        distance,
        secondary: None,
        moment: Some(limit.scale_moment),
    })
}

/// Distances between the finite-N law and its limit across `ns`, chosen by the regime:
/// half-space discrepancy of `W_N` (regular, and per ball at critical points), Kolmogorov
/// distance of `T_N` to the shape-4 law plus half-space discrepancy of `V_N` (type I), and
/// Kolmogorov distance of `F_N` to the shape-6 law (type II).
pub fn berry_esseen_experiment(
    params: &ModelParams,
    ns: &[u32],
    options: &ExperimentOptions,
) -> Result<RateReport> {
    check_grid(ns)?;
    let point = classify(params, options.tol_zero)?;
    expect_regime(&point, options.expected)?;
    let q = params.qn();
    let directions = options
        .directions
        .clone()
        .unwrap_or_else(|| default_directions(q));
    let mstar = point.maximizers.expanded[0].clone();
    let eps = match point.kind {
        Regime::Critical => Some(critical_eps(&point, options.eps)?),
        _ => None,
    };
    let rows: Vec<PerN> = ns
        .par_iter()
        .map(|&n| -> Result<PerN> {
            let law = law_for(params, n, options.enumeration_cap, options.mcmc.as_ref())?;
            match point.kind {
                Regime::Regular => Ok(PerN {
                    distance: gaussian_discrepancy(&law, &mstar, &directions)?,
                    secondary: None,
                    moment: None,
                }),
                Regime::Critical => {
                    let mut worst = 0.0f64;
                    for m in &point.maximizers.expanded {
                        let (restricted, _) =
                            conditional_restriction(&law, m, eps.expect("critical"))?;
                        worst = worst.max(gaussian_discrepancy(&restricted, m, &directions)?);
                    }
                    Ok(PerN {
                        distance: worst,
                        secondary: None,
                        moment: None,
                    })
                }
                Regime::SpecialI => special_i(&law, &mstar, &directions),
                Regime::SpecialII => special_ii(&law, &mstar),
            }
        })
        .collect::<Result<_>>()?;
    let label = match point.kind {
        Regime::Regular | Regime::Critical => "halfspace_w",
        Regime::SpecialI => "kolmogorov_t",
        Regime::SpecialII => "kolmogorov_f",
    };
    let primary = DistanceSeries::new(label, ns, rows.iter().map(|r| r.distance).collect());
    let secondary = (point.kind == Regime::SpecialI).then(|| {
        DistanceSeries::new(
            "halfspace_v",
            ns,
            rows.iter().map(|r| r.secondary.unwrap_or(0.0)).collect(),
        )
    });
    let scale_moments = matches!(point.kind, Regime::SpecialI | Regime::SpecialII)
        .then(|| rows.iter().map(|r| r.moment.unwrap_or(f64::NAN)).collect());
    Ok(RateReport {
        regime: point.kind,
        params: *params,
        ns: ns.to_vec(),
        primary,
        secondary,
        scale_moments,
        eps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanWReport {
    pub ns: Vec<u32>,
    /// `√N‖E W_N‖∞ = N‖E X̄_N − m_*‖∞` per N.
    pub values: Vec<f64>,
}

impl MeanWReport {
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

pub fn mean_w_scaling_check(params: &ModelParams, ns: &[u32]) -> Result<MeanWReport> {
    check_grid(ns)?;
    let point = classify(params, DEFAULT_TOL_ZERO)?;
    expect_regime(&point, Some(Regime::Regular))?;
    let mstar = &point.maximizers.expanded[0];
    let values = ns
        .par_iter()
        .map(|&n| -> Result<f64> {
            let law = exact_magnetization_law_with_cap(params, n, DEFAULT_ENUMERATION_CAP)?;
            let stats = centered_stats(&law, mstar);
            let sup = stats.mean_w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            Ok((n as f64).sqrt() * sup)
        })
        .collect::<Result<_>>()?;
    Ok(MeanWReport {
        ns: ns.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallWeight {
    pub maximizer: Vec<f64>,
    pub ball_mass: f64,
    pub weight: f64,
    /// `√N |ball_mass − weight|`.
    pub scaled_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalWeights {
    pub n: u32,
    pub eps: f64,
    pub balls: Vec<BallWeight>,
    /// Mass outside every ball.
    pub residual_mass: f64,
}

/// Exact ball masses around each maximizer against the τ weights.
pub fn critical_weights_check(
    params: &ModelParams,
    n: u32,
    eps: Option<f64>,
) -> Result<CriticalWeights> {
    let point = classify(params, DEFAULT_TOL_ZERO)?;
    expect_regime(&point, Some(Regime::Critical))?;
    let eps = critical_eps(&point, eps)?;
    let set = &point.maximizers;
    let profiles: Vec<_> = (0..set.len()).map(|i| set.profile_for(i).clone()).collect();
    let weights = mixture_weights(&profiles, params, DEFAULT_TOL_ZERO)?;
    let law = exact_magnetization_law_with_cap(params, n, DEFAULT_ENUMERATION_CAP)?;
    let sqrt_n = (n as f64).sqrt();
    let mut balls = Vec::with_capacity(set.len());
    for (m, &w) in set.expanded.iter().zip(&weights) {
        let (_, mass) = conditional_restriction(&law, m, eps)?;
        balls.push(BallWeight {
            maximizer: m.clone(),
            ball_mass: mass,
            weight: w,
            scaled_gap: sqrt_n * (mass - w).abs(),
        });
    }
    // summed directly so the tail is not lost to cancellation against 1
    let residual_mass = (0..law.len())
        .filter(|&i| {
            let x = law.frequencies(i);
            set.expanded
                .iter()
                .all(|m| euclidean_distance(&x, m) >= eps)
        })
        .map(|i| law.prob(i))
        .sum();
    Ok(CriticalWeights {
        n,
        eps,
        balls,
        residual_mass,
    })
}
