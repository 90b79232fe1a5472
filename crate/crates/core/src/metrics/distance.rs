use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::limit_laws::{gaussian_directional_cdf, GaussianLimit};
use crate::model::MagnetizationLaw;
use crate::numerics::{dot, helmert_basis, project_zero_sum, CompensatedSum};

/// Number of pseudo-random zero-sum directions added to the Helmert basis.
pub const RANDOM_DIRECTIONS: usize = 32;

const DIRECTION_SEED: u64 = 0x5eed_d1ec;

/// Projected values this close to zero are set to zero.
const SNAP: f64 = 1e-10;

/// Sorts `(value, prob)` atoms by value and merges equal values.
pub fn sort_atoms(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => out.push((v, p)),
        }
    }
    out
}

/// `sup_x |F_atoms(x) − cdf(x)|`, checked on both sides of every atom.
///
/// `atoms` must be sorted by value and `cdf` continuous.
pub fn kolmogorov_distance_1d<F: Fn(f64) -> f64>(atoms: &[(f64, f64)], cdf: F) -> f64 {
    kolmogorov_distance_1d_steps(atoms, &cdf, &cdf)
}

/// Same as [`kolmogorov_distance_1d`] for a limit that may jump: `cdf_left(x)` is `G(x⁻)`.
pub fn kolmogorov_distance_1d_steps<F, L>(atoms: &[(f64, f64)], cdf: F, cdf_left: L) -> f64
where
    F: Fn(f64) -> f64,
    L: Fn(f64) -> f64,
{
    let mut acc = CompensatedSum::new();
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < atoms.len() {
        let x = atoms[i].0;
        let before = acc.value();
        while i < atoms.len() && atoms[i].0 == x {
            acc.add(atoms[i].1);
            i += 1;
        }
        worst = worst
            .max((before - cdf_left(x)).abs())
            .max((acc.value() - cdf(x)).abs());
    }
    worst
}

/// `sup_x |F_a(x) − F_b(x)|` between two step functions with sorted atoms.
pub fn kolmogorov_distance_discrete(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (CompensatedSum::new(), CompensatedSum::new());
    let mut worst = 0.0f64;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(u), Some(v)) => u.0.min(v.0),
            (Some(u), None) => u.0,
            (None, Some(v)) => v.0,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i].0 == x {
            fa.add(a[i].1);
            i += 1;
        }
        while j < b.len() && b[j].0 == x {
            fb.add(b[j].1);
            j += 1;
        }
        worst = worst.max((fa.value() - fb.value()).abs());
    }
    worst
}

/// Helmert basis columns followed by [`RANDOM_DIRECTIONS`] fixed unit zero-sum directions.
pub fn default_directions(q: usize) -> Vec<Vec<f64>> {
    let basis = helmert_basis(q);
    let mut dirs: Vec<Vec<f64>> = (0..q - 1)
        .map(|k| basis.column(k).iter().cloned().collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(DIRECTION_SEED);
    while dirs.len() < q - 1 + RANDOM_DIRECTIONS {
        let g: Vec<f64> = (0..q).map(|_| StandardNormal.sample(&mut rng)).collect();
        let d = project_zero_sum(&g);
        let norm = dot(&d, &d).sqrt();
        if norm > 1e-8 {
            dirs.push(d.iter().map(|v| v / norm).collect());
        }
    }
    dirs
}

fn project_direction(direction: &[f64]) -> Vec<f64> {
    let scale = dot(direction, direction).sqrt();
    let d = project_zero_sum(direction);
    if dot(&d, &d).sqrt() <= 1e-12 * scale {
        vec![0.0; d.len()]
    } else {
        d
    }
}

/// Half-space discrepancy of weighted points in `R^q` against a centered Gaussian.
pub fn halfspace_discrepancy_points(
    points: &[Vec<f64>],
    probs: &[f64],
    limit: &GaussianLimit,
    directions: &[Vec<f64>],
) -> f64 {
    directions
        .iter()
        .map(|dir| {
            let d = project_direction(dir);
            let atoms: Vec<(f64, f64)> = points
                .iter()
                .zip(probs)
                .map(|(w, &p)| {
                    let v = dot(&d, w);
                    (if v.abs() <= SNAP { 0.0 } else { v }, p)
                })
                .collect();
            let atoms = sort_atoms(atoms);
            if limit.is_degenerate_direction(&d) {
                let step = |x: f64| if x >= 0.0 { 1.0 } else { 0.0 };
                let step_left = |x: f64| if x > 0.0 { 1.0 } else { 0.0 };
                kolmogorov_distance_1d_steps(&atoms, step, step_left)
            } else {
                kolmogorov_distance_1d(&atoms, |x| gaussian_directional_cdf(&d, limit, x))
            }
        })
        .fold(0.0, f64::max)
}

/// Largest Kolmogorov distance between `dᵀW_N`, `W_N = √N(X̄ − center)`, and `dᵀΣ^{1/2}Z` over
/// the directions (projected onto the zero-sum hyperplane).
pub fn halfspace_discrepancy(
    law: &MagnetizationLaw,
    center: &[f64],
    limit: &GaussianLimit,
    directions: &[Vec<f64>],
) -> f64 {
    let sqrt_n = (law.n() as f64).sqrt();
    let points: Vec<Vec<f64>> = (0..law.len())
        .map(|i| {
            law.frequencies(i)
                .iter()
                .zip(center)
                .map(|(x, c)| sqrt_n * (x - c))
                .collect()
        })
        .collect();
    let probs: Vec<f64> = (0..law.len()).map(|i| law.prob(i)).collect();
    halfspace_discrepancy_points(&points, &probs, limit, directions)
}
