use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functional::{f_deriv_raw, x_profile};
use crate::error::{PottsError, Result};
use crate::params::ModelParams;

/// Uniform scan points on `[0, 1)`.
pub const GRID_POINTS: usize = 10_000;

/// Two maxima whose `f` values differ by at most this much count as tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-10;

/// Polished candidates closer than this in `s` are merged.
const DEDUP_S: f64 = 1e-7;

/// Smallest `1 − s` probed by the scan tail near `s = 1`.
const TAIL_DEPTH: f64 = 14.0;

/// Largest move allowed when refining a degenerate maximum. A sixth-order flat top has
/// `f` at rounding level over a few times `1e-3` in `s`.
const MAX_REFINE_SHIFT: f64 = 2e-2;

/// A point `x_s` of the one-parameter family together with `f` and its even derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryProfile {
    pub s: f64,
    pub x: Vec<f64>,
    pub f_value: f64,
    pub f2: f64,
    pub f4: f64,
    pub f6: f64,
}

impl StationaryProfile {
    pub fn at(s: f64, params: &ModelParams) -> Self {
        let d = |j| f_deriv_raw(s, params.p, params.q, params.beta, params.h, j);
        StationaryProfile {
            s,
            x: x_profile(s, params.qn()),
            f_value: d(0),
            f2: d(2),
            f4: d(4),
            f6: d(6),
        }
    }
}

/// Global maximizers of `H`: the distinct profiles and every maximizer after permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximizerSet {
    pub profiles: Vec<StationaryProfile>,
    pub expanded: Vec<Vec<f64>>,
    /// Index into `profiles` for each entry of `expanded`.
    pub profile_of: Vec<usize>,
    /// Set when a maximizer sits at the last scan point below `s = 1`.
    pub boundary: bool,
}

impl MaximizerSet {
    pub fn len(&self) -> usize {
        self.expanded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expanded.is_empty()
    }

    pub fn profile_for(&self, i: usize) -> &StationaryProfile {
        &self.profiles[self.profile_of[i]]
    }
}

fn scan_points(grid: usize) -> Vec<f64> {
    let mut s: Vec<f64> = (0..grid).map(|i| i as f64 / grid as f64).collect();
    let mut e = (grid as f64).log10() + 0.25;
    while e <= TAIL_DEPTH {
        s.push(1.0 - 10f64.powf(-e));
        e += 0.25;
    }
    s
}

struct Fd {
    p: u32,
    q: u32,
    beta: f64,
    h: f64,
}

impl Fd {
    fn new(params: &ModelParams) -> Self {
        Fd {
            p: params.p,
            q: params.q,
            beta: params.beta,
            h: params.h,
        }
    }

    fn d(&self, s: f64, j: u32) -> f64 {
        f_deriv_raw(s, self.p, self.q, self.beta, self.h, j)
    }
}

fn bisect_derivative(fd: &Fd, mut lo: f64, mut hi: f64) -> f64 {
    // invariant: f'(lo) > 0 > f'(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = fd.d(mid, 1);
        if v > 0.0 {
            lo = mid;
        } else if v < 0.0 {
            hi = mid;
        } else {
            return mid;
        }
    }
    0.5 * (lo + hi)
}

fn newton(fd: &Fd, j: u32, start: f64) -> f64 {
    let mut s = start;
    for _ in 0..100 {
        let step = fd.d(s, j) / fd.d(s, j + 1);
        if !step.is_finite() {
            break;
        }
        let next = (s - step).clamp(0.0, 1.0 - 1e-15);
        if (next - s).abs() <= 1e-17 {
            s = next;
            break;
        }
        s = next;
    }
    s
}

/// At a degenerate maximum the root of `f'` is poorly conditioned, while the root of `f'''`
/// (or of `f⁽⁵⁾`) is simple. Move there when that keeps `f'` at noise level and reduces the
/// degeneracy measure.
fn refine_degenerate(fd: &Fd, s0: f64) -> f64 {
    let mut s = s0;
    let f_scale = fd.d(s, 0).abs().max(1.0);
    let accept = |t: f64, s: f64, level: u32| -> bool {
        (t - s).abs() < MAX_REFINE_SHIFT
            && (0.0..1.0).contains(&t)
            && fd.d(t, 1).abs() <= 1e-12
            && fd.d(t, 0) >= fd.d(s, 0) - 1e-14 * f_scale
            && fd.d(t, level).abs() < fd.d(s, level).abs()
    };
    if fd.d(s, 2).abs() < 1e-4 {
        let t = newton(fd, 3, s);
        if accept(t, s, 2) {
            s = t;
        }
    }
    if fd.d(s, 2).abs() < 1e-4 && fd.d(s, 4).abs() < 1e-2 {
        let t = newton(fd, 5, s);
        if accept(t, s, 4) && fd.d(t, 2).abs() <= fd.d(s, 2).abs().max(1e-12) {
            s = t;
        }
    }
    s
}

/// Polished local maxima of `f` as `(s, f(s), at_tail_end)`.
pub(crate) fn local_maxima(params: &ModelParams, grid: usize) -> Vec<(f64, f64, bool)> {
    let fd = Fd::new(params);
    let pts = scan_points(grid);
    let vals: Vec<f64> = pts.par_iter().map(|&s| fd.d(s, 0)).collect();
    let last = pts.len() - 1;
    let mut out = Vec::new();
    for i in 0..pts.len() {
        let left = if i > 0 {
            vals[i - 1]
        } else {
            f64::NEG_INFINITY
        };
        let right = if i < last {
            vals[i + 1]
        } else {
            f64::NEG_INFINITY
        };
        if !(vals[i] >= left && vals[i] >= right) {
            continue;
        }
        let si = pts[i];
        let di = fd.d(si, 1);
        let s0 = if i == 0 && di <= 0.0 {
            0.0
        } else if i == last && di >= 0.0 {
            si
        } else if di > 0.0 && i < last && fd.d(pts[i + 1], 1) < 0.0 {
            bisect_derivative(&fd, si, pts[i + 1])
        } else if di < 0.0 && i > 0 && fd.d(pts[i - 1], 1) > 0.0 {
            bisect_derivative(&fd, pts[i - 1], si)
        } else {
            si
        };
        let mut s = refine_degenerate(&fd, s0);
        if params.h == 0.0 && s < 1e-9 {
            s = 0.0;
        }
        out.push((s, fd.d(s, 0), i == last));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64, bool)> = Vec::new();
    for cand in out {
        match merged.last_mut() {
            Some(prev) if (cand.0 - prev.0).abs() < DEDUP_S => {
                if cand.1 > prev.1 {
                    *prev = cand;
                }
            }
            _ => merged.push(cand),
        }
    }
    merged
}

fn expand(profiles: &[StationaryProfile], params: &ModelParams) -> (Vec<Vec<f64>>, Vec<usize>) {
    let q = params.qn();
    let mut expanded = Vec::new();
    let mut profile_of = Vec::new();
    for (k, prof) in profiles.iter().enumerate() {
        if params.h == 0.0 && prof.s > 0.0 {
            for i in 0..q {
                let mut x = vec![prof.x[q - 1]; q];
                x[i] = prof.x[0];
                expanded.push(x);
                profile_of.push(k);
            }
        } else {
            expanded.push(prof.x.clone());
            profile_of.push(k);
        }
    }
    (expanded, profile_of)
}

pub fn find_maximizers(params: &ModelParams, tol: f64) -> MaximizerSet {
    find_maximizers_with_grid(params, tol, GRID_POINTS)
}

/// Global maximizers of `f` on `[0, 1)` from a scan with `grid` uniform points.
pub fn find_maximizers_with_grid(params: &ModelParams, tol: f64, grid: usize) -> MaximizerSet {
    let maxima = local_maxima(params, grid);
    let top = maxima.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<&(f64, f64, bool)> = maxima.iter().filter(|m| m.1 >= top - tol).collect();
    let boundary = kept.iter().any(|m| m.2);
    let profiles: Vec<StationaryProfile> = kept
        .iter()
        .map(|m| StationaryProfile::at(m.0, params))
        .collect();
    let (expanded, profile_of) = expand(&profiles, params);
    MaximizerSet {
        profiles,
        expanded,
        profile_of,
        boundary,
    }
}

fn is_ordered(p: u32, q: u32, beta: f64, grid: usize) -> bool {
    if f_deriv_raw(0.0, p, q, beta, 0.0, 2) > 0.0 {
        return true;
    }
    let params = ModelParams { p, q, beta, h: 0.0 };
    let f0 = f_deriv_raw(0.0, p, q, beta, 0.0, 0);
    let best = local_maxima(&params, grid)
        .into_iter()
        .filter(|m| m.0 > 1e-6)
        .map(|m| m.1)
        .fold(f64::NEG_INFINITY, f64::max);
    best > f0 + 4.0 * f64::EPSILON * f0.abs().max(1.0)
}

/// Threshold `β_c(p, q)` at `h = 0`, by bisection on "some `s > 0` beats the uniform profile".
pub fn beta_c(p: u32, q: u32, tol: f64) -> Result<f64> {
    beta_c_with_grid(p, q, tol, GRID_POINTS)
}

pub fn beta_c_with_grid(p: u32, q: u32, tol: f64, grid: usize) -> Result<f64> {
    ModelParams::new(p, q, 1.0, 0.0)?;
    if !(tol > 0.0) {
        return Err(PottsError::InvalidParameter(
            "tolerance must be positive".into(),
        ));
    }
    let mut lo = 1e-3;
    let continuous_bound = (q as f64).powi(p as i32 - 1) / (p as f64 * (p as f64 - 1.0));
    let mut hi = (2.0 * continuous_bound).max(50.0);
    if is_ordered(p, q, lo, grid) || !is_ordered(p, q, hi, grid) {
        return Err(PottsError::BracketFailure(format!(
            "[{lo}, {hi}] does not straddle the ordering transition"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if is_ordered(p, q, mid, grid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_tail_reaches_close_to_one() {
        let pts = scan_points(GRID_POINTS);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(1.0 - pts.last().unwrap() < 1e-13);
    }

    #[test]
    fn weak_coupling_gives_uniform() {
        let params = ModelParams::new(2, 3, 0.1, 0.0).unwrap();
        let set = find_maximizers(&params, DEFAULT_TIE_TOL);
        assert_eq!(set.len(), 1);
        assert_eq!(set.profiles[0].s, 0.0);
    }

    #[test]
    fn ising_threshold_is_one() {
        let b = beta_c(2, 2, 1e-10).unwrap();
        assert!((b - 1.0).abs() < 1e-9);
    }
}
