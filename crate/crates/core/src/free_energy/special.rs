use serde::{Deserialize, Serialize};

use super::functional::f_deriv_raw;
use super::maximize::{find_maximizers, DEFAULT_TIE_TOL};
use crate::error::Result;
use crate::params::ModelParams;

/// A parameter point whose unique maximizer `x_s` has `f' = f'' = f''' = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialPoint {
    pub beta: f64,
    pub h: f64,
    pub s: f64,
}

impl SpecialPoint {
    pub fn params(&self, p: u32, q: u32) -> ModelParams {
        ModelParams {
            p,
            q,
            beta: self.beta,
            h: self.h,
        }
    }
}

const SCAN: usize = 4000;

/// `f` is affine in `β` and `h`; solve `f''(s) = 0` for `β`.
fn beta_of_s(s: f64, p: u32, q: u32) -> f64 {
    let entropy = f_deriv_raw(s, p, q, 0.0, 0.0, 2);
    let energy = f_deriv_raw(s, p, q, 1.0, 0.0, 2) - entropy;
    -entropy / energy
}

fn third_along_curve(s: f64, p: u32, q: u32) -> f64 {
    f_deriv_raw(s, p, q, beta_of_s(s, p, q), 0.0, 3)
}

/// Field that makes `s` stationary at the given `β`.
fn h_of_s(s: f64, p: u32, q: u32, beta: f64) -> f64 {
    let qf = q as f64;
    -f_deriv_raw(s, p, q, beta, 0.0, 1) * qf / (qf - 1.0)
}

/// All special points with `β > 0` and `h ≥ 0` for the given `(p, q)`.
///
/// Along the curve `f''(s) = 0` (solved for `β`) the roots of `f'''` are bracketed on a
/// scan of `s` and bisected; `h` then follows from `f'(s) = 0`. A root counts only if
/// `x_s` is the unique global maximizer at the resulting `(β, h)`.
pub fn locate_special_points(p: u32, q: u32) -> Result<Vec<SpecialPoint>> {
    ModelParams::new(p, q, 1.0, 0.0)?;
    let mut roots = Vec::new();
    if third_along_curve(0.0, p, q).abs() <= 1e-13 {
        roots.push(0.0);
    }
    let pts: Vec<f64> = (0..SCAN).map(|i| i as f64 / SCAN as f64).collect();
    let vals: Vec<f64> = pts.iter().map(|&s| third_along_curve(s, p, q)).collect();
    for i in 0..SCAN - 1 {
        if i > 0 && vals[i] == 0.0 {
            roots.push(pts[i]);
        } else if vals[i] * vals[i + 1] < 0.0 {
            let (mut lo, mut hi) = (pts[i], pts[i + 1]);
            let lo_sign = vals[i].signum();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if third_along_curve(mid, p, q).signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    let mut out = Vec::new();
    for s in roots {
        let beta = beta_of_s(s, p, q);
        if !(beta.is_finite() && beta > 0.0) {
            continue;
        }
        let mut h = h_of_s(s, p, q, beta);
        if h <= 0.0 {
            if h > -1e-12 {
                h = 0.0;
            } else {
                continue;
            }
        }
        let params = ModelParams { p, q, beta, h };
        let set = find_maximizers(&params, DEFAULT_TIE_TOL);
        if set.len() == 1 && (set.profiles[0].s - s).abs() < 1e-5 {
            out.push(SpecialPoint { beta, h, s });
        }
    }
    Ok(out)
}
