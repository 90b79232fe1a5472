use nalgebra::DMatrix;

use crate::error::{PottsError, Result};
use crate::numerics::{factorial, falling_factorial, log_sum_exp, softmax};
use crate::params::ModelParams;

/// `H(t) = βΣ t_r^p + h t_1 − Σ t_r log t_r`, with `0 log 0 = 0`.
pub fn h_func(t: &[f64], params: &ModelParams) -> f64 {
    let p = params.p as i32;
    let mut energy = 0.0;
    let mut entropy = 0.0;
    for &x in t {
        energy += x.powi(p);
        if x > 0.0 {
            entropy -= x * x.ln();
        }
    }
    params.beta * energy + params.h * t[0] + entropy
}

/// Logits `pβ x_r^{p−1} + h δ_{r1}` of the mean-field update.
pub fn mean_field_logits(x: &[f64], params: &ModelParams) -> Vec<f64> {
    let pb = params.p as f64 * params.beta;
    let e = params.p as i32 - 1;
    x.iter()
        .enumerate()
        .map(|(r, &v)| pb * v.powi(e) + if r == 0 { params.h } else { 0.0 })
        .collect()
}

/// The mean-field map `x ↦ softmax(pβ x^{p−1} + h δ_1)`; maximizers of `H` are its fixed points.
pub fn softmax_weights(x: &[f64], params: &ModelParams) -> Vec<f64> {
    softmax(&mean_field_logits(x, params))
}

/// `max_r |x_r − softmax_r(x)|`.
pub fn fixed_point_residual(x: &[f64], params: &ModelParams) -> f64 {
    softmax_weights(x, params)
        .iter()
        .zip(x)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// `G(x) = β(p−1)Σ x_r^p − log Σ exp(pβ x_r^{p−1} + h δ_{r1})`.
pub fn g_func(x: &[f64], params: &ModelParams) -> f64 {
    let p = params.p as i32;
    let energy: f64 = x.iter().map(|v| v.powi(p)).sum();
    params.beta * (params.p as f64 - 1.0) * energy - log_sum_exp(&mean_field_logits(x, params))
}

/// `k(x) = βx^p − x log x`.
pub fn k_func(x: f64, params: &ModelParams) -> f64 {
    k_derivative(x, params.p, params.beta, 0)
}

/// `j`-th derivative of `k` for a given `p` and `β`.
pub fn k_derivative(x: f64, p: u32, beta: f64, j: u32) -> f64 {
    match j {
        0 => {
            let ent = if x > 0.0 { x * x.ln() } else { 0.0 };
            beta * x.powi(p as i32) - ent
        }
        1 => beta * p as f64 * x.powi(p as i32 - 1) - x.ln() - 1.0,
        _ => {
            let poly = if j <= p {
                beta * falling_factorial(p, j) * x.powi((p - j) as i32)
            } else {
                0.0
            };
            let sign = if (j - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            poly + sign * factorial(j - 2) / x.powi(j as i32 - 1)
        }
    }
}

/// The profile `x_s = ((1+(q−1)s)/q, (1−s)/q, …, (1−s)/q)`.
pub fn x_profile(s: f64, q: usize) -> Vec<f64> {
    let qf = q as f64;
    let mut x = vec![(1.0 - s) / qf; q];
    x[0] = (1.0 + (qf - 1.0) * s) / qf;
    x
}

/// Unchecked `f^{(order)}(s)`; `beta` and `h` may be any reals here.
pub(crate) fn f_deriv_raw(s: f64, p: u32, q: u32, beta: f64, h: f64, order: u32) -> f64 {
    let qf = q as f64;
    let x1 = (1.0 + (qf - 1.0) * s) / qf;
    let xq = (1.0 - s) / qf;
    let j = order as i32;
    let mut v = (qf - 1.0) * (-1.0 / qf).powi(j) * k_derivative(xq, p, beta, order)
        + ((qf - 1.0) / qf).powi(j) * k_derivative(x1, p, beta, order);
    match order {
        0 => v += h * x1,
        1 => v += h * (qf - 1.0) / qf,
        _ => {}
    }
    v
}

/// `f^{(order)}(s)` for `f(s) = H(x_s)`, by the chain rule through `k`.
pub fn f_derivative(s: f64, params: &ModelParams, order: u32) -> Result<f64> {
    if order > 6 {
        return Err(PottsError::InvalidParameter(format!(
            "derivative order {order} above 6"
        )));
    }
    if !(0.0..1.0).contains(&s) {
        return Err(PottsError::Domain(format!("s = {s} outside [0, 1)")));
    }
    Ok(f_deriv_raw(
        s,
        params.p,
        params.q,
        params.beta,
        params.h,
        order,
    ))
}

fn require_positive(x: &[f64]) -> Result<()> {
    if x.iter().any(|&v| v <= 0.0) {
        return Err(PottsError::Domain(
            "all coordinates must be strictly positive".into(),
        ));
    }
    Ok(())
}

/// `∂G/∂x_r = βp(p−1) x_r^{p−2} (x_r − π_r)` with `π` the mean-field softmax.
pub fn grad_g(x: &[f64], params: &ModelParams) -> Result<Vec<f64>> {
    require_positive(x)?;
    let a = params.beta * params.p as f64 * (params.p as f64 - 1.0);
    let pi = softmax_weights(x, params);
    Ok(x.iter()
        .zip(&pi)
        .map(|(&v, &w)| a * v.powi(params.p as i32 - 2) * (v - w))
        .collect())
}

/// Hessian of `G`.
pub fn hessian_g(x: &[f64], params: &ModelParams) -> Result<DMatrix<f64>> {
    require_positive(x)?;
    let q = x.len();
    let pf = params.p as f64;
    let c = params.beta * pf * (pf - 1.0);
    let pi = softmax_weights(x, params);
    // a_r = d(logit_r)/dx_r
    let a: Vec<f64> = x.iter().map(|v| c * v.powi(params.p as i32 - 2)).collect();
    let a_prime: Vec<f64> = x
        .iter()
        .map(|v| {
            if params.p >= 3 {
                c * (pf - 2.0) * v.powi(params.p as i32 - 3)
            } else {
                0.0
            }
        })
        .collect();
    let mut hess = DMatrix::zeros(q, q);
    for r in 0..q {
        for s in 0..q {
            let mut v = a[r] * pi[r] * pi[s] * a[s];
            if r == s {
                v += a_prime[r] * (x[r] - pi[r]) + a[r] - a[r] * pi[r] * a[r];
            }
            hess[(r, s)] = v;
        }
    }
    Ok(hess)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_at_one_is_beta() {
        let params = ModelParams::new(3, 2, 0.8, 0.0).unwrap();
        assert_eq!(k_func(1.0, &params), 0.8);
    }

    #[test]
    fn pure_entropy_at_uniform() {
        let params = ModelParams::new(2, 4, 1e-14, 0.0).unwrap();
        let t = [0.25; 4];
        assert!((h_func(&t, &params) - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn f_zero_equals_h_on_profile() {
        let params = ModelParams::new(3, 4, 1.3, 0.2).unwrap();
        for &s in &[0.0, 0.3, 0.9] {
            let direct = h_func(&x_profile(s, 4), &params);
            assert!((f_derivative(s, &params, 0).unwrap() - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn f_prime_vanishes_at_zero_without_field() {
        for &(p, q) in &[(2, 2), (3, 3), (4, 5)] {
            let params = ModelParams::new(p, q, 1.7, 0.0).unwrap();
            assert!(f_derivative(0.0, &params, 1).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn domain_errors() {
        let params = ModelParams::new(2, 3, 1.0, 0.0).unwrap();
        assert!(f_derivative(1.0, &params, 1).is_err());
        assert!(f_derivative(0.5, &params, 7).is_err());
        assert!(grad_g(&[0.5, 0.5, 0.0], &params).is_err());
    }
}
