use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::classify::{classify, Regime};
use super::functional::{grad_g, softmax_weights};
use crate::error::{PottsError, Result};
use crate::params::ModelParams;

/// The direction `u = (1−q, 1, …, 1)`.
pub fn null_direction(q: usize) -> Vec<f64> {
    let mut u = vec![1.0; q];
    u[0] = 1.0 - q as f64;
    u
}

/// Jacobian of `x ↦ (x_r^{2−p} ∂_r G(x))_r` at a point of the form `x_s`, stored through its
/// five distinct entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaMatrix {
    pub a: f64,
    pub b: f64,
    pub b_prime: f64,
    pub c: f64,
    pub d: f64,
    pub full: DMatrix<f64>,
}

impl LambdaMatrix {
    pub fn q(&self) -> usize {
        self.full.nrows()
    }

    /// `(d−c)^{q−2} [a((q−2)c+d) − (q−1) b b']`.
    pub fn closed_form_det(&self) -> f64 {
        let qf = self.q() as f64;
        (self.d - self.c).powi(self.q() as i32 - 2)
            * (self.a * ((qf - 2.0) * self.c + self.d) - (qf - 1.0) * self.b * self.b_prime)
    }

    pub fn dense_det(&self) -> f64 {
        self.full.clone().lu().determinant()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.full * DVector::from_column_slice(v))
            .iter()
            .cloned()
            .collect()
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.full.clone().svd(false, false).rank(tol)
    }
}

/// Λ at `m = x_s` from the closed-form entries.
pub fn lambda_matrix(m: &[f64], params: &ModelParams) -> Result<LambdaMatrix> {
    let q = m.len();
    if q != params.qn() {
        return Err(PottsError::InvalidParameter(format!(
            "vector has {q} entries, expected {}",
            params.q
        )));
    }
    if m[1..].iter().any(|&x| (x - m[q - 1]).abs() > 1e-12) {
        return Err(PottsError::InvalidParameter(
            "m is not of the x_s form".into(),
        ));
    }
    let pf = params.p as f64;
    let qf = q as f64;
    let e = params.p as i32 - 1;
    let k1 = params.beta * pf * (pf - 1.0);
    let k2 = k1 * k1;
    let (m1, mq) = (m[0], m[q - 1]);
    let a = k1 - k2 * (qf - 1.0) * m1.powi(e) * mq;
    let b = k2 * m1 * mq.powi(e);
    let b_prime = k2 * m1.powi(e) * mq;
    let c = k2 * mq.powi(params.p as i32);
    let d = k1 * (1.0 - k1 * mq.powi(e) * (1.0 - mq));
    let mut full = DMatrix::from_element(q, q, c);
    full[(0, 0)] = a;
    for r in 1..q {
        full[(0, r)] = b;
        full[(r, 0)] = b_prime;
        full[(r, r)] = d;
    }
    Ok(LambdaMatrix {
        a,
        b,
        b_prime,
        c,
        d,
        full,
    })
}

/// Λ at an arbitrary positive `x` from the softmax derivative; coincides with
/// [`lambda_matrix`] at stationary points.
pub fn lambda_dense(x: &[f64], params: &ModelParams) -> DMatrix<f64> {
    let q = x.len();
    let pf = params.p as f64;
    let k1 = params.beta * pf * (pf - 1.0);
    let pi = softmax_weights(x, params);
    DMatrix::from_fn(q, q, |r, s| {
        let a_s = k1 * x[s].powi(params.p as i32 - 2);
        let dpi = pi[r] * (if r == s { 1.0 } else { 0.0 } - pi[s]) * a_s;
        k1 * (if r == s { 1.0 } else { 0.0 } - dpi)
    })
}

/// Low-order coefficients of `t ↦ ∂_1 G(m + t u)` from a least-squares fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicFit {
    /// Constant, linear, quadratic and cubic coefficients.
    pub coefficients: [f64; 4],
    pub f4: f64,
    /// `βp(p−1) m_1^{p−1} m_q q⁴ f4 / 6`, the cubic coefficient implied by the expansion
    /// of the first-order condition around a maximizer with `f' = f'' = f''' = 0`.
    pub predicted_cubic: f64,
}

/// Sample offsets `±[1e-3, 1e-2]`, 20 on each side.
pub fn default_offsets() -> Vec<f64> {
    let mut ts = Vec::new();
    for k in 0..20 {
        let t = 1e-3 + k as f64 * 9e-3 / 19.0;
        ts.push(-t);
        ts.push(t);
    }
    ts
}

/// Degree of the fitted polynomial. Symmetric offsets alias unfitted even powers into the
/// constant and quadratic coefficients, so terms through `t⁷` are fitted and discarded.
const FIT_DEGREE: usize = 7;

/// Coefficients through `t³` of a least-squares polynomial fit of `t ↦ ∂_1 G(m + t u)`.
pub fn fit_gradient_along_u(m: &[f64], params: &ModelParams, offsets: &[f64]) -> Result<[f64; 4]> {
    if offsets.len() <= FIT_DEGREE {
        return Err(PottsError::InvalidParameter(format!(
            "need more than {FIT_DEGREE} offsets, got {}",
            offsets.len()
        )));
    }
    let u = null_direction(m.len());
    let scale = offsets.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let mut design = DMatrix::zeros(offsets.len(), FIT_DEGREE + 1);
    let mut rhs = DVector::zeros(offsets.len());
    for (i, &t) in offsets.iter().enumerate() {
        let x: Vec<f64> = m.iter().zip(&u).map(|(a, b)| a + t * b).collect();
        rhs[i] = grad_g(&x, params)?[0];
        let tau = t / scale;
        for k in 0..=FIT_DEGREE {
            design[(i, k)] = tau.powi(k as i32);
        }
    }
    let sol = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| PottsError::Degenerate(e.to_string()))?;
    let mut coef = [0.0; 4];
    for k in 0..4 {
        coef[k] = sol[k] / scale.powi(k as i32);
    }
    Ok(coef)
}

pub fn predicted_cubic_coefficient(m: &[f64], f4: f64, params: &ModelParams) -> f64 {
    let q = m.len();
    let pf = params.p as f64;
    params.beta
        * pf
        * (pf - 1.0)
        * m[0].powi(params.p as i32 - 1)
        * m[q - 1]
        * (q as f64).powi(4)
        * f4
        / 6.0
}

/// Fits the cubic coefficient at a type-I special point.
pub fn cubic_coefficient_check(
    params: &ModelParams,
    tol_zero: f64,
    offsets: &[f64],
) -> Result<CubicFit> {
    let point = classify(params, tol_zero)?;
    if point.kind != Regime::SpecialI {
        return Err(PottsError::RegimeMismatch {
            expected: Regime::SpecialI,
            found: point.kind,
        });
    }
    let prof = &point.maximizers.profiles[0];
    let coefficients = fit_gradient_along_u(&prof.x, params, offsets)?;
    Ok(CubicFit {
        coefficients,
        f4: prof.f4,
        predicted_cubic: predicted_cubic_coefficient(&prof.x, prof.f4, params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_layout() {
        let params = ModelParams::new(3, 4, 0.9, 0.1).unwrap();
        let m = [0.4, 0.2, 0.2, 0.2];
        let l = lambda_matrix(&m, &params).unwrap();
        assert_eq!(l.full[(0, 2)], l.b);
        assert_eq!(l.full[(3, 0)], l.b_prime);
        assert_eq!(l.full[(2, 2)], l.d);
        assert_eq!(l.full[(1, 3)], l.c);
        assert!(lambda_matrix(&[0.4, 0.3, 0.2, 0.1], &params).is_err());
    }
}
