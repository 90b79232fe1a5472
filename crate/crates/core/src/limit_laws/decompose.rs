use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};
use crate::free_energy::null_direction;

/// `X̄ − m_* = N^{-1/4} T u + N^{-1/2} V` with `u = (1−q, 1, …, 1)` and `V_1 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TVDecomposition {
    pub t: f64,
    pub v: Vec<f64>,
}

impl TVDecomposition {
    pub fn recompose(&self, mstar: &[f64], n: u32) -> Vec<f64> {
        let nf = n as f64;
        let u = null_direction(mstar.len());
        mstar
            .iter()
            .zip(&u)
            .zip(&self.v)
            .map(|((m, ur), vr)| m + nf.powf(-0.25) * self.t * ur + vr / nf.sqrt())
            .collect()
    }
}

pub fn decompose_tv(xbar: &[f64], mstar: &[f64], n: u32) -> TVDecomposition {
    let q = xbar.len();
    let nf = n as f64;
    let d1 = xbar[0] - mstar[0];
    let t = nf.powf(0.25) * d1 / (1.0 - q as f64);
    // N^{-1/4} T u_r equals d1/(1−q) for every r ≥ 2
    let shift = d1 / (1.0 - q as f64);
    let mut v = vec![0.0; q];
    for r in 1..q {
        v[r] = nf.sqrt() * ((xbar[r] - mstar[r]) - shift);
    }
    TVDecomposition { t, v }
}

/// `F = N^{1/6}(x̄_1 − m_1)/(1−q)`, defined for two colors only.
pub fn decompose_f(xbar: &[f64], mstar: &[f64], n: u32) -> Result<f64> {
    if xbar.len() != 2 || mstar.len() != 2 {
        return Err(PottsError::InvalidParameter(format!(
            "F decomposition needs q = 2, got q = {}",
            xbar.len()
        )));
    }
    Ok(-(n as f64).powf(1.0 / 6.0) * (xbar[0] - mstar[0]))
}
