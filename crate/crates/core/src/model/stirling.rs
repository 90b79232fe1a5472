use crate::error::{PottsError, Result};
use crate::free_energy::h_func;
use crate::numerics::LogFactorial;
use crate::params::ModelParams;

/// Exact and Stirling-approximated log-mass of the magnetization value `v`.
///
/// The exact side is `log(N!/∏(N v_r)!) + N(βΣv^p + h v_1)`; the approximation is
/// `−(q−1)/2·log(2πN) − ½Σ log v_r + N·H(v)`. Their difference is `O(1/N)`.
pub fn stirling_density_check(v: &[f64], params: &ModelParams, n: u32) -> Result<(f64, f64)> {
    params.validate()?;
    if v.len() != params.qn() {
        return Err(PottsError::InvalidParameter(format!(
            "vector has {} entries, expected q = {}",
            v.len(),
            params.q
        )));
    }
    let nf = n as f64;
    let mut counts = Vec::with_capacity(v.len());
    for &x in v {
        if x <= 0.0 {
            return Err(PottsError::Domain(
                "Stirling check needs all coordinates > 0".into(),
            ));
        }
        let c = (x * nf).round();
        if (c - x * nf).abs() > 1e-9 {
            return Err(PottsError::Domain(format!(
                "N·v = {} is not an integer",
                x * nf
            )));
        }
        counts.push(c as usize);
    }
    if counts.iter().sum::<usize>() != n as usize {
        return Err(PottsError::Domain("N·v does not sum to N".into()));
    }
    let lf = LogFactorial::new(n as usize);
    let mut exact = lf.get(n as usize);
    for &c in &counts {
        exact -= lf.get(c);
    }
    let power_sum: f64 = v.iter().map(|x| x.powi(params.p as i32)).sum();
    exact += nf * (params.beta * power_sum + params.h * v[0]);

    let k = (v.len() - 1) as f64;
    let approx = -0.5 * k * (2.0 * std::f64::consts::PI * nf).ln()
        - 0.5 * v.iter().map(|x| x.ln()).sum::<f64>()
        + nf * h_func(v, params);
    Ok((exact, approx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_and_lattice_errors() {
        let params = ModelParams::new(2, 2, 0.5, 0.0).unwrap();
        assert!(stirling_density_check(&[1.0, 0.0], &params, 10).is_err());
        assert!(stirling_density_check(&[0.55, 0.45], &params, 10).is_err());
    }

    #[test]
    fn half_half_at_hundred() {
        let params = ModelParams::new(2, 2, 0.5, 0.0).unwrap();
        let (exact, approx) = stirling_density_check(&[0.5, 0.5], &params, 100).unwrap();
        assert!((exact - approx).abs() < 0.01);
    }
}
