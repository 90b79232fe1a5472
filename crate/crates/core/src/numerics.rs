//! Small numerical building blocks shared by the other modules.

use nalgebra::DMatrix;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `log(sum(exp(values)))`, shifted by the maximum and summed with compensation.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let total = compensated_sum(values.iter().map(|v| (v - max).exp()));
    max + total.ln()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total = compensated_sum(out.iter().cloned());
    for o in out.iter_mut() {
        *o /= total;
    }
    out
}

/// Table of `ln k!` for `k = 0..=n`, built by compensated accumulation of `ln k`.
#[derive(Debug, Clone)]
pub struct LogFactorial {
    table: Vec<f64>,
}

impl LogFactorial {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        let mut acc = CompensatedSum::new();
        table.push(0.0);
        for k in 1..=n {
            acc.add((k as f64).ln());
            table.push(acc.value());
        }
        LogFactorial { table }
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.table[k]
    }
}

/// Number of compositions of `n` into `q` nonnegative parts, `C(n+q-1, q-1)`, saturating.
pub fn composition_count(n: u64, q: u64) -> u128 {
    let k = q.saturating_sub(1) as u128;
    let top = n as u128 + k;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (top - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul(top - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Orthonormal Helmert basis of the zero-sum subspace of R^q, stored as a q x (q-1) matrix.
///
/// Column `j` is `(1,…,1,-(j+1),0,…,0)/sqrt((j+1)(j+2))` with `j+1` leading ones.
pub fn helmert_basis(q: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(q, q - 1);
    for j in 0..q - 1 {
        let k = (j + 1) as f64;
        let norm = (k * (k + 1.0)).sqrt();
        for i in 0..=j {
            b[(i, j)] = 1.0 / norm;
        }
        b[(j + 1, j)] = -k / norm;
    }
    b
}

/// Projection of `d` onto the zero-sum subspace.
pub fn project_zero_sum(d: &[f64]) -> Vec<f64> {
    let mean = compensated_sum(d.iter().cloned()) / d.len() as f64;
    d.iter().map(|x| x - mean).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    // statrs' erfc is only good to ~1e-11; the incomplete gamma is good to ~1e-16
    if x == 0.0 {
        return 0.5;
    }
    let tail = 0.5 * statrs::function::gamma::gamma_ur(0.5, 0.5 * x * x);
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Regularized lower incomplete gamma function `P(a, x)`.
pub fn gamma_lower_regularized(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    statrs::function::gamma::gamma_lr(a, x)
}

/// Regularized upper incomplete gamma function `Q(a, x) = 1 − P(a, x)`.
pub fn gamma_upper_regularized(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    statrs::function::gamma::gamma_ur(a, x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Upper tail probability of a chi-square variable with `dof` degrees of freedom.
pub fn chi_square_sf(dof: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(dof / 2.0, x / 2.0)
}

/// Ordinary least-squares slope of `y` on `x`; `None` when `x` has no spread.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 0.0 || !sxx.is_finite() {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Falling factorial `p (p-1) … (p-j+1)`; zero once `j > p`.
pub fn falling_factorial(p: u32, j: u32) -> f64 {
    if j > p {
        return 0.0;
    }
    (0..j).map(|i| (p - i) as f64).product()
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helmert_columns_are_orthonormal_and_zero_sum() {
        for q in 2..7 {
            let b = helmert_basis(q);
            let gram = b.transpose() * &b;
            for i in 0..q - 1 {
                assert!(b.column(i).sum().abs() < 1e-15);
                for j in 0..q - 1 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[(i, j)] - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn composition_count_matches_binomials() {
        assert_eq!(composition_count(3, 2), 4);
        assert_eq!(composition_count(4, 3), 15);
        assert_eq!(composition_count(10, 1), 1);
        assert_eq!(composition_count(1600, 3), 1601 * 1602 / 2);
    }

    #[test]
    fn log_factorial_matches_log_gamma() {
        let lf = LogFactorial::new(5000);
        for &k in &[0usize, 1, 2, 10, 100, 4999] {
            let reference = ln_gamma(k as f64 + 1.0);
            assert!((lf.get(k) - reference).abs() <= 1e-12 * reference.abs().max(1.0));
        }
    }

    #[test]
    fn log_sum_exp_handles_large_values() {
        let v = [1000.0, 1000.0];
        assert!((log_sum_exp(&v) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..10 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-15).abs() < 1e-28);
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((normal_cdf(-1.0) - 0.15865525393145707).abs() < 1e-15);
    }
}
