use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};
use crate::free_energy::Regime;
use crate::numerics::ols_slope;
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Slope of `log d` against `log N`.
    pub slope: f64,
    /// Slope of `log(d / log N)` against `log N`.
    pub slope_with_log_correction: f64,
}

pub fn rate_fit(ns: &[u32], distances: &[f64]) -> Result<RateFit> {
    if ns.len() != distances.len() {
        return Err(PottsError::InvalidParameter(
            "Ns and distances differ in length".into(),
        ));
    }
    if ns.len() < 4 {
        return Err(PottsError::InvalidParameter(format!(
            "rate fit needs >= 4 points, got {}",
            ns.len()
        )));
    }
    if ns.iter().any(|&n| n < 2) {
        return Err(PottsError::InvalidParameter("rate fit needs N >= 2".into()));
    }
    if distances.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(PottsError::Degenerate(
            "distances must be finite and > 0".into(),
        ));
    }
    let log_n: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let log_d: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
    let log_dc: Vec<f64> = log_d.iter().zip(&log_n).map(|(d, l)| d - l.ln()).collect();
    let degenerate = || PottsError::Degenerate("log N has zero variance".into());
    Ok(RateFit {
        slope: ols_slope(&log_n, &log_d).ok_or_else(degenerate)?,
        slope_with_log_correction: ols_slope(&log_n, &log_dc).ok_or_else(degenerate)?,
    })
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman_correlation(x: &[f64], y: &[f64]) -> Option<f64> {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = 0.5 * (i + j) as f64 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

/// A distance series over the N-grid with its fitted slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSeries {
    pub label: String,
    pub distances: Vec<f64>,
    /// Absent with fewer than four points or a non-positive distance.
    pub fitted_slope: Option<f64>,
    pub fitted_slope_with_log_correction: Option<f64>,
}

impl DistanceSeries {
    pub fn new(label: impl Into<String>, ns: &[u32], distances: Vec<f64>) -> Self {
        let fit = rate_fit(ns, &distances).ok();
        DistanceSeries {
            label: label.into(),
            fitted_slope: fit.map(|f| f.slope),
            fitted_slope_with_log_correction: fit.map(|f| f.slope_with_log_correction),
            distances,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub regime: Regime,
    pub params: ModelParams,
    pub ns: Vec<u32>,
    pub primary: DistanceSeries,
    /// `V_N` half-space series at type-I special points.
    pub secondary: Option<DistanceSeries>,
    /// `E T_N⁴` or `E F_N⁶` per N at special points.
    pub scale_moments: Option<Vec<f64>>,
    /// Ball radius used at critical points.
    pub eps: Option<f64>,
}

impl RateReport {
    pub fn distances(&self) -> &[f64] {
        &self.primary.distances
    }

    pub fn fitted_slope(&self) -> Option<f64> {
        self.primary.fitted_slope
    }

    pub fn fitted_slope_with_log_correction(&self) -> Option<f64> {
        self.primary.fitted_slope_with_log_correction
    }

    /// `N,distance[,secondary][,scale_moment]` rows with 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        use crate::model::io::format_f64;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["N".to_string(), self.primary.label.clone()];
        if let Some(s) = &self.secondary {
            header.push(s.label.clone());
        }
        if self.scale_moments.is_some() {
            header.push("scale_moment".into());
        }
        w.write_record(&header)?;
        for (k, n) in self.ns.iter().enumerate() {
            let mut row = vec![n.to_string(), format_f64(self.primary.distances[k])];
            if let Some(s) = &self.secondary {
                row.push(format_f64(s.distances[k]));
            }
            if let Some(m) = &self.scale_moments {
                row.push(format_f64(m[k]));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
