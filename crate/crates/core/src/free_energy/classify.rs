use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::maximize::{find_maximizers, MaximizerSet, DEFAULT_TIE_TOL};
use crate::error::{PottsError, Result};
use crate::numerics::helmert_basis;
use crate::params::ModelParams;

/// Numeric zero used for eigenvalues and `f`-derivatives during classification.
pub const DEFAULT_TOL_ZERO: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Regular,
    Critical,
    SpecialI,
    SpecialII,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Regular => "Regular",
            Regime::Critical => "Critical",
            Regime::SpecialI => "SpecialI",
            Regime::SpecialII => "SpecialII",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = PottsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "regular" => Ok(Regime::Regular),
            "critical" => Ok(Regime::Critical),
            "speciali" | "special1" => Ok(Regime::SpecialI),
            "specialii" | "special2" => Ok(Regime::SpecialII),
            other => Err(PottsError::InvalidParameter(format!(
                "unknown regime {other:?}"
            ))),
        }
    }
}

/// The quadratic form `Σ_r (βp(p−1)v_r^{p−2} − 1/v_r) t_r²` restricted to the zero-sum
/// subspace, in the Helmert basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedForm {
    pub basis: DMatrix<f64>,
    pub matrix: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns match `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

impl ReducedForm {
    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("q >= 2")
    }

    /// Eigenvalue of smallest magnitude and its eigenvector mapped back to `R^q`.
    pub fn smallest_magnitude(&self) -> (f64, Vec<f64>) {
        let (k, &val) = self
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .expect("q >= 2");
        let v = &self.basis * self.eigenvectors.column(k);
        (val, v.iter().cloned().collect())
    }
}

/// Diagonal coefficients `βp(p−1)v_r^{p−2} − 1/v_r`.
pub fn quadratic_coefficients(v: &[f64], params: &ModelParams) -> Vec<f64> {
    let c = params.beta * params.p as f64 * (params.p as f64 - 1.0);
    v.iter()
        .map(|&x| c * x.powi(params.p as i32 - 2) - 1.0 / x)
        .collect()
}

pub fn reduced_quadratic_form(v: &[f64], params: &ModelParams) -> Result<ReducedForm> {
    if v.iter().any(|&x| x <= 0.0) {
        return Err(PottsError::Domain(
            "reduced form needs all coordinates > 0".into(),
        ));
    }
    let q = v.len();
    let basis = helmert_basis(q);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(quadratic_coefficients(
        v, params,
    )));
    let mut matrix = basis.transpose() * d * &basis;
    // exact symmetry
    for i in 0..q - 1 {
        for j in 0..i {
            let m = 0.5 * (matrix[(i, j)] + matrix[(j, i)]);
            matrix[(i, j)] = m;
            matrix[(j, i)] = m;
        }
    }
    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..q - 1).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(q - 1, q - 1, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(ReducedForm {
        basis,
        matrix,
        eigenvalues,
        eigenvectors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest eigenvalue of the reduced form at each expanded maximizer.
    pub max_eigenvalues: Vec<f64>,
    /// Eigenvalue of smallest magnitude at the first maximizer.
    pub smallest_magnitude_eigenvalue: f64,
    pub f2: f64,
    pub f4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedPoint {
    pub params: ModelParams,
    pub kind: Regime,
    pub maximizers: MaximizerSet,
    pub diagnostics: Diagnostics,
}

/// Classifies `(β, h)` by the number of global maximizers and the definiteness of the
/// reduced form there.
pub fn classify(params: &ModelParams, tol_zero: f64) -> Result<ClassifiedPoint> {
    params.validate()?;
    if !(tol_zero > 0.0) {
        return Err(PottsError::InvalidParameter(
            "tolZero must be positive".into(),
        ));
    }
    let maximizers = find_maximizers(params, DEFAULT_TIE_TOL);
    let forms: Vec<ReducedForm> = maximizers
        .expanded
        .iter()
        .map(|m| reduced_quadratic_form(m, params))
        .collect::<Result<_>>()?;
    let max_eigenvalues: Vec<f64> = forms.iter().map(|f| f.max_eigenvalue()).collect();
    let first = &maximizers.profiles[0];
    let diagnostics = Diagnostics {
        max_eigenvalues: max_eigenvalues.clone(),
        smallest_magnitude_eigenvalue: forms[0].smallest_magnitude().0,
        f2: first.f2,
        f4: first.f4,
    };
    let describe = |what: &str| {
        PottsError::AmbiguousClassification(format!(
            "{what} (beta={}, h={}, eigenvalues={:?}, f2={:e}, f4={:e})",
            params.beta, params.h, max_eigenvalues, first.f2, first.f4
        ))
    };

    let kind = if maximizers.len() >= 2 {
        if max_eigenvalues.iter().all(|&e| e < -tol_zero) {
            Regime::Critical
        } else {
            return Err(describe("several maximizers, not all nondegenerate"));
        }
    } else {
        let top = max_eigenvalues[0];
        if top < -tol_zero {
            Regime::Regular
        } else if top.abs() <= tol_zero {
            if first.f4 < -tol_zero {
                Regime::SpecialI
            } else if first.f4.abs() <= tol_zero {
                if (params.p, params.q) == (4, 2) {
                    Regime::SpecialII
                } else {
                    return Err(describe("vanishing fourth derivative outside (p,q)=(4,2)"));
                }
            } else {
                return Err(describe("singular form with positive fourth derivative"));
            }
        } else {
            return Err(describe("positive eigenvalue at a global maximizer"));
        }
    };
    Ok(ClassifiedPoint {
        params: *params,
        kind,
        maximizers,
        diagnostics,
    })
}
