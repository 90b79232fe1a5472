use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};
use crate::numerics::{helmert_basis, normal_cdf};

/// Directions with `dᵀΣd ≤ DEGENERATE_REL · tr(Σ)·|d|²` are treated as null directions.
const DEGENERATE_REL: f64 = 1e-12;

/// Centered Gaussian on the zero-sum hyperplane, `Σ^{1/2} Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianLimit {
    pub covariance: DMatrix<f64>,
    /// `BᵀΣB` in the Helmert basis `B`.
    pub reduced_covariance: DMatrix<f64>,
    #[serde(skip_serializing, default = "empty_matrix")]
    sqrt: DMatrix<f64>,
}

fn empty_matrix() -> DMatrix<f64> {
    DMatrix::zeros(0, 0)
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

impl GaussianLimit {
    pub fn new(covariance: DMatrix<f64>) -> Result<Self> {
        let q = covariance.nrows();
        if q < 2 || covariance.ncols() != q {
            return Err(PottsError::InvalidParameter(format!(
                "covariance must be square with q >= 2, got {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if covariance.iter().any(|v| !v.is_finite()) {
            return Err(PottsError::Degenerate(
                "covariance has non-finite entries".into(),
            ));
        }
        let covariance = symmetrize(&covariance);
        let basis = helmert_basis(q);
        let reduced_covariance = symmetrize(&(basis.transpose() * &covariance * &basis));
        let eig = SymmetricEigen::new(covariance.clone());
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let sqrt =
            &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
        Ok(GaussianLimit {
            covariance,
            reduced_covariance,
            sqrt,
        })
    }

    pub fn q(&self) -> usize {
        self.covariance.nrows()
    }

    /// `dᵀΣd`.
    pub fn directional_variance(&self, direction: &[f64]) -> f64 {
        let d = DVector::from_column_slice(direction);
        (d.transpose() * &self.covariance * &d)[(0, 0)]
    }

    pub fn is_degenerate_direction(&self, direction: &[f64]) -> bool {
        let norm2: f64 = direction.iter().map(|v| v * v).sum();
        let var = self.directional_variance(direction);
        var <= DEGENERATE_REL * self.covariance.trace().abs() * norm2 || var <= 0.0
    }

    pub fn directional_cdf(&self, direction: &[f64], x: f64) -> f64 {
        gaussian_directional_cdf(direction, self, x)
    }

    /// Symmetric square root with negative eigenvalues clamped to zero.
    pub fn sqrt_covariance(&self) -> DMatrix<f64> {
        if self.sqrt.nrows() == self.q() {
            self.sqrt.clone()
        } else {
            GaussianLimit::new(self.covariance.clone())
                .expect("validated covariance")
                .sqrt
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z = DVector::from_fn(self.q(), |_, _| rng.sample::<f64, _>(StandardNormal));
        if self.sqrt.nrows() == self.q() {
            (&self.sqrt * z).iter().cloned().collect()
        } else {
            (self.sqrt_covariance() * z).iter().cloned().collect()
        }
    }
}

/// `P(dᵀΣ^{1/2}Z ≤ x)`; a step at 0 along null directions.
pub fn gaussian_directional_cdf(direction: &[f64], limit: &GaussianLimit, x: f64) -> f64 {
    if limit.is_degenerate_direction(direction) {
        return if x >= 0.0 { 1.0 } else { 0.0 };
    }
    normal_cdf(x / limit.directional_variance(direction).sqrt())
}
