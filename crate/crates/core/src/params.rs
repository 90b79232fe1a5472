use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};

/// Interaction order `p`, number of colors `q`, inverse temperature `beta` and field `h`.
///
/// The field acts on color 1 (index 0 in code).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub p: u32,
    pub q: u32,
    pub beta: f64,
    pub h: f64,
}

impl ModelParams {
    pub fn new(p: u32, q: u32, beta: f64, h: f64) -> Result<Self> {
        let params = ModelParams { p, q, beta, h };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(PottsError::InvalidParameter(format!(
                "p must be >= 2, got {}",
                self.p
            )));
        }
        if self.q < 2 {
            return Err(PottsError::InvalidParameter(format!(
                "q must be >= 2, got {}",
                self.q
            )));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(PottsError::InvalidParameter(format!(
                "beta must be finite and > 0, got {}",
                self.beta
            )));
        }
        if !(self.h.is_finite() && self.h >= 0.0) {
            return Err(PottsError::InvalidParameter(format!(
                "h must be finite and >= 0, got {}",
                self.h
            )));
        }
        Ok(())
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        ModelParams { beta, ..*self }
    }

    pub fn with_h(&self, h: f64) -> Self {
        ModelParams { h, ..*self }
    }

    pub fn qn(&self) -> usize {
        self.q as usize
    }
}
