use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};
use crate::numerics::{gamma_upper_regularized, ln_gamma};

/// Symmetric law with density proportional to `exp(−|x|^k / (k·m))`.
///
/// Its `k`-th moment equals `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenNormalLaw {
    pub shape: u32,
    pub scale_moment: f64,
}

impl GenNormalLaw {
    pub fn new(shape: u32, scale_moment: f64) -> Result<Self> {
        if shape != 4 && shape != 6 {
            return Err(PottsError::InvalidParameter(format!(
                "shape must be 4 or 6, got {shape}"
            )));
        }
        if !(scale_moment.is_finite() && scale_moment > 0.0) {
            return Err(PottsError::Degenerate(format!(
                "scale moment must be > 0, got {scale_moment}"
            )));
        }
        Ok(GenNormalLaw {
            shape,
            scale_moment,
        })
    }

    fn k(&self) -> f64 {
        self.shape as f64
    }

    /// `log ∫ exp(−|x|^k/(k m)) dx = log 2 + log(k m)/k + log Γ(1 + 1/k)`.
    pub fn log_normalizer(&self) -> f64 {
        let k = self.k();
        std::f64::consts::LN_2 + (k * self.scale_moment).ln() / k + ln_gamma(1.0 + 1.0 / k)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let k = self.k();
        (-(x.abs().powf(k)) / (k * self.scale_moment) - self.log_normalizer()).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        gen_normal_cdf(x, self)
    }
}

pub fn gen_normal_cdf(x: f64, law: &GenNormalLaw) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    let k = law.k();
    let y = x.abs().powf(k) / (k * law.scale_moment);
    // tail mass from Q directly so the lower tail does not cancel to zero
    let tail = 0.5 * gamma_upper_regularized(1.0 / k, y);
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Draws `±(k m Y)^{1/k}` with `Y ~ Gamma(1/k, 1)` and a fair sign.
pub fn gen_normal_sample<R: Rng + ?Sized>(law: &GenNormalLaw, rng: &mut R) -> f64 {
    let k = law.k();
    let gamma = Gamma::new(1.0 / k, 1.0).expect("valid gamma parameters");
    let y: f64 = gamma.sample(rng);
    let mag = (k * law.scale_moment * y).powf(1.0 / k);
    if rng.random::<bool>() {
        mag
    } else {
        -mag
    }
}
