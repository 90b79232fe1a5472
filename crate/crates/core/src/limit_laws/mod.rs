//! Limit laws of the centered magnetization and its T/V/F decompositions.

mod decompose;
mod gaussian;
mod gen_normal;
mod mixture;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use decompose::{decompose_f, decompose_tv, TVDecomposition};
pub use gaussian::{gaussian_directional_cdf, GaussianLimit};
pub use gen_normal::{gen_normal_cdf, gen_normal_sample, GenNormalLaw};
pub use mixture::{mixture_weights, tau_weight, MixtureComponent, MixtureLaw};

use crate::error::{PottsError, Result};
use crate::model::MagnetizationLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitShape {
    /// `T_N` at a type-I special point.
    Shape4,
    /// `F_N` at the type-II special point.
    Shape6,
}

impl LimitShape {
    pub fn exponent(&self) -> u32 {
        match self {
            LimitShape::Shape4 => 4,
            LimitShape::Shape6 => 6,
        }
    }
}

/// Generalized normal law whose scale is `E T_N⁴` or `E F_N⁶` under `law`.
pub fn empirical_limit_scale(
    law: &MagnetizationLaw,
    mstar: &[f64],
    kind: LimitShape,
) -> Result<GenNormalLaw> {
    if mstar.len() != law.q() {
        return Err(PottsError::InvalidParameter(format!(
            "center has {} entries, law has q = {}",
            mstar.len(),
            law.q()
        )));
    }
    let n = law.n();
    let moment = match kind {
        LimitShape::Shape4 => law.moment(|x| decompose_tv(x, mstar, n).t.powi(4)),
        LimitShape::Shape6 => {
            decompose_f(mstar, mstar, n)?;
            law.moment(|x| decompose_f(x, mstar, n).expect("q = 2").powi(6))
        }
    };
    if !(moment > 0.0) {
        return Err(PottsError::Degenerate(format!(
            "limit scale moment is {moment}"
        )));
    }
    GenNormalLaw::new(kind.exponent(), moment)
}

/// `(x, F(x))` on the given grid.
pub fn cdf_table<F: Fn(f64) -> f64>(grid: &[f64], cdf: F) -> Vec<(f64, f64)> {
    grid.iter().map(|&x| (x, cdf(x))).collect()
}

/// Writes a `x,cdf` CSV table.
pub fn write_cdf_csv<W: Write>(table: &[(f64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "cdf"])?;
    for (x, f) in table {
        w.write_record([
            crate::model::io::format_f64(*x),
            crate::model::io::format_f64(*f),
        ])?;
    }
    w.flush()?;
    Ok(())
}
